# -*- coding: utf-8 -*-
"""Pytest fixtures"""
from pathlib import Path

import pytest
from click.testing import CliRunner
import utils

from bdcore import DEFAULT_CONFIG
from bdcore.config import EstimatorConfig

TESTS_DIR = Path(__file__).parent


@pytest.fixture
def test_cli_runner():
    """Return a click CliRunner for testing commands"""
    return CliRunner(mix_stderr=False)


@pytest.fixture
def test_config():
    """Return path to the shipped default configuration file."""
    return DEFAULT_CONFIG


@pytest.fixture
def test_data_dir():
    """Return path to test data directory"""
    return TESTS_DIR.joinpath("data")


@pytest.fixture
def test_streams_dir(test_data_dir):
    """Return path to the directory of small update streams"""
    return test_data_dir.joinpath("streams")


@pytest.fixture
def make_config():
    """
    Return a factory for EstimatorConfig instances with a small threshold so that
    every ladder level runs a single inner instance.
    """

    def _make_config(n, **overrides):
        params = {"n": n, "epsilon": 0.1, "c_b": 0.001, "seed": 0}
        params.update(overrides)
        return EstimatorConfig(params)

    return _make_config


@pytest.fixture
def app_config(make_config):
    """
    Return a factory for the configuration used by the application tests: a single
    inner instance per bucket and no inner epsilon reduction.
    """

    def _app_config(n, **overrides):
        params = {"c_b": 1e-4, "inner_epsilon_ratio": 1}
        params.update(overrides)
        return make_config(n, **params)

    return _app_config


@pytest.fixture
def clique_edges():
    """Exposes the clique_edges function as a fixture"""
    return utils.clique_edges


@pytest.fixture
def naive_outdegrees():
    """Exposes the naive_outdegrees function as a fixture"""
    return utils.naive_outdegrees


@pytest.fixture
def random_batches():
    """Exposes the make_random_batches function as a fixture"""
    return utils.make_random_batches


@pytest.fixture
def read_records():
    """Exposes the read_records function as a fixture"""
    return utils.read_records


@pytest.fixture
def records_frame():
    """Exposes the records_frame function as a fixture"""
    return utils.records_frame
