# -*- coding: utf-8 -*-
"""Unit tests for bdcore.config module"""
import json

import pytest

from bdcore import DESK_SCALE_CONFIG
from bdcore.config import EstimatorConfig, HarnessConfig
from bdcore.exceptions import ParameterError


def test_estimator_config_default(test_config):
    """
    Happy path unit test for EstimatorConfig: load the shipped defaults and check
    the derived threshold and ladder height.
    """
    config = EstimatorConfig.from_json(test_config, n=10)
    assert config.n == 10
    assert config.epsilon == 0.1
    assert config.c_b == 4.0
    assert config.seed == 0
    assert config.ladder_max_level is None
    assert config.estimators == ["coreness", "density"]
    assert config.b == 922
    assert config.ladder_levels == 25
    assert config.inner_epsilon == pytest.approx(0.0125)


def test_harness_config_default(test_config):
    """Happy path unit test for HarnessConfig: load the shipped defaults."""
    config = HarnessConfig.from_json(test_config)
    assert config.oracle_mode == "off"
    assert config.app == "none"
    assert config.rho_max is None
    assert config.core_samples == 8
    assert config.interval_widening == 1.25
    assert config.exact_size_limit == 24


def test_desk_scale_config():
    """Test that the desk-scale profile lowers the threshold and uses peeling."""
    config = EstimatorConfig.from_json(DESK_SCALE_CONFIG, n=10)
    assert config.b == 12
    assert config.ladder_levels == 25
    assert HarnessConfig.from_json(DESK_SCALE_CONFIG).oracle_mode == "peel"


def test_overrides_take_precedence(test_config):
    """
    Test that override values win over the file and that None overrides are
    ignored.
    """
    config = EstimatorConfig.from_json(test_config, n=10, epsilon=0.05, seed=None)
    assert config.epsilon == 0.05
    assert config.seed == 0
    harness = HarnessConfig.from_json(test_config, oracle_mode="peel")
    assert harness.oracle_mode == "peel"


def test_small_config(test_data_dir):
    """Test loading a partial config file and capping the ladder height."""
    config_path = test_data_dir.joinpath("configs", "small_config.json")
    config = EstimatorConfig.from_json(config_path, n=6)
    assert config.seed == 5
    assert config.inner_epsilon_ratio == 1
    assert config.max_workers == 1
    assert config.ladder_levels == 8
    harness = HarnessConfig.from_json(config_path)
    assert harness.oracle_mode == "exact"
    assert harness.core_samples == 4
    assert harness.phase_ceiling_alpha == 8


def test_flat_config_file(tmp_path):
    """Test that a file without sections is read from its top-level keys."""
    config_path = tmp_path.joinpath("flat.json")
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump({"n": 5, "epsilon": 0.05, "oracle_mode": "peel"}, f)
    assert EstimatorConfig.from_json(config_path).n == 5
    assert HarnessConfig.from_json(config_path).oracle_mode == "peel"


def test_config_file_not_found(test_data_dir):
    """Test that a missing config file raises FileNotFoundError."""
    with pytest.raises(FileNotFoundError, match="could not be found"):
        EstimatorConfig.from_json(test_data_dir.joinpath("missing.json"), n=4)


def test_missing_value():
    """
    Test that EstimatorConfig raises a ValueError when the universe size is
    missing.
    """
    with pytest.raises(ValueError, match="n is missing from input."):
        EstimatorConfig({"epsilon": 0.1})


def test_bad_dtype():
    """
    Test that EstimatorConfig raises a TypeError when a parameter has the wrong
    dtype.
    """
    with pytest.raises(TypeError, match="Invalid input for epsilon: must be type"):
        EstimatorConfig({"n": 4, "epsilon": "small"})


def test_bad_subelement_dtype():
    """
    Test that EstimatorConfig raises a TypeError when a list parameter has elements
    of the wrong dtype.
    """
    with pytest.raises(TypeError, match="elements must be type"):
        EstimatorConfig({"n": 4, "estimators": ["coreness", 1]})


def test_not_a_mapping():
    """Test that a non-dictionary input raises a TypeError."""
    with pytest.raises(TypeError, match="must be a dictionary/mapping"):
        EstimatorConfig([("n", 4)])


@pytest.mark.parametrize(
    "name,value",
    [
        ("n", 0),
        ("epsilon", 0.5),
        ("epsilon", 0),
        ("c_b", 0),
        ("seed", -1),
        ("inner_epsilon_ratio", 2),
        ("log_base", 1),
        ("ladder_max_level", -1),
        ("estimators", ["cores"]),
        ("estimators", []),
        ("max_workers", 0),
    ],
)
def test_estimator_range_errors(name, value):
    """Test that out-of-range estimator parameters raise ParameterError."""
    params = {"n": 4, name: value}
    with pytest.raises(ParameterError, match=f"Invalid input for {name}"):
        EstimatorConfig(params)


@pytest.mark.parametrize(
    "params,name",
    [
        ({"oracle_mode": "sometimes"}, "oracle_mode"),
        ({"app": "coloring"}, "app"),
        ({"app": "matching"}, "rho_max"),
        ({"app": "matching", "rho_max": 0}, "rho_max"),
        ({"core_samples": -1}, "core_samples"),
        ({"interval_widening": 0.5}, "interval_widening"),
        ({"phase_ceiling_alpha": 0}, "phase_ceiling_alpha"),
    ],
)
def test_harness_range_errors(params, name):
    """Test that invalid harness parameters raise ParameterError."""
    with pytest.raises(ParameterError, match=f"Invalid input for {name}"):
        HarnessConfig(params)


@pytest.mark.parametrize(
    "fname,config_cls,error,message",
    [
        ("bad_config_dtype.json", EstimatorConfig, TypeError, "epsilon"),
        ("bad_config_range.json", EstimatorConfig, ParameterError, "epsilon"),
        ("bad_config_harness.json", HarnessConfig, ParameterError, "oracle_mode"),
    ],
)
def test_bad_config_files(test_data_dir, fname, config_cls, error, message):
    """Test that invalid config files are refused when loaded."""
    config_path = test_data_dir.joinpath("configs", fname)
    overrides = {"n": 4} if config_cls is EstimatorConfig else {}
    with pytest.raises(error, match=f"Invalid input for {message}"):
        config_cls.from_json(config_path, **overrides)


def test_to_dict_and_default_copies():
    """
    Test that to_dict returns every attribute and that list defaults are not
    shared between instances.
    """
    first = EstimatorConfig({"n": 4})
    second = EstimatorConfig({"n": 4})
    assert set(first.to_dict()) == set(EstimatorConfig.__annotations__)
    first.estimators.append("density")
    assert second.estimators == ["coreness", "density"]
    assert HarnessConfig({}).to_dict()["app"] == "none"


if __name__ == "__main__":
    pytest.main([__file__, "-s"])
