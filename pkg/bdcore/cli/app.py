# -*- coding: utf-8 -*-
"""
app module - runs the matching and coloring applications over an update stream
"""
import logging

import click

from bdcore.cli.common import (
    COMMON_OPTIONS,
    ESTIMATOR_OPTIONS,
    EXIT_VERIFICATION_FAILURE,
    add_options,
    emit,
    handle_errors,
    header_record,
    log_inputs,
    preprocess,
    progress,
    read_stream,
    resolve_configs,
)
from bdcore.coloring import ExplicitColoring, ImplicitColoring, coloring_conflicts
from bdcore.config import APPS
from bdcore.exceptions import (
    DensityContractError,
    LadderExhaustedError,
    PaletteExhaustedError,
    ParameterError,
)
from bdcore.matching import MaximalMatching

LOGGER = logging.getLogger(__name__)

CONTRACT_ERRORS = (DensityContractError, PaletteExhaustedError, LadderExhaustedError)


def _log_inputs(estimator_config, harness_config):
    """
    Emit log messages summarizing user inputs.

    Parameters
    ----------
    estimator_config : bdcore.config.EstimatorConfig
        Resolved estimator parameters.
    harness_config : bdcore.config.HarnessConfig
        Resolved harness parameters.
    """
    log_inputs("app", estimator_config, harness_config)
    LOGGER.info(
        f"Running {harness_config.app} with rho_max={harness_config.rho_max}"
    )


def _preprocessor(stream, config_path, log_directory, verbose, **overrides):
    """
    Preprocess user inputs.

    Returns
    -------
    tuple
        (UpdateStream, EstimatorConfig, HarnessConfig)

    Raises
    ------
    ParameterError
        If no application is selected.
    """
    preprocess("app", log_directory, verbose)
    update_stream = read_stream(stream)
    estimator_config, harness_config = resolve_configs(
        update_stream.n, config_path, **overrides
    )
    if harness_config.app == "none":
        raise ParameterError(
            f"No application selected: choose one of {list(APPS[1:])} with --app"
        )
    _log_inputs(estimator_config, harness_config)
    return update_stream, estimator_config, harness_config


class ImplicitColoringApp:
    """Applies batches to an ImplicitColoring and queries every non-isolated
    vertex twice after each one."""

    def __init__(self, config):
        self.view = ImplicitColoring(config)

    def apply_batch(self, kind, edges):
        """Apply a batch and report the queried coloring."""
        edges = list(edges)
        metrics = self.view.apply_batch(kind, edges)
        live = self.view.ladder.live_edges
        vertices = sorted({v for edge in live for v in edge})
        colors = self.view.implicit_color_query(vertices)
        again = self.view.implicit_color_query(vertices)
        return {
            "kind": kind,
            "size": len(edges),
            "queried": len(vertices),
            "distinct_colors": len(set(colors.values())),
            "valid": not coloring_conflicts(colors, live),
            "stable": colors == again,
            "rejected": [[list(r.edge), r.reason] for r in metrics.rejected],
        }


def make_app(harness_config, estimator_config):
    """
    Build the state of the selected application.

    Returns
    -------
    object
        State whose ``apply_batch(kind, edges)`` returns a record.
    """
    if harness_config.app == "matching":
        return MaximalMatching(
            estimator_config.n, harness_config.rho_max, estimator_config
        )
    if harness_config.app == "explicit-color":
        return ExplicitColoring(
            estimator_config.n, harness_config.rho_max, estimator_config
        )
    return ImplicitColoringApp(estimator_config)


def run(update_stream, estimator_config, harness_config):
    """
    Replay a stream through the selected application.

    Parameters
    ----------
    update_stream : bdcore.stream.UpdateStream
        Stream to replay.
    estimator_config : bdcore.config.EstimatorConfig
        Estimator parameters of the underlying orientation.
    harness_config : bdcore.config.HarnessConfig
        Application name and rho_max.

    Yields
    ------
    dict
        Header, one record per batch and a summary whose ``passed`` flag is False
        when any batch produced an invalid, non-maximal or unstable result.
    """
    header = header_record("app", update_stream, estimator_config)
    header.update({"app": harness_config.app, "rho_max": harness_config.rho_max})
    yield header

    state = make_app(harness_config, estimator_config)
    failures = 0
    with progress(len(update_stream), harness_config.app) as pbar:
        for index, batch in enumerate(update_stream):
            outcome = state.apply_batch(batch.kind, batch.edges)
            if not isinstance(outcome, dict):
                outcome = outcome.as_dict()
            record = {"record": "batch", "index": index}
            record.update(outcome)
            checks = ("valid", "maximal", "stable")
            if not all(record.get(name, True) for name in checks):
                failures += 1
                LOGGER.warning(f"Batch {index}: {harness_config.app} check failed")
            pbar.update(1)
            LOGGER.info(pbar)
            yield record

    yield {
        "record": "summary",
        "batches": len(update_stream),
        "failed_batches": failures,
        "passed": failures == 0,
    }
    LOGGER.info(f"{harness_config.app} completed with {failures} failed batches.")


@click.command(name="app")
@add_options(COMMON_OPTIONS + ESTIMATOR_OPTIONS)
@click.option(
    "--app",
    type=click.Choice(APPS[1:]),
    envvar="BDCORE_APP",
    show_envvar=True,
    help="Application to run.",
)
@click.option(
    "--rho-max",
    type=float,
    envvar="BDCORE_RHO_MAX",
    show_envvar=True,
    help="Density bound promised by the stream.",
)
@handle_errors
def app_cmd(stream, config_path, log_directory, verbose, **overrides):
    """Run an application over STREAM; exits 1 on a broken contract or check."""
    update_stream, estimator_config, harness_config = _preprocessor(
        stream, config_path, log_directory, verbose, **overrides
    )
    passed = True
    try:
        for record in run(update_stream, estimator_config, harness_config):
            emit(record)
            if record["record"] == "summary":
                passed = record["passed"]
    except CONTRACT_ERRORS as e:
        LOGGER.error(f"{e.__class__.__name__}: {e}")
        click.echo(f"Error: {e.__class__.__name__}: {e}", err=True)
        raise SystemExit(EXIT_VERIFICATION_FAILURE) from e
    if not passed:
        click.echo(f"Error: {harness_config.app} checks failed", err=True)
        raise SystemExit(EXIT_VERIFICATION_FAILURE)


if __name__ == "__main__":
    try:
        app_cmd()
    except Exception:
        LOGGER.exception("Error running bdcore app CLI.")
        raise
