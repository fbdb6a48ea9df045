# -*- coding: utf-8 -*-
"""
run module - replays an update stream through the estimator ladder
"""
import logging

import click

from bdcore.cli.common import (
    COMMON_OPTIONS,
    ESTIMATOR_OPTIONS,
    HARNESS_OPTIONS,
    add_options,
    check_oracle_size,
    emit,
    handle_errors,
    header_record,
    log_inputs,
    preprocess,
    progress,
    read_stream,
    resolve_configs,
    sample_vertices,
)
from bdcore.estimators import MultiLevel
from bdcore.oracle import StaticGraph, exact_arboricity, exact_coreness, exact_density

LOGGER = logging.getLogger(__name__)


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
    log_inputs("run", estimator_config, harness_config)
    if harness_config.oracle_mode != "off":
        LOGGER.info(
            f"Attaching {harness_config.oracle_mode} oracle readouts to every batch"
        )


def _preprocessor(stream, config_path, log_directory, verbose, **overrides):
    """
    Preprocess user inputs.

    Parameters
    ----------
    stream : io.TextIOBase
        Open stream file.
    config_path : str
        Optional JSON config.
    log_directory : str
        Directory for log files; no log file when None.
    verbose : bool
        Flag to signal ``DEBUG`` verbosity.
    **overrides
        Flag and environment variable values.

    Returns
    -------
    tuple
        (UpdateStream, EstimatorConfig, HarnessConfig)
    """
    preprocess("run", log_directory, verbose)
    update_stream = read_stream(stream)
    estimator_config, harness_config = resolve_configs(
        update_stream.n, config_path, **overrides
    )
    check_oracle_size(update_stream.n, harness_config)
    _log_inputs(estimator_config, harness_config)
    return update_stream, estimator_config, harness_config


def oracle_readout(ladder, vertices, mode, limit):
    """
    Reference measures of the ladder's current graph.

    Parameters
    ----------
    ladder : bdcore.estimators.MultiLevel
        Ladder holding the live graph.
    vertices : list of int
        Vertices whose exact coreness is reported.
    mode : str
        "peel" for coreness only, "exact" to add density and arboricity.
    limit : int
        Largest n accepted by the exact subset enumeration.

    Returns
    -------
    dict
        core_exact, and rho_exact and lambda_exact in exact mode.
    """
    graph = StaticGraph(ladder.n, tuple(ladder.live_edges))
    core = exact_coreness(graph)
    readout = {"core_exact": {str(v): core[v] for v in vertices}}
    if mode == "exact":
        readout["rho_exact"] = float(exact_density(graph, limit))
        readout["lambda_exact"] = exact_arboricity(graph, limit)
    return readout


def run(update_stream, estimator_config, harness_config):
    """
    Replay a stream, yielding one JSON-ready record per batch after the header.

    Parameters
    ----------
    update_stream : bdcore.stream.UpdateStream
        Stream to replay.
    estimator_config : bdcore.config.EstimatorConfig
        Ladder parameters.
    harness_config : bdcore.config.HarnessConfig
        Oracle mode and readout settings.

    Yields
    ------
    dict
        Header, then per-batch records holding the instrumentation counters,
        core_ALG of the sampled vertices, rho_ALG, lambda_ALG and the level
        verdicts.
    """
    yield header_record("run", update_stream, estimator_config)

    ladder = MultiLevel(estimator_config)
    vertices = sample_vertices(
        update_stream.n, harness_config.core_samples, estimator_config.seed
    )
    LOGGER.info(f"Reporting core_ALG for vertices {vertices}")

    with progress(len(update_stream), "batches") as pbar:
        for index, batch in enumerate(update_stream):
            metrics = ladder.apply_batch(batch.kind, batch.edges)
            record = {"record": "batch", "index": index}
            record.update(metrics.as_dict())
            record.update(ladder.report(vertices).as_dict())
            if harness_config.oracle_mode != "off":
                record.update(
                    oracle_readout(
                        ladder,
                        vertices,
                        harness_config.oracle_mode,
                        harness_config.exact_size_limit,
                    )
                )
            pbar.update(1)
            LOGGER.info(pbar)
            yield record

    LOGGER.info("Stream replay completed successfully.")


@click.command(name="run")
@add_options(COMMON_OPTIONS + ESTIMATOR_OPTIONS + HARNESS_OPTIONS)
@handle_errors
def run_cmd(stream, config_path, log_directory, verbose, **overrides):
    """Replay STREAM (stdin by default) and print JSON line records."""
    update_stream, estimator_config, harness_config = _preprocessor(
        stream, config_path, log_directory, verbose, **overrides
    )
    for record in run(update_stream, estimator_config, harness_config):
        emit(record)


if __name__ == "__main__":
    try:
        run_cmd()
    except Exception:
        LOGGER.exception("Error running bdcore run CLI.")
        raise
