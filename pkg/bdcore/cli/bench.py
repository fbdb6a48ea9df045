# -*- coding: utf-8 -*-
"""
bench module - times a stream replay and summarizes the instrumentation counters
"""
import logging
import time
from pathlib import Path

import click
import pandas as pd

from bdcore.balanced import single_batch_op_envelope
from bdcore.cli.common import (
    COMMON_OPTIONS,
    ESTIMATOR_OPTIONS,
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
from bdcore.estimators import MultiLevel

LOGGER = logging.getLogger(__name__)

COUNTER_COLUMNS = [
    "wall_seconds",
    "max_phases",
    "bundle_iterations",
    "pushed_bundles",
    "flips",
    "elementary_ops",
    "max_elementary_ops",
]


def _log_inputs(estimator_config, harness_config, out_csv):
    """
    Emit log messages summarizing user inputs.

    Parameters
    ----------
    estimator_config : bdcore.config.EstimatorConfig
        Resolved estimator parameters.
    harness_config : bdcore.config.HarnessConfig
        Resolved harness parameters.
    out_csv : str
        Optional per-batch CSV output path.
    """
    log_inputs("bench", estimator_config, harness_config)
    if out_csv is not None:
        LOGGER.info(f"Per-batch measurements will be saved to {out_csv}")


def _preprocessor(stream, config_path, log_directory, verbose, out_csv, **overrides):
    """
    Preprocess user inputs.

    Returns
    -------
    tuple
        (UpdateStream, EstimatorConfig, HarnessConfig)
    """
    preprocess("bench", log_directory, verbose)
    update_stream = read_stream(stream)
    estimator_config, harness_config = resolve_configs(
        update_stream.n, config_path, **overrides
    )
    _log_inputs(estimator_config, harness_config, out_csv)
    return update_stream, estimator_config, harness_config


def envelope_excess(ladder, metrics):
    """
    Instances whose operation count for a batch exceeded the recorded envelope.

    Parameters
    ----------
    ladder : bdcore.estimators.MultiLevel
        Ladder after the batch.
    metrics : bdcore.estimators.MetricsRecord
        Counters of the instances that ran the batch.

    Returns
    -------
    list
        Labels of the offending instances.
    """
    instances = dict(ladder.iter_instances())
    size = max(metrics.size, 1)
    excess = []
    for label, counters in metrics.instances:
        instance = instances[label]
        envelope = single_batch_op_envelope(ladder.n, instance.cap, instance.k, size)
        if counters["elementary_ops"] > envelope:
            excess.append(label)
    return excess


def summarize(results_df):
    """
    Aggregate per-batch measurements.

    Parameters
    ----------
    results_df : pandas.DataFrame
        One row per batch with the COUNTER_COLUMNS.

    Returns
    -------
    dict
        Batch count, then ``<column>_max``, ``<column>_mean`` and
        ``<column>_total`` for every counter.
    """
    summary = {"record": "aggregate", "batches": len(results_df)}
    if results_df.empty:
        return summary
    stats = results_df[COUNTER_COLUMNS].agg(["max", "mean", "sum"])
    for column in COUNTER_COLUMNS:
        summary[f"{column}_max"] = float(stats.loc["max", column])
        summary[f"{column}_mean"] = float(stats.loc["mean", column])
        summary[f"{column}_total"] = float(stats.loc["sum", column])
    summary["envelope_exceeded_batches"] = int(
        (results_df["envelope_exceeded"] > 0).sum()
    )
    return summary


def run(update_stream, estimator_config, out_csv=None):
    """
    Replay a stream, timing every batch.

    Parameters
    ----------
    update_stream : bdcore.stream.UpdateStream
        Stream to replay.
    estimator_config : bdcore.config.EstimatorConfig
        Ladder parameters.
    out_csv : str, optional
        When given, per-batch rows are also saved to this CSV file.

    Yields
    ------
    dict
        Header, one timing record per batch and an aggregate record.
    """
    yield header_record("bench", update_stream, estimator_config)

    ladder = MultiLevel(estimator_config)
    results = []
    with progress(len(update_stream), "batches") as pbar:
        for index, batch in enumerate(update_stream):
            start = time.perf_counter()
            metrics = ladder.apply_batch(batch.kind, batch.edges)
            elapsed = time.perf_counter() - start

            record = {"record": "batch", "index": index, "wall_seconds": elapsed}
            record.update(metrics.as_dict())
            record["envelope_exceeded"] = len(envelope_excess(ladder, metrics))
            results.append({k: v for k, v in record.items() if k != "rejected"})
            pbar.update(1)
            LOGGER.info(pbar)
            yield record

    columns = ["index", "kind", "size", "envelope_exceeded"] + COUNTER_COLUMNS
    results_df = pd.DataFrame(results, columns=columns)
    if out_csv is not None:
        out_path = Path(out_csv).expanduser()
        out_path.parent.mkdir(exist_ok=True, parents=True)
        results_df.to_csv(out_path, header=True, index=False)
        LOGGER.info(f"Saved per-batch measurements to {out_path}")

    summary = summarize(results_df)
    if summary.get("envelope_exceeded_batches"):
        LOGGER.warning(
            f"{summary['envelope_exceeded_batches']} batches exceeded the operation "
            "envelope"
        )
    yield summary
    LOGGER.info("Benchmark completed successfully.")


@click.command(name="bench")
@add_options(COMMON_OPTIONS + ESTIMATOR_OPTIONS)
@click.option(
    "--out-csv",
    type=click.Path(dir_okay=False),
    default=None,
    help="Also save the per-batch measurements to this CSV file.",
)
@handle_errors
def bench_cmd(stream, config_path, log_directory, verbose, out_csv, **overrides):
    """Replay STREAM with wall-clock timing and print JSON line records."""
    update_stream, estimator_config, _ = _preprocessor(
        stream, config_path, log_directory, verbose, out_csv, **overrides
    )
    for record in run(update_stream, estimator_config, out_csv):
        emit(record)


if __name__ == "__main__":
    try:
        bench_cmd()
    except Exception:
        LOGGER.exception("Error running bdcore bench CLI.")
        raise
