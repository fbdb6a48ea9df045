# -*- coding: utf-8 -*-
"""
verify module - replays a stream and checks every maintained structure against the
reference oracles after each batch
"""
import logging
from collections import Counter

import click

from bdcore.balanced import extraction_bound, phase_ceiling
from bdcore.cli.common import (
    COMMON_OPTIONS,
    ESTIMATOR_OPTIONS,
    EXIT_VERIFICATION_FAILURE,
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
)
from bdcore.estimators import MultiLevel
from bdcore.exceptions import LadderExhaustedError
from bdcore.oracle import (
    StaticGraph,
    exact_arboricity,
    exact_coreness,
    exact_density,
    orientation_violations,
)

LOGGER = logging.getLogger(__name__)

STRICT_PASS_FRACTION = 0.99
TOLERANCE = 1e-9


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
    log_inputs("verify", estimator_config, harness_config)
    LOGGER.info(
        f"Checking with the {harness_config.oracle_mode} oracle; intervals are "
        f"widened by {harness_config.interval_widening}"
    )


def _preprocessor(stream, config_path, log_directory, verbose, **overrides):
    """
    Preprocess user inputs.

    With the oracle switched off, verify picks the exact oracle when the universe
    fits the subset enumeration and the peeling oracle otherwise.

    Returns
    -------
    tuple
        (UpdateStream, EstimatorConfig, HarnessConfig)
    """
    preprocess("verify", log_directory, verbose)
    update_stream = read_stream(stream)
    estimator_config, harness_config = resolve_configs(
        update_stream.n, config_path, **overrides
    )
    if harness_config.oracle_mode == "off":
        fits = update_stream.n <= harness_config.exact_size_limit
        harness_config.oracle_mode = "exact" if fits else "peel"
    check_oracle_size(update_stream.n, harness_config)
    _log_inputs(estimator_config, harness_config)
    return update_stream, estimator_config, harness_config


def _within(value, low, high, widening=1.0):
    return low / widening - TOLERANCE <= value <= high * widening + TOLERANCE


def instance_checks(ladder, phase_alpha):
    """
    Balance, structure and counter checks of every maintained instance.

    Parameters
    ----------
    ladder : bdcore.estimators.MultiLevel
        Ladder after a batch.
    phase_alpha : float
        Constant of the phase ceiling alpha * cap^3.

    Returns
    -------
    list
        (check, detail) pairs.
    """
    violations = []
    for label, instance in ladder.iter_instances():
        violations.extend(("h-balanced", f"{label}: {v}") for v in instance.check())
        counters = instance.counters
        bound = extraction_bound(instance.cap)
        if counters.bundle_iterations > bound:
            violations.append(
                (
                    "extraction-bound",
                    f"{label}: {counters.bundle_iterations} bundle extractions "
                    f"> {bound}",
                )
            )
        if counters.pushed_bundles > instance.cap:
            violations.append(
                (
                    "pushed-bundles",
                    f"{label}: {counters.pushed_bundles} pushed bundles > cap "
                    f"{instance.cap}",
                )
            )
        ceiling = phase_ceiling(instance.cap, phase_alpha)
        if counters.max_phases > ceiling:
            violations.append(
                (
                    "phase-ceiling",
                    f"{label}: {counters.max_phases} phases > ceiling {ceiling}",
                )
            )
    return violations


def coreness_checks(ladder, core, epsilon, widening):
    """
    Compare core_ALG with the exact coreness of every non-isolated vertex.

    Returns
    -------
    tuple
        (violations, strict passes, vertices checked). A vertex passes strictly
        inside [(1/2 - eps) core, (2 + eps) core]; only vertices outside the widened
        interval are violations.
    """
    violations = []
    strict = total = 0
    for v in range(ladder.n):
        if ladder.degree(v) == 0:
            continue
        total += 1
        estimate = ladder.coreness(v)
        low, high = (0.5 - epsilon) * core[v], (2 + epsilon) * core[v]
        if _within(estimate, low, high):
            strict += 1
        elif not _within(estimate, low, high, widening):
            violations.append(
                (
                    "coreness",
                    f"vertex {v}: core_ALG {estimate:.4g} outside the widened interval "
                    f"around [{low:.4g}, {high:.4g}] for coreness {core[v]}",
                )
            )
    return violations, strict, total


def density_checks(ladder, graph, epsilon, harness_config):
    """
    Compare rho_ALG, lambda_ALG and the exposed orientation with exact measures.

    Densities below 1 are floored at 1 on the upper side, the lowest ladder level.

    Returns
    -------
    list
        (check, detail) pairs.
    """
    try:
        estimate = ladder.density()
    except LadderExhaustedError as e:
        return [("density", str(e))]

    if graph.m == 0:
        if estimate.rho > 1 + epsilon + TOLERANCE:
            return [
                (
                    "density",
                    f"rho_ALG {estimate.rho:.4g} > {1 + epsilon} on an empty graph",
                )
            ]
        return []
    if harness_config.oracle_mode != "exact":
        return []

    widening = harness_config.interval_widening
    limit = harness_config.exact_size_limit
    rho = float(exact_density(graph, limit))
    arboricity = exact_arboricity(graph, limit)
    violations = []
    upper = (1 + epsilon) * max(rho, 1)
    if not _within(estimate.rho, (1 - epsilon) * rho, upper, widening):
        violations.append(
            ("density", f"rho_ALG {estimate.rho:.4g} too far from density {rho:.4g}")
        )
    low, high = (1 - epsilon) * arboricity, (2 + epsilon) * arboricity
    if not _within(estimate.arboricity, low, high, widening):
        violations.append(
            (
                "arboricity",
                f"lambda_ALG {estimate.arboricity:.4g} too far from arboricity "
                f"{arboricity}",
            )
        )
    top = estimate.orientation.max_out_degree()
    bound = (2 + epsilon) * max(rho, 1) * widening
    if top > bound + TOLERANCE:
        violations.append(
            (
                "orientation-bound",
                f"exposed max out-degree {top} > {bound:.4g} at level {estimate.level}",
            )
        )
    return violations


def sandwich_checks(ladder, graph, core, estimator_config, density=None):
    """Coreness sandwich and density lower bound of every instance holding the
    whole graph."""
    violations = []
    live = ladder.live_edges
    for label, instance in ladder.iter_instances():
        if instance.live_edges != live:
            continue
        outdeg = {v: instance.out_degree(v) for v in range(graph.n)}
        for detail in orientation_violations(
            outdeg,
            graph,
            core,
            instance.h,
            estimator_config.epsilon,
            k=instance.k,
            density=density,
            log_base=estimator_config.log_base,
        ):
            violations.append(("sandwich", f"{label}: {detail}"))
    return violations


def run(update_stream, estimator_config, harness_config):
    """
    Replay a stream and check it after every batch.

    Parameters
    ----------
    update_stream : bdcore.stream.UpdateStream
        Stream to replay.
    estimator_config : bdcore.config.EstimatorConfig
        Ladder parameters.
    harness_config : bdcore.config.HarnessConfig
        Oracle mode, widening and phase ceiling.

    Yields
    ------
    dict
        Header, one check record per batch and a final summary record whose
        ``passed`` flag is False on any violation.
    """
    yield header_record("verify", update_stream, estimator_config)

    ladder = MultiLevel(estimator_config)
    epsilon = estimator_config.epsilon
    families = estimator_config.estimators
    by_check = Counter()
    strict_total = checked_total = 0

    with progress(len(update_stream), "batches") as pbar:
        for index, batch in enumerate(update_stream):
            ladder.apply_batch(batch.kind, batch.edges)
            graph = StaticGraph(ladder.n, tuple(ladder.live_edges))
            core = exact_coreness(graph)
            density = None
            if harness_config.oracle_mode == "exact":
                density = exact_density(graph, harness_config.exact_size_limit)

            violations = instance_checks(ladder, harness_config.phase_ceiling_alpha)
            if "coreness" in families:
                found, strict, checked = coreness_checks(
                    ladder, core, epsilon, harness_config.interval_widening
                )
                violations.extend(found)
                strict_total += strict
                checked_total += checked
            if "density" in families:
                violations.extend(
                    density_checks(ladder, graph, epsilon, harness_config)
                )
            violations.extend(
                sandwich_checks(ladder, graph, core, estimator_config, density)
            )

            by_check.update(check for check, _ in violations)
            for check, detail in violations:
                LOGGER.warning(f"Batch {index}: {check} violation: {detail}")
            pbar.update(1)
            LOGGER.info(pbar)
            yield {
                "record": "check",
                "index": index,
                "kind": batch.kind,
                "size": len(batch),
                "violations": [
                    {"check": check, "detail": detail} for check, detail in violations
                ],
            }

    fraction = strict_total / checked_total if checked_total else None
    if fraction is not None and fraction < STRICT_PASS_FRACTION:
        by_check["coreness-strict"] += 1
        LOGGER.warning(
            f"Only {fraction:.2%} of coreness estimates fell inside the strict interval"
        )
    passed = not by_check
    LOGGER.info(f"Verification {'passed' if passed else 'failed'}: {dict(by_check)}")
    yield {
        "record": "summary",
        "batches": len(update_stream),
        "passed": passed,
        "violations": sum(by_check.values()),
        "by_check": dict(sorted(by_check.items())),
        "core_strict_pass_fraction": fraction,
    }


@click.command(name="verify")
@add_options(COMMON_OPTIONS + ESTIMATOR_OPTIONS + HARNESS_OPTIONS)
@handle_errors
def verify_cmd(stream, config_path, log_directory, verbose, **overrides):
    """Replay STREAM and check every batch; exits 1 on any violation."""
    update_stream, estimator_config, harness_config = _preprocessor(
        stream, config_path, log_directory, verbose, **overrides
    )
    passed = True
    for record in run(update_stream, estimator_config, harness_config):
        emit(record)
        if record["record"] == "summary":
            passed = record["passed"]
    if not passed:
        click.echo("Error: verification failed", err=True)
        raise SystemExit(EXIT_VERIFICATION_FAILURE)


if __name__ == "__main__":
    try:
        verify_cmd()
    except Exception:
        LOGGER.exception("Error running bdcore verify CLI.")
        raise
