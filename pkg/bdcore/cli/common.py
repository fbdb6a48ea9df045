# -*- coding: utf-8 -*-
"""
common module - options and helpers shared by the bdcore commands
"""
import functools
import json
import logging
import os

import click
import tqdm

from bdcore import DEFAULT_CONFIG, __version__
from bdcore.config import ORACLE_MODES, EstimatorConfig, HarnessConfig
from bdcore.exceptions import ParameterError, SizeLimitError, StreamParseError
from bdcore.log import init_logger, remove_streamhandlers
from bdcore.stream import UpdateStream
from bdcore.utils import PURPOSE_ORACLE, make_generator

LOGGER = logging.getLogger(__name__)

USAGE_ERRORS = (StreamParseError, ParameterError, SizeLimitError)
EXIT_VERIFICATION_FAILURE = 1
EXIT_USAGE_ERROR = 2


def _option(*decls, envvar=None, **kwargs):
    if envvar is not None:
        kwargs["envvar"] = f"BDCORE_{envvar}"
        kwargs["show_envvar"] = True
    return click.option(*decls, **kwargs)


ESTIMATOR_OPTIONS = [
    _option(
        "--epsilon", type=float, envvar="EPSILON", help="Ladder epsilon in (0, 0.1]."
    ),
    _option(
        "--c-b",
        "c_b",
        type=float,
        envvar="C_B",
        help="Constant in B = c_b log n / eps^2.",
    ),
    _option("--seed", type=int, envvar="SEED", help="Root seed of all randomness."),
    _option(
        "--ladder-max-level",
        type=int,
        envvar="LADDER_MAX_LEVEL",
        help="Cap on the top ladder level.",
    ),
    _option(
        "--max-workers",
        type=int,
        envvar="MAX_WORKERS",
        help="Number of threads used to fan a batch out over the ladder levels.",
    ),
]

HARNESS_OPTIONS = [
    _option(
        "--oracle-mode",
        type=click.Choice(ORACLE_MODES),
        envvar="ORACLE_MODE",
        help="Reference computations attached to each batch record.",
    ),
    _option(
        "--rho-max",
        type=float,
        envvar="RHO_MAX",
        help="Density bound promised to the applications.",
    ),
]

COMMON_OPTIONS = [
    click.argument("stream", type=click.File("r"), default="-"),
    _option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        envvar="CONFIG",
        help="JSON configuration file; flags and environment variables win over it.",
    ),
    _option(
        "--log-directory", type=click.Path(file_okay=False), envvar="LOG_DIRECTORY"
    ),
    click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level."),
]


def add_options(options):
    """Decorator applying a list of click options."""

    def decorator(func):
        for option in reversed(options):
            func = option(func)
        return func

    return decorator


def handle_errors(func):
    """Map usage errors to exit code 2 with a diagnostic on stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except USAGE_ERRORS as e:
            LOGGER.error(f"{e.__class__.__name__}: {e}")
            click.echo(f"Error: {e.__class__.__name__}: {e}", err=True)
            raise SystemExit(EXIT_USAGE_ERROR) from e

    return wrapper


def read_stream(handle):
    """
    Parse a stream from an open file handle.

    Raises
    ------
    StreamParseError
        If the stream is malformed.
    """
    stream = UpdateStream.parse(handle.read())
    LOGGER.info(
        f"Loaded stream with n={stream.n} and {len(stream)} batches "
        f"({sum(len(b) for b in stream)} updates)"
    )
    return stream


def resolve_configs(n, config_path=None, **overrides):
    """
    Build the estimator and harness configs for a stream.

    Parameters
    ----------
    n : int
        Universe size of the stream.
    config_path : str, optional
        JSON config; the shipped default config when None.
    **overrides
        Values from flags or environment variables; None values are ignored.

    Returns
    -------
    tuple
        (EstimatorConfig, HarnessConfig)
    """
    config_path = config_path or DEFAULT_CONFIG
    estimator_keys = EstimatorConfig.__annotations__
    harness_keys = HarnessConfig.__annotations__
    estimator_config = EstimatorConfig.from_json(
        config_path,
        n=n,
        **{k: v for k, v in overrides.items() if k in estimator_keys},
    )
    harness_config = HarnessConfig.from_json(
        config_path, **{k: v for k, v in overrides.items() if k in harness_keys}
    )
    return estimator_config, harness_config


def preprocess(command, log_directory, verbose):
    """Initialize logging for a command; log records never reach stdout."""
    logger = init_logger(
        f"bdcore-{command}",
        log_directory,
        module="bdcore",
        verbose=verbose,
        stream=False,
    )
    remove_streamhandlers(logger)
    return logger


def log_inputs(command, estimator_config, harness_config):
    """
    Emit log messages summarizing the effective settings.

    Parameters
    ----------
    command : str
        Command name.
    estimator_config : bdcore.config.EstimatorConfig
        Resolved estimator parameters.
    harness_config : bdcore.config.HarnessConfig
        Resolved harness parameters.
    """
    LOGGER.info(f"Running bdcore {command} (version {__version__})")
    for name, value in estimator_config.to_dict().items():
        LOGGER.info(f"estimator.{name} = {value}")
    LOGGER.info(f"estimator.B = {estimator_config.b}")
    LOGGER.info(f"estimator.L = {estimator_config.ladder_levels}")
    for name, value in harness_config.to_dict().items():
        LOGGER.info(f"harness.{name} = {value}")


def emit(record):
    """Write one report record as a JSON line on stdout."""
    click.echo(json.dumps(record, sort_keys=True, default=_jsonable))


def _jsonable(value):
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def header_record(command, stream, estimator_config):
    """First record of every report."""
    return {
        "record": "header",
        "command": command,
        "version": __version__,
        "n": stream.n,
        "batches": len(stream),
        "epsilon": estimator_config.epsilon,
        "c_b": estimator_config.c_b,
        "b": estimator_config.b,
        "seed": estimator_config.seed,
        "levels": estimator_config.ladder_levels + 1,
    }


def check_oracle_size(n, harness_config):
    """
    Refuse exact subset checks on oversize graphs before any output is written.

    Raises
    ------
    SizeLimitError
        If the exact oracle is requested for n above the size limit.
    """
    limit = harness_config.exact_size_limit
    if harness_config.oracle_mode == "exact" and n > limit:
        raise SizeLimitError(
            f"Exact density checks are limited to n <= {limit}, got n={n}"
        )


def sample_vertices(n, count, seed):
    """Deterministic sample of up to ``count`` vertices, sorted."""
    if count <= 0 or n == 0:
        return []
    rng = make_generator(seed, 0, PURPOSE_ORACLE)
    return sorted(rng.permutation(n)[: min(count, n)].tolist())


def progress(total, desc):
    """Progress bar rendered into the log instead of the terminal."""
    return tqdm.tqdm(
        total=total, desc=desc, ascii=True, file=open(os.devnull, "w", encoding="utf-8")
    )
