# -*- coding: utf-8 -*-
"""
gen module - writes deterministic synthetic update streams
"""
import logging

import click

from bdcore.cli.common import handle_errors, preprocess
from bdcore.stream import GENERATOR_KINDS, gen

LOGGER = logging.getLogger(__name__)


def _log_inputs(kind, seed, params):
    """
    Emit log messages summarizing user inputs.

    Parameters
    ----------
    kind : str
        Generator kind.
    seed : int
        Root seed.
    params : dict
        Generator parameters.
    """
    LOGGER.info(f"Generating a {kind} stream with seed {seed}")
    for name, value in params.items():
        LOGGER.info(f"{name} = {value}")


def _preprocessor(kind, seed, log_directory, verbose, **params):
    """
    Preprocess user inputs.

    Returns
    -------
    dict
        Generator parameters with unset options removed.
    """
    preprocess("gen", log_directory, verbose)
    params = {k: v for k, v in params.items() if v is not None}
    _log_inputs(kind, seed, params)
    return params


def run(kind, seed, out, **params):
    """
    Generate a stream and write its canonical text.

    Parameters
    ----------
    kind : str
        One of gnm-random, clique-plant, sliding-window, adversarial-stair.
    seed : int
        Root seed; identical inputs give identical output.
    out : io.TextIOBase
        Destination handle.
    **params
        n, m, batches, k and window.

    Returns
    -------
    bdcore.stream.UpdateStream
        The generated stream.
    """
    stream = gen(kind, seed=seed, **params)
    out.write(stream.serialize())
    LOGGER.info("Stream written successfully.")
    return stream


@click.command(name="gen")
@click.option("--kind", type=click.Choice(GENERATOR_KINDS), required=True)
@click.option("--n", "n", type=int, required=True, help="Vertex universe size.")
@click.option("--m", "m", type=int, default=None, help="Number of random edges.")
@click.option("--k", "k", type=int, default=None, help="Planted clique size.")
@click.option("--batches", type=int, default=None, help="Number of batches.")
@click.option("--window", type=int, default=None, help="Sliding window length.")
@click.option("--seed", type=int, default=0, envvar="BDCORE_SEED", show_envvar=True)
@click.option("--out", type=click.File("w"), default="-", help="Output file.")
@click.option("--log-directory", type=click.Path(file_okay=False), default=None)
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level.")
@handle_errors
def gen_cmd(kind, seed, out, log_directory, verbose, **params):
    """Write a synthetic update stream (stdout by default)."""
    params = _preprocessor(kind, seed, log_directory, verbose, **params)
    required = {"gnm-random": ["m"], "sliding-window": ["m"], "clique-plant": ["k"]}
    missing = [name for name in required.get(kind, []) if name not in params]
    if missing:
        raise click.UsageError(f"--{missing[0]} is required for {kind} streams")
    run(kind, seed, out, **params)


if __name__ == "__main__":
    try:
        gen_cmd()
    except Exception:
        LOGGER.exception("Error running bdcore gen CLI.")
        raise
