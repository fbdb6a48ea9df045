# -*- coding: utf-8 -*-
"""
utils module
"""
import math
from pathlib import Path

import numpy as np

from bdcore.exceptions import UniverseError

# purpose codes for per-(level, purpose) random streams
PURPOSE_CORENESS_SAMPLE = 1
PURPOSE_DENSITY_BUCKET = 2
PURPOSE_PALETTE = 3
PURPOSE_GENERATOR = 4
PURPOSE_ORACLE = 5


def verify_file(fpath):
    """
    Check that the input file path exists and is a file.

    Parameters
    ----------
    fpath : str
        Path to file.

    Raises
    ------
    FileNotFoundError
        A FileNotFoundError will be raised if the input path does not exist.
    TypeError
        A TypeError will be raised if the input path is not a file.
    """
    if Path(fpath).exists() is False:
        raise FileNotFoundError(f"Input fpath {fpath} could not be found.")
    if Path(fpath).is_dir() is True:
        raise TypeError(f"Input fpath {fpath} is not a file.")


def verify_vertex(v, n):
    """
    Check that a vertex id belongs to the universe {0, ..., n - 1}.

    Parameters
    ----------
    v : int
        Vertex id.
    n : int
        Universe size.

    Raises
    ------
    UniverseError
        If v is negative or not smaller than n.
    """
    if not 0 <= v < n:
        raise UniverseError(f"Vertex {v} is outside of the universe [0, {n}).")


def normalize_edge(u, v):
    """
    Return an undirected edge as an ordered (low, high) tuple.

    Parameters
    ----------
    u, v : int
        Endpoints.

    Returns
    -------
    tuple
        (min(u, v), max(u, v))
    """
    if u <= v:
        return (u, v)
    return (v, u)


def log_n(n, base=math.e):
    """
    Logarithm of the universe size used throughout the bound arithmetic.

    Parameters
    ----------
    n : int
        Universe size.
    base : float, optional
        Logarithm base, by default e.

    Returns
    -------
    float
        log_base(max(n, 1)).
    """
    return math.log(max(n, 1), base)


def make_generator(seed, *spawn_key):
    """
    Build a counter-based random generator for one (level, purpose) stream.

    Parameters
    ----------
    seed : int
        Root seed.
    *spawn_key : int
        Identifiers of the stream, e.g. (level, purpose).

    Returns
    -------
    numpy.random.Generator
        Philox-backed generator; identical arguments give identical draws.
    """
    seed_seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(seed_seq))
