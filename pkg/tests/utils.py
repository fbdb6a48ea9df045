# -*- coding: utf-8 -*-
"""Helper functions for tests"""
import itertools
import json
from collections import Counter

import numpy as np
import pandas as pd


def clique_edges(k, offset=0):
    """
    Edges of the complete graph on the vertices offset..offset+k-1.

    Parameters
    ----------
    k : int
        Number of vertices.
    offset : int, optional
        Smallest vertex id, by default 0.

    Returns
    -------
    list
        (u, v) tuples with u < v.
    """
    return list(itertools.combinations(range(offset, offset + k), 2))


def naive_outdegrees(tails, n):
    """
    Out-degrees counted from an edge -> tail mapping.

    Parameters
    ----------
    tails : dict
        Maps an edge to the vertex it is oriented away from.
    n : int
        Universe size.

    Returns
    -------
    dict
        Vertex -> out-degree, with every vertex of the universe present.
    """
    counts = Counter(tails.values())
    return {v: counts.get(v, 0) for v in range(n)}


def make_random_batches(n, batches, size, seed):
    """
    Random mix of valid insertion and deletion batches over a fixed universe.

    Parameters
    ----------
    n : int
        Universe size.
    batches : int
        Number of batches.
    size : int
        Maximum batch size.
    seed : int
        Seed for numpy's default generator.

    Returns
    -------
    list
        (kind, edges) tuples; every deletion targets a live edge.
    """
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    live = set()
    out = []
    for _ in range(batches):
        free = [p for p in pairs if p not in live]
        if live and (not free or rng.random() < 0.4):
            pool = sorted(live)
            count = min(len(pool), int(rng.integers(1, size + 1)))
            picked = [pool[j] for j in rng.choice(len(pool), count, replace=False)]
            live.difference_update(picked)
            out.append(("del", picked))
        else:
            count = min(len(free), int(rng.integers(1, size + 1)))
            picked = [free[j] for j in rng.choice(len(free), count, replace=False)]
            live.update(picked)
            out.append(("ins", picked))

    return out


def read_records(output):
    """
    Parse the JSON lines written by a bdcore command.

    Parameters
    ----------
    output : str
        Captured stdout.

    Returns
    -------
    list
        One dictionary per non-empty line.
    """
    return [json.loads(line) for line in output.splitlines() if line.strip()]


def records_frame(records, kind="batch"):
    """
    Collect the records of one kind into a DataFrame.

    Parameters
    ----------
    records : list
        Parsed records.
    kind : str, optional
        Value of the ``record`` field to keep, by default "batch".

    Returns
    -------
    pandas.DataFrame
        One row per matching record.
    """
    return pd.DataFrame([r for r in records if r["record"] == kind])
