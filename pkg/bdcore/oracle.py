# -*- coding: utf-8 -*-
"""
oracle module

Exact reference measures for small static graphs (coreness by peeling, density
and arboricity by subset enumeration) and empirical checks of how those measures
concentrate under independent edge sampling.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import tqdm

from bdcore.exceptions import ParameterError, SizeLimitError
from bdcore.utils import PURPOSE_ORACLE, make_generator, normalize_edge, verify_vertex

LOGGER = logging.getLogger(__name__)

EXACT_SIZE_LIMIT = 24
CONCENTRATION_CHECKS = ("coreness-upper", "coreness-lower", "arboricity", "density")


@dataclass(frozen=True)
class StaticGraph:
    """
    A simple loopless undirected graph on vertices 0..n-1.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : iterable of tuple
        Undirected edges; stored normalized and sorted.

    Raises
    ------
    ParameterError
        On a self-loop or a repeated edge.
    UniverseError
        On an endpoint outside 0..n-1.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise ParameterError(f"Self-loop ({u}, {v}) in static graph.")
            verify_vertex(u, self.n)
            verify_vertex(v, self.n)
            pair = normalize_edge(u, v)
            if pair in normalized:
                raise ParameterError(f"Repeated edge {pair} in static graph.")
            normalized.add(pair)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def m(self):
        """Number of edges."""
        return len(self.edges)

    def adjacency(self):
        """List of neighbor sets."""
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degrees(self):
        """List of vertex degrees."""
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def peeling_order(g):
    """
    Repeatedly remove a minimum-degree vertex (smallest id on ties).

    Parameters
    ----------
    g : StaticGraph
        Input graph.

    Returns
    -------
    tuple
        (order, backward): the removal order and, for each removed vertex, its
        degree at removal time.
    """
    adj = g.adjacency()
    degree = [len(a) for a in adj]
    buckets = [set() for _ in range(max(degree, default=0) + 1)]
    for v, d in enumerate(degree):
        buckets[d].add(v)

    removed = [False] * g.n
    order = []
    backward = []
    low = 0
    for _ in range(g.n):
        while not buckets[low]:
            low += 1
        v = min(buckets[low])
        buckets[low].remove(v)
        removed[v] = True
        order.append(v)
        backward.append(degree[v])
        for w in adj[v]:
            if removed[w]:
                continue
            buckets[degree[w]].remove(w)
            degree[w] -= 1
            buckets[degree[w]].add(w)
        low = max(0, low - 1)

    return order, backward


def coreness_from_order(order, backward):
    """
    Coreness from a peeling order: running maximum of the backward degrees.

    Returns
    -------
    dict
        vertex -> coreness.
    """
    core = {}
    running = 0
    for v, d in zip(order, backward):
        running = max(running, d)
        core[v] = running
    return core


def exact_coreness(g):
    """
    Exact coreness of every vertex.

    Parameters
    ----------
    g : StaticGraph
        Input graph.

    Returns
    -------
    dict
        vertex -> coreness (0 for isolated vertices).
    """
    return coreness_from_order(*peeling_order(g))


def _check_size(g, limit):
    if g.n > limit:
        raise SizeLimitError(
            f"Exact subset enumeration is limited to n <= {limit}, got n={g.n}"
        )


def _subset_edge_counts(g):
    """Edge count and size of the induced subgraph of every vertex mask."""
    size = 1 << g.n
    counts = np.zeros(size, dtype=np.int32)
    popcount = np.zeros(size, dtype=np.int8)
    neighbors = [0] * g.n
    for u, v in g.edges:
        neighbors[u] |= 1 << v
        neighbors[v] |= 1 << u

    for v in range(g.n):
        half = 1 << v
        low = np.arange(half, dtype=np.int64)
        below = neighbors[v] & (half - 1)
        popcount[half : 2 * half] = popcount[:half] + 1
        counts[half : 2 * half] = counts[:half] + popcount[low & below]

    return counts, popcount


def _max_edges_per_size(g, limit):
    _check_size(g, limit)
    counts, popcount = _subset_edge_counts(g)
    best = {}
    for s in range(1, g.n + 1):
        best[s] = int(counts[popcount == s].max())
    return best, counts, popcount


def exact_density(g, limit=EXACT_SIZE_LIMIT):
    """
    Exact density max |E[S]| / |S| over nonempty vertex sets S.

    Parameters
    ----------
    g : StaticGraph
        Input graph.
    limit : int, optional
        Largest n accepted, by default 24.

    Returns
    -------
    fractions.Fraction
        Exact density; 0 for an edgeless or empty graph.

    Raises
    ------
    SizeLimitError
        If g.n exceeds ``limit``.
    """
    best, _, _ = _max_edges_per_size(g, limit)
    return max((Fraction(m, s) for s, m in best.items()), default=Fraction(0))


def densest_subset(g, limit=EXACT_SIZE_LIMIT):
    """
    One vertex set attaining the exact density.

    Returns
    -------
    tuple
        (vertices, density): frozenset of vertices and the Fraction density.
    """
    best, counts, popcount = _max_edges_per_size(g, limit)
    if not best:
        return frozenset(), Fraction(0)
    s, m = max(best.items(), key=lambda item: (Fraction(item[1], item[0]), -item[0]))
    mask = int(np.flatnonzero((popcount == s) & (counts == m))[0])
    vertices = frozenset(v for v in range(g.n) if mask >> v & 1)
    return vertices, Fraction(m, s)


def exact_arboricity(g, limit=EXACT_SIZE_LIMIT):
    """
    Exact arboricity max ceil(|E[S]| / (|S| - 1)) over sets with |S| >= 2.

    Parameters
    ----------
    g : StaticGraph
        Input graph.
    limit : int, optional
        Largest n accepted, by default 24.

    Returns
    -------
    int
        Arboricity; 0 for an edgeless graph.

    Raises
    ------
    SizeLimitError
        If g.n exceeds ``limit``.
    """
    best, _, _ = _max_edges_per_size(g, limit)
    return max((-(-m // (s - 1)) for s, m in best.items() if s >= 2), default=0)


def sample_edges(g, p, seed, trial=0):
    """
    Keep every edge independently with probability p.

    Parameters
    ----------
    g : StaticGraph
        Input graph.
    p : float
        Keep probability in [0, 1].
    seed : int
        Root seed.
    trial : int, optional
        Stream index, so that trials draw independent samples. By default 0.

    Returns
    -------
    StaticGraph
        The sampled graph on the same vertex set.
    """
    if not 0 <= p <= 1:
        raise ParameterError(f"Invalid sampling probability p={p}: must be in [0, 1]")
    rng = make_generator(seed, trial, PURPOSE_ORACLE)
    keep = rng.random(g.m) < p
    return StaticGraph(g.n, tuple(e for e, k in zip(g.edges, keep) if k))


@dataclass
class ConcentrationReport:
    """Outcome of ``concentration_check``."""

    trials: int
    slack: float
    passes: dict = field(default_factory=dict)
    max_slack_used: dict = field(default_factory=dict)

    @property
    def pass_fraction(self):
        """Fraction of passing trials per check."""
        if not self.trials:
            return {name: 1.0 for name in CONCENTRATION_CHECKS}
        return {
            name: self.passes.get(name, 0) / self.trials
            for name in CONCENTRATION_CHECKS
        }

    def as_dict(self):
        """Plain dictionary for reports."""
        return {
            "trials": self.trials,
            "slack": self.slack,
            "pass_fraction": self.pass_fraction,
            "max_slack_used": self.max_slack_used,
        }


def _interval_excess(value, center, epsilon, upper=True, lower=True):
    """Additive amount by which value leaves [(1-eps) c, (1+eps) c]."""
    excess = 0.0
    if upper:
        excess = max(excess, value - (1 + epsilon) * center)
    if lower:
        excess = max(excess, (1 - epsilon) * center - value)
    return excess


def concentration_trial(g, p, epsilon, seed, trial, reference):
    """
    Slack consumed by one sampled graph for each check.

    Parameters
    ----------
    g : StaticGraph
        Input graph.
    p : float
        Sampling probability.
    epsilon : float
        Multiplicative tolerance.
    seed : int
        Root seed.
    trial : int
        Trial index.
    reference : dict
        Exact measures of g: ``core``, ``arboricity`` and ``density``.

    Returns
    -------
    dict
        check name -> additive slack needed by this trial.
    """
    gp = sample_edges(g, p, seed, trial)
    core_p = exact_coreness(gp)
    used = {
        "coreness-upper": max(
            (_interval_excess(core_p[v], p * c, epsilon, lower=False)
             for v, c in reference["core"].items()),
            default=0.0,
        ),
        "coreness-lower": max(
            (_interval_excess(core_p[v], p * c, epsilon, upper=False)
             for v, c in reference["core"].items()),
            default=0.0,
        ),
        "arboricity": _interval_excess(
            exact_arboricity(gp), p * reference["arboricity"], epsilon
        ),
        "density": _interval_excess(
            float(exact_density(gp)), p * reference["density"], epsilon
        ),
    }
    return used


def concentration_check(
    g, p, epsilon, trials, seed, c_prime=3.0, log_base=math.e, max_workers=1
):
    """
    Empirically check that sampled measures stay within the expected bands.

    Each trial samples G_p and checks, with additive slack c' * log(n) / epsilon:
    core(G_p, v) <= (1 + eps) p core(G, v) for every v, core(G_p, v) >=
    (1 - eps) p core(G, v) for every v, and the two-sided bands for arboricity and
    density.

    Parameters
    ----------
    g : StaticGraph
        Input graph, small enough for the exact oracles.
    p : float
        Sampling probability.
    epsilon : float
        Multiplicative tolerance.
    trials : int
        Number of independent samples.
    seed : int
        Root seed.
    c_prime : float, optional
        Slack constant, by default 3.0.
    log_base : float, optional
        Base of the logarithm in the slack, by default e.
    max_workers : int, optional
        Number of worker processes; 1 runs serially. By default 1.

    Returns
    -------
    ConcentrationReport
        Pass counts and maximum slack used per check.
    """
    slack = c_prime * math.log(max(g.n, 1), log_base) / epsilon
    reference = {
        "core": exact_coreness(g),
        "arboricity": exact_arboricity(g),
        "density": float(exact_density(g)),
    }
    report = ConcentrationReport(trials, slack)
    report.max_slack_used = {name: 0.0 for name in CONCENTRATION_CHECKS}

    def _record(used):
        for name, amount in used.items():
            report.max_slack_used[name] = max(report.max_slack_used[name], amount)
            if amount <= slack:
                report.passes[name] = report.passes.get(name, 0) + 1

    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = {
                pool.submit(concentration_trial, g, p, epsilon, seed, t, reference): t
                for t in range(trials)
            }
            with tqdm.tqdm(
                total=trials, ascii=True, file=open(os.devnull, "w", encoding="utf-8")
            ) as pbar:
                for future in as_completed(futures):
                    try:
                        _record(future.result())
                        pbar.update(1)
                        LOGGER.debug(pbar)
                    except Exception as e:
                        raise e.__class__(
                            f"Error with trial {futures[future]}: {e}"
                        ) from e
    else:
        for t in range(trials):
            _record(concentration_trial(g, p, epsilon, seed, t, reference))

    LOGGER.info(
        f"Concentration check n={g.n}, m={g.m}, p={p}, epsilon={epsilon}: "
        f"{report.pass_fraction}"
    )
    return report


def orientation_violations(outdeg, g, core, h, epsilon, k=1, density=None,
                           log_base=math.e):
    """
    Check an orientation of g against the exact measures.

    Parameters
    ----------
    outdeg : dict
        vertex -> out-degree of the orientation (of g duplicated k times).
    g : StaticGraph
        The oriented graph.
    core : dict
        Exact coreness of g.
    h : int
        Balancing cap of the orientation (per copy, i.e. cap / k).
    epsilon : float
        Tolerance of the coreness sandwich.
    k : int, optional
        Duplication factor of the orientation, by default 1.
    density : fractions.Fraction, optional
        Exact density of g; skips the density check when None.
    log_base : float, optional
        Base of the logarithm in the additive term, by default e.

    Returns
    -------
    list
        Violation descriptions; empty when all checks pass.
    """
    violations = []
    if density is not None:
        top = max(outdeg.values(), default=0)
        if top < k * density:
            violations.append(f"max out-degree {top} < {k} * density {density}")

    additive = 2 * math.log(max(g.n, 2), log_base) / epsilon
    for v in range(g.n):
        d = outdeg.get(v, 0) / k
        if d >= h - additive:
            continue
        low = (0.5 - epsilon) * core[v] - additive
        high = (2 + epsilon) * core[v] + additive
        if not low <= d <= high:
            violations.append(
                f"vertex {v}: out-degree {d:.4g} outside [{low:.4g}, {high:.4g}] "
                f"for coreness {core[v]}"
            )
    return violations
