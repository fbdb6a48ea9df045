# -*- coding: utf-8 -*-
"""
coloring module

Vertex colorings driven by a low out-degree orientation:

- ``ExplicitColoring`` keeps a proper coloring where every vertex picks from a
  fixed random palette, avoiding the palettes of its out-neighbors.
- ``ImplicitColoring`` stores nothing per vertex and answers color queries by
  3-coloring each out-edge pseudoforest locally, combining the colors and
  shrinking the palette with polynomial reductions.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from bdcore.config import EstimatorConfig
from bdcore.estimators import LowOutDegree, MultiLevel
from bdcore.exceptions import DensityContractError, PaletteExhaustedError
from bdcore.utils import PURPOSE_PALETTE, log_n, make_generator

LOGGER = logging.getLogger(__name__)

PALETTE_FACTOR = 300
IMPLICIT_COLOR_BETA = 100
SHIFT_DOWN_TARGETS = (5, 4, 3)
THREE_COLORS = (0, 1, 2)


@dataclass
class ColoringRecord:
    """Per-batch outcome of a coloring application."""

    kind: str
    size: int
    recolored: list = field(default_factory=list)
    distinct_colors: int = 0
    valid: bool = True
    rejected: list = field(default_factory=list)

    def as_dict(self):
        """Plain dictionary for reports."""
        return {
            "kind": self.kind,
            "size": self.size,
            "recolored": len(self.recolored),
            "distinct_colors": self.distinct_colors,
            "valid": self.valid,
            "rejected": [[list(r.edge), r.reason] for r in self.rejected],
        }


def coloring_conflicts(colors, edges):
    """
    Live edges whose endpoints share a color.

    Parameters
    ----------
    colors : dict
        vertex -> color.
    edges : iterable of tuple
        Undirected edges.

    Returns
    -------
    list
        Conflicting edges.
    """
    return [(u, v) for u, v in edges if colors.get(u) == colors.get(v)]


class ExplicitColoring:
    """
    Proper coloring from fixed random palettes.

    Every vertex v owns a palette c(v) of the universe {1..C}, C =
    ceil(300 * rho_max * ln n), each color included with probability
    1 / (2 rho_max). The palette is drawn on first use and never redrawn.

    Parameters
    ----------
    n : int
        Universe size.
    rho_max : float
        Density upper bound promised by the caller.
    config : bdcore.config.EstimatorConfig
        Estimator parameters; ``seed`` also seeds the palettes.
    """

    def __init__(self, n, rho_max, config):
        self.n = n
        self.rho_max = rho_max
        self.seed = config.seed
        self.universe = max(
            1, math.ceil(PALETTE_FACTOR * rho_max * log_n(n, config.log_base))
        )
        self.inclusion = min(1.0, 1 / (2 * rho_max))
        self.orientation = LowOutDegree(n, rho_max, config)
        self.chosen = {}
        self._palettes = {}
        self._tail = {}
        self._stale = set()

    def palette(self, v):
        """
        Palette c(v), drawn from the (seed, v) stream on first use.

        Returns
        -------
        frozenset
            Colors in 1..C.
        """
        if v not in self._palettes:
            rng = make_generator(self.seed, PURPOSE_PALETTE, v)
            mask = rng.random(self.universe) < self.inclusion
            self._palettes[v] = frozenset(int(c) + 1 for c in np.flatnonzero(mask))
        return self._palettes[v]

    def color(self, v):
        """Current color of v; an untouched vertex takes its smallest palette color."""
        if v not in self.chosen:
            palette = self.palette(v)
            if not palette:
                raise PaletteExhaustedError(f"Vertex {v} drew an empty palette.")
            self.chosen[v] = min(palette)
        return self.chosen[v]

    def _changed_tails(self, delta):
        changed = set()
        for key in delta.deleted:
            changed.add(self._tail.pop((key.u, key.v)))
        for key, edge in delta.inserted.items():
            self._tail[(key.u, key.v)] = edge.tail
            changed.add(edge.tail)
        for key, tail in delta.reversed.items():
            changed.add(self._tail[(key.u, key.v)])
            self._tail[(key.u, key.v)] = tail
            changed.add(tail)
        return changed

    def explicit_recolor(self, delta):
        """
        Recolor every vertex whose out-neighborhood changed.

        Parameters
        ----------
        delta : bdcore.estimators.OrientationDelta
            Drained orientation changes.

        Returns
        -------
        set
            (v, new color) for each vertex whose color changed.

        Raises
        ------
        PaletteExhaustedError
            If a vertex has no palette color outside its out-neighbors' palettes.
        """
        changes = set()
        pending = self._changed_tails(delta) | self._stale
        self._stale = set()
        for v in sorted(pending):
            forbidden = set()
            for edge in self.orientation.out_edges(v):
                forbidden.update(self.palette(edge.head))
            candidates = self.palette(v) - forbidden
            if not candidates:
                raise PaletteExhaustedError(
                    f"Vertex {v}: palette of {len(self.palette(v))} colors is covered "
                    f"by {self.orientation.out_degree(v)} out-neighbors"
                )
            current = self.chosen.get(v)
            if current not in candidates:
                self.chosen[v] = min(candidates)
                changes.add((v, self.chosen[v]))
        return changes

    def apply_batch(self, kind, edges):
        """
        Apply a batch and repair the coloring.

        Returns
        -------
        ColoringRecord
            Recolored vertices, distinct colors in use and validity.
        """
        edges = list(edges)
        try:
            rejected, _ = self.orientation.apply_batch(kind, edges)
        except DensityContractError:
            # keep the tail map current; recoloring waits for the next batch
            delta = self.orientation.drain_orientation_changes()
            self._stale.update(self._changed_tails(delta))
            raise
        changes = self.explicit_recolor(self.orientation.drain_orientation_changes())
        live = self.orientation.live_edges
        colors = {v: self.color(v) for edge in live for v in edge}
        record = ColoringRecord(
            kind,
            len(edges),
            recolored=sorted(changes),
            distinct_colors=len(set(colors.values())),
            valid=not coloring_conflicts(colors, live),
            rejected=rejected,
        )
        LOGGER.debug(
            f"Recolored {len(changes)} vertices; {record.distinct_colors} colors in use"
        )
        return record


def cole_vishkin_rounds(n):
    """
    Number of bit-reduction rounds that take ids below n to at most 6 colors.

    Parameters
    ----------
    n : int
        Number of initial colors (vertex ids 0..n-1).

    Returns
    -------
    int
        Round count, a function of n only.
    """
    bound = max(n, 2)
    rounds = 0
    while bound > 6:
        bound = 2 * max(1, (bound - 1).bit_length())
        rounds += 1
    return rounds


def _reduce_bits(color, successor_color):
    if successor_color is None:
        index = 0
    else:
        diff = color ^ successor_color
        index = (diff & -diff).bit_length() - 1
    return 2 * index + (color >> index & 1)


def three_color_pseudoforest(successor, vertices, n):
    """
    3-color a pseudoforest given by a successor function.

    Colors are computed locally from the successor chain: Cole-Vishkin bit
    reduction down to 6 colors, then three shift-down rounds that eliminate colors
    5, 4 and 3.

    Parameters
    ----------
    successor : callable
        v -> successor of v, or None for a root.
    vertices : iterable of int
        Vertices to color.
    n : int
        Universe size; fixes the number of reduction rounds.

    Returns
    -------
    dict
        v -> color in {0, 1, 2}; adjacent vertices get different colors.
    """
    rounds = cole_vishkin_rounds(n)
    cache = {}

    def reduced(v, r):
        if r == 0:
            return v
        key = ("cv", v, r)
        if key not in cache:
            w = successor(v)
            cache[key] = _reduce_bits(
                reduced(v, r - 1), None if w is None else reduced(w, r - 1)
            )
        return cache[key]

    def shifted(v, stage):
        w = successor(v)
        if w is not None:
            return staged(w, stage - 1)
        own = staged(v, stage - 1)
        return next(c for c in THREE_COLORS if c != own)

    def staged(v, stage):
        if stage == 0:
            return reduced(v, rounds)
        key = ("shift", v, stage)
        if key not in cache:
            color = shifted(v, stage)
            if color == SHIFT_DOWN_TARGETS[stage - 1]:
                w = successor(v)
                avoid = {staged(v, stage - 1)}
                if w is not None:
                    avoid.add(shifted(w, stage))
                color = next(c for c in THREE_COLORS if c not in avoid)
            cache[key] = color
        return cache[key]

    return {v: staged(v, len(SHIFT_DOWN_TARGETS)) for v in vertices}


def combine_base3(colors):
    """
    Combine per-pseudoforest 3-colors into one integer.

    Parameters
    ----------
    colors : sequence of int
        Color of the vertex in F_1, F_2, ...

    Returns
    -------
    int
        sum(colors[j] * 3**j).
    """
    return sum(c * 3**j for j, c in enumerate(colors))


def smallest_prime_at_least(x):
    """Smallest prime >= x."""
    candidate = max(2, int(x))
    while any(candidate % p == 0 for p in range(2, math.isqrt(candidate) + 1)):
        candidate += 1
    return candidate


@dataclass(frozen=True)
class PolynomialReduction:
    """
    One polynomial palette reduction from k colors for out-degree at most d.

    A color is read as the coefficients (base q digits) of a polynomial over GF(q);
    each vertex picks the smallest point a where its polynomial differs from those
    of all its out-neighbors and takes the color a * q + p(a).
    """

    k: int
    d: int

    @property
    def t(self):
        """ceil(log_d k)."""
        t = 1
        while self.d**t < self.k:
            t += 1
        return t

    @property
    def q(self):
        """Field size: smallest prime >= 4 d t + 1."""
        return smallest_prime_at_least(4 * self.d * self.t + 1)

    @property
    def colors(self):
        """Number of colors after the reduction."""
        return self.q**2

    @property
    def shrinks(self):
        """True when the reduction lowers the color count."""
        return self.colors < self.k

    def evaluate(self, color, a):
        """Value at a of the polynomial encoded by color."""
        q = self.q
        value = 0
        power = 1
        while color:
            value = (value + (color % q) * power) % q
            color //= q
            power = power * a % q
        return value

    def recolor(self, color, neighbor_colors):
        """
        New color of a vertex from its own and its out-neighbors' colors.

        Returns
        -------
        int
            a * q + p(a) for the smallest separating point a.
        """
        q = self.q
        for a in range(q):
            value = self.evaluate(color, a)
            if all(self.evaluate(c, a) != value for c in neighbor_colors if c != color):
                return a * q + value
        raise PaletteExhaustedError(
            f"No separating point in GF({q}) for {len(neighbor_colors)} neighbors"
        )


class ImplicitColoring:
    """
    Query-time vertex coloring from the ladder's density orientation.

    Parameters
    ----------
    config : bdcore.config.EstimatorConfig
        Ladder parameters; only density estimators are maintained.
    """

    def __init__(self, config):
        params = config.to_dict()
        params["estimators"] = ["density"]
        self.config = EstimatorConfig(params)
        self.n = config.n
        self.ladder = MultiLevel(self.config)

    def apply_batch(self, kind, edges):
        """Apply a batch to the underlying ladder; returns its MetricsRecord."""
        return self.ladder.apply_batch(kind, edges)

    def _view(self):
        estimate = self.ladder.density()
        orientation = estimate.orientation
        d = max(2, math.floor((2 + self.config.epsilon) * estimate.rho))
        top = orientation.max_out_degree()
        if top > d:
            LOGGER.warning(
                f"Exposed out-degree {top} exceeds {d} pseudoforests at level "
                f"{estimate.level}; using {top}"
            )
            d = top
        return orientation, d

    def implicit_color_query(self, vertices):
        """
        Colors of the queried vertices.

        Parameters
        ----------
        vertices : iterable of int
            Vertices to color.

        Returns
        -------
        dict
            v -> color; adjacent queried vertices receive different colors and
            repeated queries between batches agree.
        """
        vertices = sorted(set(vertices))
        orientation, d = self._view()
        heads = {}

        def out_heads(v):
            if v not in heads:
                heads[v] = [e.head for e in orientation.out_edges(v)]
            return heads[v]

        def successor_in(j):
            def successor(v):
                out = out_heads(v)
                return out[j] if j < len(out) else None

            return successor

        radius = set(vertices)
        for _ in range(2):
            radius.update(w for v in list(radius) for w in out_heads(v))

        per_forest = [
            three_color_pseudoforest(successor_in(j), radius, self.n) for j in range(d)
        ]
        colors = {v: combine_base3([f[v] for f in per_forest]) for v in radius}

        k = 3**d
        for _ in range(2):
            reduction = PolynomialReduction(k, d)
            if not reduction.shrinks:
                break
            colors = {
                v: reduction.recolor(colors[v], [colors[w] for w in out_heads(v)])
                for v in colors
                if all(w in colors for w in out_heads(v))
            }
            k = reduction.colors

        return {v: colors[v] for v in vertices}


def implicit_color_query(view, vertices):
    """Colors of the queried vertices from an ImplicitColoring."""
    return view.implicit_color_query(vertices)
