# -*- coding: utf-8 -*-
"""
estimators module

Fixed-threshold coreness and density estimators built on balanced orientations,
the (1 + epsilon) ladder that combines them, and the low out-degree orientation
used by the applications.
"""
import logging
import math
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import NamedTuple

from bdcore.balanced import INSERT, BalancedInstance, screen_edges
from bdcore.config import EstimatorConfig
from bdcore.exceptions import (
    DensityContractError,
    LadderExhaustedError,
    MissingEdgeError,
    ParameterError,
)
from bdcore.orientation import ChangeLog, DirectedEdge, EdgeKey
from bdcore.utils import (
    PURPOSE_CORENESS_SAMPLE,
    PURPOSE_DENSITY_BUCKET,
    make_generator,
    normalize_edge,
)

LOGGER = logging.getLogger(__name__)

DUPLICATE = "duplicate"
SAMPLE = "sample"
BUCKETS = "buckets"

LOW_OUT_DEGREE_EPSILON = 0.05
LOW_OUT_DEGREE_SLACK = 1.1


class OrientationDelta(ChangeLog):
    """
    Changes of an exposed user-level orientation since the last drain.

    Keys are ``EdgeKey(u, v, 0)`` for the user edge {u, v}; ``inserted`` maps keys
    to DirectedEdges, ``deleted`` is a key set and ``reversed`` maps keys to the
    new tail.
    """


class InstanceMetrics(NamedTuple):
    """Counters of one BalancedInstance for one batch."""

    label: str
    counters: dict


@dataclass
class MetricsRecord:
    """Per-batch instrumentation of a ladder."""

    kind: str
    size: int
    accepted: int = 0
    rejected: list = field(default_factory=list)
    instances: list = field(default_factory=list)

    def aggregate(self):
        """
        Worst-case and total counters over the instances that ran the batch.

        Returns
        -------
        dict
            max_phases, bundle_iterations, pushed_bundles and max_elementary_ops
            are maxima; flips and elementary_ops are sums.
        """
        counters = [m.counters for m in self.instances]
        return {
            "instances": len(counters),
            "max_phases": max((c["max_phases"] for c in counters), default=0),
            "bundle_iterations": max(
                (c["bundle_iterations"] for c in counters), default=0
            ),
            "pushed_bundles": max((c["pushed_bundles"] for c in counters), default=0),
            "flips": sum(c["flips"] for c in counters),
            "elementary_ops": sum(c["elementary_ops"] for c in counters),
            "max_elementary_ops": max(
                (c["elementary_ops"] for c in counters), default=0
            ),
        }

    def as_dict(self):
        """Plain dictionary for reports."""
        out = {
            "kind": self.kind,
            "size": self.size,
            "accepted": self.accepted,
            "rejected": [[list(r.edge), r.reason] for r in self.rejected],
        }
        out.update(self.aggregate())
        return out


class DensityVerdict(NamedTuple):
    """LOW with the exposed orientation, or HIGH with no orientation."""

    low: bool
    orientation: object = None

    @property
    def label(self):
        """Either LOW or HIGH."""
        return "LOW" if self.low else "HIGH"


def _instance_metrics(label, instance):
    return InstanceMetrics(label, instance.counters.as_dict())


class CorenessFixed:
    """
    Fixed-H coreness estimator.

    With H <= B every edge is duplicated K = ceil(B / H) times into a balanced
    instance with cap ceil((1 + eps') H) * K. With H > B each edge is kept with
    probability B / H in a Balanced(B) instance.

    Parameters
    ----------
    n : int
        Universe size.
    h : float
        Threshold H of this estimator.
    config : bdcore.config.EstimatorConfig
        Shared estimator parameters.
    level : int, optional
        Ladder level, used to derive the sampling stream. By default 0.
    """

    def __init__(self, n, h, config, level=0):
        self.n = n
        self.h = h
        self.level = level
        self.b = config.b
        self.membership = {}
        if h <= self.b:
            self.regime = DUPLICATE
            self.k = math.ceil(self.b / h)
            self.p = 1.0
            h_inner = math.ceil((1 + config.inner_epsilon) * h)
            self.inner = BalancedInstance(n, h_inner, self.k)
            self._rng = None
        else:
            self.regime = SAMPLE
            self.k = 1
            self.p = self.b / h
            self.inner = BalancedInstance(n, self.b, 1)
            self._rng = make_generator(config.seed, level, PURPOSE_CORENESS_SAMPLE)

    def __repr__(self):
        return (
            f"CorenessFixed(H={self.h:.4g}, regime={self.regime}, K={self.k}, "
            f"p={self.p:.4g})"
        )

    @property
    def label(self):
        """Instance label used in metrics."""
        return f"coreness[{self.level}]"

    def apply_batch(self, kind, edges):
        """
        Apply a user batch.

        Parameters
        ----------
        kind : str
            "ins" or "del".
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        tuple
            (rejected, metrics): Rejection list and InstanceMetrics list.
        """
        inserting = kind == INSERT
        accepted, rejected = screen_edges(edges, self.n, self.membership, inserting)
        if inserting:
            if self._rng is None:
                kept = [True] * len(accepted)
            else:
                kept = list(self._rng.random(len(accepted)) < self.p)
            for pair, keep in zip(accepted, kept):
                self.membership[pair] = bool(keep)
            sampled = [pair for pair in accepted if self.membership[pair]]
        else:
            sampled = [pair for pair in accepted if self.membership.pop(pair)]

        self.inner.apply_batch(kind, sampled)
        self.inner.drain_change_log()
        return rejected, [_instance_metrics(self.label, self.inner)]

    def estimate(self, v):
        """
        Coreness estimate f(v).

        Returns
        -------
        float
            out-degree / K when duplicating, (H / B) * out-degree when sampling.
        """
        if self.regime == DUPLICATE:
            return self.inner.out_degree(v) / self.k
        return (self.h / self.b) * self.inner.out_degree(v)

    def iter_instances(self):
        """Yield (label, BalancedInstance)."""
        yield self.label, self.inner


class DensityFixed:
    """
    Fixed-H density estimator with an exposed user-level orientation.

    With H >= B / eps' the edges are spread uniformly over T = ceil(H / B) lazily
    created Balanced(B) buckets. Otherwise every edge is duplicated K times (K odd)
    into a Balanced(ceil(H), K) instance and each user edge follows the majority of
    its copies.

    Parameters
    ----------
    n : int
        Universe size.
    h : float
        Threshold H of this estimator.
    config : bdcore.config.EstimatorConfig
        Shared estimator parameters.
    level : int, optional
        Ladder level, used to derive the bucket stream. By default 0.
    """

    def __init__(self, n, h, config, level=0):
        self.n = n
        self.h = h
        self.level = level
        self.b = config.b
        inner_epsilon = config.inner_epsilon
        if h >= self.b / inner_epsilon:
            self.regime = BUCKETS
            self.k = 1
            self.t = math.ceil(h / self.b)
            self.h_rounded = self.b * self.t
            self.buckets = {}
            self.assignment = {}
            self._rng = make_generator(config.seed, level, PURPOSE_DENSITY_BUCKET)
        else:
            self.regime = DUPLICATE
            k = math.ceil(self.b / (inner_epsilon * h))
            self.k = k if k % 2 else k + 1
            self.t = 1
            self.h_rounded = h
            self.inner = BalancedInstance(n, math.ceil(h), self.k)
            self.majority = {}

        self._tail = {}
        self._uid = {}
        self._next_uid = 0
        self._out = defaultdict(set)
        self._delta = OrientationDelta()

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(H={self.h:.4g}, regime={self.regime}, "
            f"K={self.k}, T={self.t})"
        )

    @property
    def label(self):
        """Instance label used in metrics."""
        return f"density[{self.level}]"

    # -------------------------------------------------------------- updates
    def _bucket(self, j):
        if j not in self.buckets:
            self.buckets[j] = BalancedInstance(self.n, self.b, 1)
        return self.buckets[j]

    def _bucket_label(self, j):
        return f"{self.label}.bucket[{j}]"

    def _route(self, kind, accepted):
        metrics = []
        touched = set()
        if self.regime == DUPLICATE:
            self.inner.apply_batch(kind, accepted)
            touched.update(
                (key.u, key.v) for key in self.inner.drain_change_log().touched_keys()
            )
            metrics.append(_instance_metrics(self.label, self.inner))
            return touched, metrics

        groups = defaultdict(list)
        if kind == INSERT:
            draws = self._rng.integers(0, self.t, size=len(accepted))
            for pair, j in zip(accepted, draws):
                self.assignment[pair] = int(j)
                groups[int(j)].append(pair)
        else:
            for pair in accepted:
                groups[self.assignment.pop(pair)].append(pair)

        for j in sorted(groups):
            bucket = self._bucket(j)
            bucket.apply_batch(kind, groups[j])
            touched.update(
                (key.u, key.v) for key in bucket.drain_change_log().touched_keys()
            )
            metrics.append(_instance_metrics(self._bucket_label(j), bucket))
        return touched, metrics

    def _current_tail(self, pair):
        u, v = pair
        if self.regime == BUCKETS:
            return self.buckets[self.assignment[pair]].tail_of(EdgeKey(u, v, 0))

        count = sum(
            1 for c in range(self.k) if self.inner.tail_of(EdgeKey(u, v, c)) == u
        )
        self.majority[pair] = count
        return u if 2 * count > self.k else v

    def _expose(self, pair, tail):
        u, v = pair
        key = EdgeKey(u, v, 0)
        previous = self._tail.get(pair)
        if previous is None:
            self._uid[pair] = self._next_uid
            self._next_uid += 1
            self._delta.record_insert(
                DirectedEdge(tail, key.other(tail), 0, self._uid[pair])
            )
        elif previous != tail:
            self._out[previous].discard(pair)
            self._delta.record_reverse(key, tail)
        else:
            return
        self._tail[pair] = tail
        self._out[tail].add(pair)

    def _withdraw(self, pair):
        tail = self._tail.pop(pair)
        self._uid.pop(pair)
        self._out[tail].discard(pair)
        if self.regime == DUPLICATE:
            self.majority.pop(pair, None)
        self._delta.record_delete(EdgeKey(pair[0], pair[1], 0))

    def apply_batch(self, kind, edges):
        """
        Apply a user batch and refresh the exposed orientation.

        Parameters
        ----------
        kind : str
            "ins" or "del".
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        tuple
            (rejected, metrics): Rejection list and InstanceMetrics list.
        """
        inserting = kind == INSERT
        accepted, rejected = screen_edges(edges, self.n, self._tail, inserting)
        touched, metrics = self._route(kind, accepted)

        if not inserting:
            for pair in accepted:
                self._withdraw(pair)
            touched.difference_update(accepted)
        for pair in sorted(touched.union(accepted if inserting else ())):
            self._expose(pair, self._current_tail(pair))

        return rejected, metrics

    # -------------------------------------------------------------- queries
    def verdict(self):
        """
        LOW or HIGH verdict of this threshold.

        Returns
        -------
        DensityVerdict
            LOW carries this estimator as the orientation handle.
        """
        if self.regime == BUCKETS:
            low = all(
                bucket.max_out_degree() < self.b for bucket in self.buckets.values()
            )
        else:
            low = self.inner.max_out_degree() < self.h * self.k
        return DensityVerdict(low, self if low else None)

    def out_edges(self, v):
        """
        Out-edges of v in the exposed orientation.

        Returns
        -------
        list
            DirectedEdges (copy 0, user-edge uid) ordered by uid.
        """
        edges = [
            DirectedEdge(v, pair[1] if pair[0] == v else pair[0], 0, self._uid[pair])
            for pair in self._out.get(v, ())
        ]
        return sorted(edges, key=lambda e: e.uid)

    def out_degree(self, v):
        """Out-degree of v in the exposed orientation."""
        return len(self._out.get(v, ()))

    def max_out_degree(self):
        """Largest exposed out-degree."""
        return max((len(out) for out in self._out.values()), default=0)

    def tail_of(self, u, v):
        """
        Tail of the user edge {u, v} in the exposed orientation.

        Raises
        ------
        MissingEdgeError
            If {u, v} is not live.
        """
        try:
            return self._tail[normalize_edge(u, v)]
        except KeyError as e:
            raise MissingEdgeError(f"Edge ({u}, {v}) is not live.") from e

    @property
    def live_edges(self):
        """Live user edges as (low, high) tuples."""
        return frozenset(self._tail)

    def drain_orientation_changes(self):
        """
        Return the exposed orientation changes since the previous drain.

        Returns
        -------
        OrientationDelta
            Accumulated delta; draining twice in a row yields an empty delta.
        """
        delta, self._delta = self._delta, OrientationDelta()
        return delta

    def iter_instances(self):
        """Yield (label, BalancedInstance) for the maintained instances."""
        if self.regime == DUPLICATE:
            yield self.label, self.inner
        else:
            for j in sorted(self.buckets):
                yield self._bucket_label(j), self.buckets[j]


class LowOutDegree(DensityFixed):
    """
    Low out-degree orientation for graphs of density at most ``rho_max``.

    A DensityFixed estimator at H = 1.1 * rho_max and epsilon = 0.05. Every batch
    that turns the verdict HIGH raises DensityContractError.

    Parameters
    ----------
    n : int
        Universe size.
    rho_max : float
        Density upper bound promised by the caller.
    config : bdcore.config.EstimatorConfig
        Estimator parameters; epsilon is replaced.
    """

    def __init__(self, n, rho_max, config):
        if rho_max is None or rho_max <= 0:
            raise ParameterError(
                f"Invalid input for rho_max: must be > 0, got {rho_max}"
            )
        params = config.to_dict()
        params.update(n=n, epsilon=LOW_OUT_DEGREE_EPSILON)
        super().__init__(
            n, LOW_OUT_DEGREE_SLACK * rho_max, EstimatorConfig(params), level=0
        )
        self.rho_max = rho_max
        LOGGER.debug(f"Initialized {self!r} for rho_max={rho_max}")

    @property
    def label(self):
        return "low-out-degree"

    def apply_batch(self, kind, edges):
        rejected, metrics = super().apply_batch(kind, edges)
        if not self.verdict().low:
            raise DensityContractError(
                f"Density bound rho_max={self.rho_max} violated: {self!r} turned HIGH "
                f"with {len(self._tail)} live edges"
            )
        return rejected, metrics


@dataclass
class LadderLevel:
    """One rung H = (1 + epsilon)^index of the ladder."""

    index: int
    h: float
    coreness: CorenessFixed = None
    density: DensityFixed = None

    def apply_batch(self, kind, edges):
        """Route a screened batch to the estimators of this level."""
        metrics = []
        for estimator in (self.coreness, self.density):
            if estimator is not None:
                metrics.extend(estimator.apply_batch(kind, edges)[1])
        return metrics

    def iter_instances(self):
        """Yield (label, BalancedInstance) for this level."""
        for estimator in (self.coreness, self.density):
            if estimator is not None:
                yield from estimator.iter_instances()


class DensityEstimate(NamedTuple):
    """Density and arboricity readout of the ladder."""

    rho: float
    arboricity: float
    level: int
    orientation: DensityFixed


@dataclass
class EstimateReport:
    """Ladder readouts after one batch."""

    coreness: dict
    rho: float
    arboricity: float
    level: int
    verdicts: list

    def as_dict(self):
        """Plain dictionary for reports."""
        return {
            "core_alg": {str(v): c for v, c in sorted(self.coreness.items())},
            "rho_alg": self.rho,
            "lambda_alg": self.arboricity,
            "density_level": self.level,
            "verdicts": self.verdicts,
        }


class MultiLevel:
    """
    The (1 + epsilon) ladder of fixed-threshold estimators.

    Parameters
    ----------
    config : bdcore.config.EstimatorConfig
        Estimator parameters; ``config.n`` is the universe size.
    """

    def __init__(self, config):
        self.config = config
        self.n = config.n
        self.levels = []
        for i in range(config.ladder_levels + 1):
            h = (1 + config.epsilon) ** i
            level = LadderLevel(i, h)
            if "coreness" in config.estimators:
                level.coreness = CorenessFixed(self.n, h, config, level=i)
            if "density" in config.estimators:
                level.density = DensityFixed(self.n, h, config, level=i)
            self.levels.append(level)
        self._live = set()
        self._degree = Counter()
        LOGGER.info(
            f"Initialized ladder with {len(self.levels)} levels, B={config.b}, "
            f"epsilon={config.epsilon}, estimators={config.estimators}"
        )

    @property
    def live_edges(self):
        """Live user edges as (low, high) tuples."""
        return frozenset(self._live)

    def degree(self, v):
        """Degree of v in the current graph."""
        return self._degree[v]

    def iter_instances(self):
        """Yield (label, BalancedInstance) for every maintained instance."""
        for level in self.levels:
            yield from level.iter_instances()

    def apply_batch(self, kind, edges):
        """
        Route one batch to every level.

        Parameters
        ----------
        kind : str
            "ins" or "del".
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        MetricsRecord
            Rejections and the counters of every instance that ran the batch.
        """
        edges = list(edges)
        inserting = kind == INSERT
        accepted, rejected = screen_edges(edges, self.n, self._live, inserting)
        for u, v in accepted:
            step = 1 if inserting else -1
            self._degree[u] += step
            self._degree[v] += step
        if inserting:
            self._live.update(accepted)
        else:
            self._live.difference_update(accepted)

        record = MetricsRecord(
            kind, len(edges), accepted=len(accepted), rejected=rejected
        )
        max_workers = self.config.max_workers
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = {
                    pool.submit(level.apply_batch, kind, accepted): level.index
                    for level in self.levels
                }
                results = {}
                for future in as_completed(futures):
                    try:
                        results[futures[future]] = future.result()
                    except Exception as e:
                        raise e.__class__(
                            f"Error with level {futures[future]}: {e}"
                        ) from e
            for index in sorted(results):
                record.instances.extend(results[index])
        else:
            for level in self.levels:
                record.instances.extend(level.apply_batch(kind, accepted))

        LOGGER.debug(
            f"{kind} batch of {len(edges)} edges: {len(accepted)} applied, "
            f"{len(rejected)} rejected"
        )
        return record

    def coreness(self, v):
        """
        Coreness estimate core_ALG(v).

        Returns
        -------
        float
            0 for an isolated vertex, otherwise H_k for the first level k whose
            estimate is below its threshold, or H_L if no level qualifies.
        """
        if "coreness" not in self.config.estimators:
            raise ParameterError("Coreness estimators are not maintained.")
        if self._degree[v] == 0:
            return 0
        for level in self.levels:
            if level.coreness.estimate(v) < level.h:
                return level.h
        LOGGER.warning(
            f"No ladder level has f(v) < H for vertex {v}; reporting H_L"
        )
        return self.levels[-1].h

    def verdicts(self):
        """LOW / HIGH label of every level's density estimator."""
        return [level.density.verdict().label for level in self.levels]

    def density(self):
        """
        Density readout from the first LOW level.

        Returns
        -------
        DensityEstimate
            rho_ALG = H_k, lambda_ALG = 2 rho_ALG, level k and its orientation.

        Raises
        ------
        LadderExhaustedError
            If every level is HIGH.
        """
        if "density" not in self.config.estimators:
            raise ParameterError("Density estimators are not maintained.")
        for level in self.levels:
            verdict = level.density.verdict()
            if verdict.low:
                return DensityEstimate(
                    level.h, 2 * level.h, level.index, verdict.orientation
                )
        raise LadderExhaustedError(
            f"No LOW level among {len(self.levels)} levels "
            f"(top H={self.levels[-1].h:.4g})"
        )

    def report(self, vertices=()):
        """
        Collect the readouts maintained by this ladder.

        Parameters
        ----------
        vertices : iterable of int, optional
            Vertices whose core_ALG is reported.

        Returns
        -------
        EstimateReport
            Readouts; density fields are None when density is not maintained.
        """
        coreness = {}
        if "coreness" in self.config.estimators:
            coreness = {v: self.coreness(v) for v in vertices}
        rho = arboricity = level = None
        verdicts = []
        if "density" in self.config.estimators:
            verdicts = self.verdicts()
            try:
                estimate = self.density()
            except LadderExhaustedError as e:
                LOGGER.warning(f"Density readout unavailable: {e}")
            else:
                rho, arboricity = estimate.rho, estimate.arboricity
                level = estimate.level
        return EstimateReport(coreness, rho, arboricity, level, verdicts)


def coreness_fixed_estimate(est, v):
    """f(v) of a fixed-threshold coreness estimator."""
    return est.estimate(v)


def density_fixed_verdict(est):
    """LOW / HIGH verdict of a fixed-threshold density estimator."""
    return est.verdict()


def multilevel_coreness(ml, v):
    """core_ALG(v) of a ladder."""
    return ml.coreness(v)


def multilevel_density(ml):
    """(rho_ALG, lambda_ALG, orientation) of a ladder."""
    estimate = ml.density()
    return estimate.rho, estimate.arboricity, estimate.orientation


def multilevel_apply_batch(ml, kind, edges):
    """Apply one batch to every level of a ladder and return its MetricsRecord."""
    return ml.apply_batch(kind, edges)
