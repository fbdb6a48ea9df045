# -*- coding: utf-8 -*-
"""
matching module

Maximal matching maintained on top of a low out-degree orientation. Each vertex
knows its out-neighbors through the orientation and keeps the set of its unmatched
in-neighbors, so finding a free neighbor never scans a high-degree neighborhood.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field

from bdcore.estimators import LowOutDegree
from bdcore.exceptions import DensityContractError
from bdcore.utils import normalize_edge

LOGGER = logging.getLogger(__name__)


@dataclass
class MatchingRecord:
    """Per-batch outcome of the matching repair."""

    kind: str
    size: int
    matched: int
    repair_rounds: int
    valid: bool
    maximal: bool
    rejected: list = field(default_factory=list)

    def as_dict(self):
        """Plain dictionary for reports."""
        return {
            "kind": self.kind,
            "size": self.size,
            "matching_size": self.matched,
            "repair_rounds": self.repair_rounds,
            "valid": self.valid,
            "maximal": self.maximal,
            "rejected": [[list(r.edge), r.reason] for r in self.rejected],
        }


class MaximalMatching:
    """
    Maximal matching under batches of edge insertions and deletions.

    Parameters
    ----------
    n : int
        Universe size.
    rho_max : float
        Density upper bound promised by the caller.
    config : bdcore.config.EstimatorConfig
        Estimator parameters for the underlying orientation.
    """

    def __init__(self, n, rho_max, config):
        self.n = n
        self.rho_max = rho_max
        self.orientation = LowOutDegree(n, rho_max, config)
        self.mate = {}
        self.match = set()
        self.incoming_unmatched = defaultdict(set)
        self._tail = {}

    @property
    def used(self):
        """Matched vertices."""
        return frozenset(self.mate)

    def is_free(self, v):
        """True when v is unmatched."""
        return v not in self.mate

    # ------------------------------------------------------------ bookkeeping
    def _set_tail(self, pair, tail):
        head = pair[1] if tail == pair[0] else pair[0]
        self._tail[pair] = tail
        if self.is_free(tail):
            self.incoming_unmatched[head].add(tail)

    def _clear_tail(self, pair):
        tail = self._tail.pop(pair)
        head = pair[1] if tail == pair[0] else pair[0]
        self.incoming_unmatched[head].discard(tail)

    def _announce(self, v, free):
        """Add or remove v from the unmatched in-sets of its out-neighbors."""
        for edge in self.orientation.out_edges(v):
            if free:
                self.incoming_unmatched[edge.head].add(v)
            else:
                self.incoming_unmatched[edge.head].discard(v)

    def _pair_up(self, u, v):
        self.mate[u] = v
        self.mate[v] = u
        self.match.add(normalize_edge(u, v))
        self._announce(u, free=False)
        self._announce(v, free=False)

    def _unpair(self, pair):
        u, v = pair
        self.match.discard(pair)
        del self.mate[u]
        del self.mate[v]

    def _apply_delta(self, delta):
        frontier = set()
        broken = []
        for key in sorted(delta.deleted):
            pair = (key.u, key.v)
            self._clear_tail(pair)
            if pair in self.match:
                broken.append(pair)
        for key, edge in sorted(delta.inserted.items()):
            self._set_tail((key.u, key.v), edge.tail)
            frontier.update((key.u, key.v))
        for key, tail in sorted(delta.reversed.items()):
            pair = (key.u, key.v)
            self._clear_tail(pair)
            self._set_tail(pair, tail)

        for pair in broken:
            self._unpair(pair)
        for pair in broken:
            for v in pair:
                self._announce(v, free=True)
            frontier.update(pair)
        return frontier

    # ----------------------------------------------------------------- repair
    def _smallest_free_neighbor(self, v):
        candidates = [
            e.head for e in self.orientation.out_edges(v) if self.is_free(e.head)
        ]
        candidates.extend(self.incoming_unmatched.get(v, ()))
        return min(candidates, default=None)

    def _repair(self, frontier):
        rounds = 0
        while True:
            proposals = {}
            for v in sorted(frontier):
                if not self.is_free(v):
                    continue
                target = self._smallest_free_neighbor(v)
                if target is None:
                    continue
                if target not in proposals or v < proposals[target]:
                    proposals[target] = v
            if not proposals:
                break

            rounds += 1
            for target, proposer in sorted(proposals.items()):
                if self.is_free(target) and self.is_free(proposer):
                    self._pair_up(target, proposer)
            frontier = {v for v in frontier if self.is_free(v)}

        return rounds

    def _sync(self):
        """Consume the pending orientation changes and repair the matching."""
        frontier = self._apply_delta(self.orientation.drain_orientation_changes())
        return frontier, self._repair(frontier)

    def apply_batch(self, kind, edges):
        """
        Apply a batch and restore a maximal matching.

        Parameters
        ----------
        kind : str
            "ins" or "del".
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        MatchingRecord
            Matching size, repair rounds and the validity flags.

        Raises
        ------
        bdcore.exceptions.DensityContractError
            If the graph outgrows ``rho_max``.
        """
        edges = list(edges)
        try:
            rejected, _ = self.orientation.apply_batch(kind, edges)
        except DensityContractError:
            # the batch is applied before the bound is checked
            self._sync()
            raise
        frontier, rounds = self._sync()
        LOGGER.debug(
            f"Matching repaired in {rounds} rounds from {len(frontier)} frontier "
            f"vertices; {len(self.match)} matched edges"
        )
        return MatchingRecord(
            kind,
            len(edges),
            len(self.match),
            rounds,
            self.is_valid(),
            self.is_maximal(),
            rejected,
        )

    # ----------------------------------------------------------- validation
    def is_valid(self):
        """True when the matched edges are live and vertex-disjoint."""
        seen = set()
        live = self.orientation.live_edges
        for u, v in self.match:
            if (u, v) not in live or u in seen or v in seen:
                return False
            seen.update((u, v))
        return seen == set(self.mate)

    def is_maximal(self):
        """True when no live edge has both endpoints unmatched."""
        return not any(
            self.is_free(u) and self.is_free(v) for u, v in self.orientation.live_edges
        )


def matching_apply_batch(state, kind, edges):
    """Apply one batch to a MaximalMatching and return its MatchingRecord."""
    return state.apply_batch(kind, edges)
