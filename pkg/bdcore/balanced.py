# -*- coding: utf-8 -*-
"""
balanced module

Batch-dynamic maintenance of a cap-balanced orientation: every live edge (u -> v)
satisfies min(d(u), cap) <= min(d(v), cap) + 1 where d is the stored out-degree.

Insertions are grouped into token bundles (distinct tails, tail out-degree no larger
than head out-degree) and each bundle is settled by a phase-parallel token dropping
game. Deletions are grouped into at most cap bundles of distinct vertices, and each
bundle is settled by a rank-indexed token pushing game. A token that reaches a vertex
which keeps at least cap out-edges after taking it becomes transparent and terminates
there. A token crossing a truncated-rank (cap + 1) edge into a vertex that has not
absorbed other tokens is always transparent.
"""
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import NamedTuple

from bdcore.exceptions import ContractError, ParameterError
from bdcore.orientation import (
    ChangeLog,
    DirectedEdge,
    EdgeKey,
    OrientationStore,
    Rejection,
)
from bdcore.utils import normalize_edge

LOGGER = logging.getLogger(__name__)

INSERT = "ins"
DELETE = "del"
BATCH_KINDS = (INSERT, DELETE)

ENVELOPE_CONSTANT = 8
PHASE_CEILING_ALPHA = 8


def extraction_bound(cap):
    """Maximum number of bundle extraction rounds for one insert batch."""
    return 2 * (cap + 1) ** 2 + 3


def phase_ceiling(cap, alpha=PHASE_CEILING_ALPHA):
    """Empirical ceiling on the number of phases of one bundle game."""
    return alpha * cap**3


def single_batch_op_envelope(n, cap, k=1, size=1):
    """
    Recorded ceiling on elementary operations of one batch on one instance.

    Parameters
    ----------
    n : int
        Universe size.
    cap : int
        Balancing cap of the instance.
    k : int, optional
        Duplication factor, by default 1.
    size : int, optional
        Number of user edges in the batch, by default 1.

    Returns
    -------
    float
        ENVELOPE_CONSTANT * size * k * (cap + 1)^4 * log2(n + 2)
    """
    return ENVELOPE_CONSTANT * size * k * (cap + 1) ** 4 * math.log2(n + 2)


class PendingEdge(NamedTuple):
    """An undirected edge copy waiting to be oriented; ``seq`` orders proposals."""

    u: int
    v: int
    copy: int
    seq: int


def screen_edges(edges, n, live, inserting):
    """
    Split a user batch into accepted edges and rejections.

    Parameters
    ----------
    edges : iterable of tuple
        (u, v) pairs as supplied by the caller.
    n : int
        Universe size.
    live : collection
        Currently live edges as (low, high) tuples.
    inserting : bool
        True for an insert batch, False for a delete batch.

    Returns
    -------
    tuple
        (accepted, rejected): normalized (low, high) pairs in input order and a
        list of Rejection records.
    """
    accepted = []
    rejected = []
    seen = set()
    for u, v in edges:
        pair = normalize_edge(u, v)
        if u == v:
            reason = "self-loop"
        elif not (0 <= u < n and 0 <= v < n):
            reason = "unknown-vertex"
        elif pair in seen or (inserting and pair in live):
            reason = "duplicate"
        elif not inserting and pair not in live:
            reason = "missing"
        else:
            reason = None

        if reason is None:
            seen.add(pair)
            accepted.append(pair)
        else:
            rejected.append(Rejection((u, v), reason))

    return accepted, rejected


@dataclass
class PhaseCounters:
    """Per-batch instrumentation of one BalancedInstance."""

    phases_per_bundle: list = field(default_factory=list)
    bundle_iterations: int = 0
    pushed_bundles: int = 0
    flips: int = 0
    elementary_ops: int = 0

    @property
    def max_phases(self):
        """Largest phase count over the bundles of the batch."""
        return max(self.phases_per_bundle, default=0)

    def as_dict(self):
        """Plain dictionary of the counters."""
        return {
            "bundles": len(self.phases_per_bundle),
            "max_phases": self.max_phases,
            "bundle_iterations": self.bundle_iterations,
            "pushed_bundles": self.pushed_bundles,
            "flips": self.flips,
            "elementary_ops": self.elementary_ops,
        }


class BalancedInstance:
    """
    Balanced(H, K): a cap-balanced orientation of a K-duplicated simple graph.

    Parameters
    ----------
    n : int
        Vertex universe size.
    h : int
        Balancing parameter H.
    k : int, optional
        Duplication factor; every user edge is stored as k copies. By default 1.

    Raises
    ------
    ParameterError
        If h or k is not a positive integer.
    """

    def __init__(self, n, h, k=1):
        for name, value in (("H", h), ("K", k)):
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ParameterError(
                    f"Invalid input for {name}: must be a positive integer, got {value}"
                )
        self.n = n
        self.h = h
        self.k = k
        self.cap = h * k
        self.store = OrientationStore(n, self.cap)
        self.token = {}
        self.counters = PhaseCounters()
        self._live = set()
        self._log = ChangeLog()
        self._seq = 0

    def __repr__(self):
        return f"BalancedInstance(n={self.n}, H={self.h}, K={self.k})"

    # -------------------------------------------------------------- queries
    @property
    def live_edges(self):
        """Set of live user edges as (low, high) tuples."""
        return frozenset(self._live)

    def out_degree(self, v):
        """Stored out-degree of v."""
        return self.store.stored_outdeg(v)

    def out_edges(self, v):
        """Out-edges of v in rank order."""
        return self.store.out_edges(v)

    def tail_of(self, key):
        """Tail vertex of the live edge copy with the given EdgeKey."""
        return self.store.edge(key).tail

    def drain_change_log(self):
        """
        Return the orientation changes since the previous drain.

        Returns
        -------
        ChangeLog
            Accumulated log; a second drain without intervening batches is empty.
        """
        log, self._log = self._log, ChangeLog()
        return log

    def balance_violations(self):
        """
        List every edge breaking the cap-balanced condition.

        Returns
        -------
        list
            Human-readable descriptions; empty when balanced.
        """
        violations = []
        for edge in self.store.edges():
            tail_level = min(self.store.stored_outdeg(edge.tail), self.cap)
            head_level = min(self.store.stored_outdeg(edge.head), self.cap)
            if tail_level > head_level + 1:
                violations.append(
                    f"edge {edge}: min(d+, {self.cap}) {tail_level} > {head_level} + 1"
                )
        return violations

    def verify_h_balanced(self):
        """True iff every live edge satisfies the cap-balanced condition."""
        return not self.balance_violations()

    def check(self):
        """
        Full quiescent-state check: balance, store structure and bookkeeping.

        Returns
        -------
        list
            Violations; empty when the instance is consistent.
        """
        violations = self.balance_violations()
        violations.extend(self.store.check_structure().violations)
        holders = [v for v, t in self.token.items() if t]
        if holders:
            violations.append(f"tokens left at {sorted(holders)}")
        for v in self.store.vertices:
            if self.store.stored_outdeg(v) != self.store.out_count(v):
                violations.append(
                    f"vertex {v}: stored out-degree {self.store.stored_outdeg(v)} "
                    f"!= {self.store.out_count(v)}"
                )
        if len(self.store) != self.k * len(self._live):
            violations.append(
                f"{len(self.store)} live copies for {len(self._live)} edges"
            )
        return violations

    def _begin_batch(self):
        self.counters = PhaseCounters()
        self.store.drain_change_log()
        return self.store.ops

    def _end_batch(self, ops_start, rejected):
        self.counters.elementary_ops = self.store.ops - ops_start
        batch_log = self.store.drain_change_log()
        batch_log.rejected.extend(rejected)
        self._log.merge(batch_log)
        return batch_log

    # ------------------------------------------------------------ insertions
    def _proposal_target(self, u, v):
        du = self.store.stored_outdeg(u)
        dv = self.store.stored_outdeg(v)
        if du < dv or (du == dv and u < v):
            return u
        return v

    def _extract(self, pending):
        best = {}
        for edge in pending:
            self.store.ops += 1
            target = self._proposal_target(edge.u, edge.v)
            current = best.get(target)
            if current is None or edge.seq < current.seq:
                best[target] = edge
        return best

    def extract_token_bundle(self, pending):
        """
        Select one token bundle from pending undirected edges.

        Each pending edge proposes to its endpoint with the smaller stored
        out-degree (ties to the smaller id); every proposed-to vertex accepts the
        proposal with the smallest sequence number and becomes the tail.

        Parameters
        ----------
        pending : iterable
            PendingEdge items, or (u, v) / (u, v, copy) tuples which are numbered
            in iteration order.

        Returns
        -------
        tuple
            (bundle, remaining): list of DirectedEdge (without uid) and the list of
            PendingEdge items not selected.
        """
        items = []
        for pos, edge in enumerate(pending):
            if not isinstance(edge, PendingEdge):
                copy = edge[2] if len(edge) > 2 else 0
                edge = PendingEdge(edge[0], edge[1], copy, pos)
            items.append(edge)

        best = self._extract(items)
        chosen = set(best.values())
        bundle = [
            DirectedEdge(tail, edge.v if tail == edge.u else edge.u, edge.copy)
            for tail, edge in sorted(best.items())
        ]
        remaining = [edge for edge in items if edge not in chosen]
        return bundle, remaining

    def insert_bundle(self, bundle):
        """
        Insert one token bundle and settle it with the token dropping game.

        Parameters
        ----------
        bundle : list of DirectedEdge
            Edges with distinct tails and d(tail) <= d(head).

        Raises
        ------
        ContractError
            If the bundle violates the bundle conditions.
        """
        tails = [e.tail for e in bundle]
        if len(set(tails)) != len(tails):
            raise ContractError(f"Token bundle has repeated tails: {tails}")
        for e in bundle:
            if self.store.stored_outdeg(e.tail) > self.store.stored_outdeg(e.head):
                raise ContractError(
                    f"Token bundle edge {e} has d(tail) > d(head)"
                )
            if e.key in self.store:
                raise ContractError(f"Token bundle edge {e} is already live")
        if not bundle:
            return

        self.store.apply_edge_updates(insertions=bundle)
        holders = set(tails)
        for v in holders:
            self.token[v] = 1

        flipped = set()
        phases = 0
        while True:
            phases += 1
            proposals = {}
            for v in sorted(holders):
                level = self.store.stored_outdeg(v)
                if level >= self.cap:
                    continue
                for e in self.store.out_edges(v):
                    self.store.ops += 1
                    w = e.head
                    if w not in holders and self.store.stored_outdeg(w) == level - 1:
                        if w not in proposals or v < proposals[w].tail:
                            proposals[w] = e
                        break
            if not proposals:
                break

            moved = [proposals[w] for w in sorted(proposals)]
            for e in moved:
                if e.key in flipped:
                    raise ContractError(f"Edge {e} flipped twice in one bundle")
                flipped.add(e.key)
            self.store.reverse_edges(moved)
            for e in moved:
                holders.discard(e.tail)
                self.token.pop(e.tail, None)
                holders.add(e.head)
                self.token[e.head] = 1
            self.counters.flips += len(moved)

        self.counters.phases_per_bundle.append(phases)
        self.store.fix_outdegrees(holders)
        self.token.clear()
        LOGGER.debug(
            f"{self!r}: bundle of {len(bundle)} settled in {phases} phases, "
            f"{len(flipped)} flips"
        )

    def insert_batch(self, edges):
        """
        Insert a batch of undirected edges.

        Parameters
        ----------
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        ChangeLog
            Orientation changes of this batch; rejected edges are listed in
            ``rejected``.
        """
        ops_start = self._begin_batch()
        accepted, rejected = screen_edges(edges, self.n, self._live, inserting=True)

        groups = {}
        for pair in accepted:
            group = deque()
            for copy in range(self.k):
                group.append(PendingEdge(pair[0], pair[1], copy, self._seq))
                self._seq += 1
            groups[pair] = group
        self._live.update(accepted)

        bound = extraction_bound(self.cap)
        direct = []
        while groups:
            for pair in list(groups):
                u, v = pair
                low = min(self.store.stored_outdeg(u), self.store.stored_outdeg(v))
                self.store.ops += 1
                if low >= self.cap:
                    direct.extend(groups.pop(pair))
            if not groups:
                break
            if self.counters.bundle_iterations >= bound:
                raise ContractError(
                    f"{self!r}: {len(groups)} edges still active after {bound} "
                    "bundle extractions"
                )
            best = self._extract([group[0] for group in groups.values()])
            bundle = []
            for tail, pending in sorted(best.items()):
                pair = (pending.u, pending.v)
                groups[pair].popleft()
                if not groups[pair]:
                    del groups[pair]
                bundle.append(
                    DirectedEdge(tail, pending.v if tail == pending.u else pending.u,
                                 pending.copy)
                )
            self.counters.bundle_iterations += 1
            self.insert_bundle(bundle)

        if direct:
            edges_direct = [DirectedEdge(p.u, p.v, p.copy) for p in direct]
            self.store.apply_edge_updates(insertions=edges_direct)
            self.store.fix_outdegrees({e.tail for e in edges_direct})

        return self._end_batch(ops_start, rejected)

    # ------------------------------------------------------------- deletions
    def _relabel(self, members, holders, labelled, pinned):
        for key in labelled:
            if key in self.store and key not in pinned:
                self.store.set_label(key, 0)
        labelled.clear()
        for w in members | holders:
            self._label_out_edges(w, members, holders, labelled, pinned)

    def _label_out_edges(self, w, members, holders, labelled, pinned):
        label = 2 * (w in members) + (w in holders)
        for e in self.store.out_edges(w, stop=self.cap):
            self.store.ops += 1
            if e.key in pinned:
                continue
            self.store.set_label(e.key, label)
            if label:
                labelled.add(e.key)

    def _absorbs(self, w, transparent):
        """True if w keeps at least cap out-edges after taking one more token."""
        return self.store.stored_outdeg(w) - transparent[w] - 1 >= self.cap

    def push_bundle(self, bundle):
        """
        Settle one deletion token bundle with the token pushing game.

        A holder v pushes its token across an in-edge (w -> v) whose tail holds no
        token and sits exactly one capped level above v. Truncated ranks are scanned
        in increasing order, rank cap + 1 last. A token that reaches a vertex which
        still has at least cap out-edges once all of its tokens are accounted for is
        transparent: it terminates there and the vertex does not become a holder.
        Stored out-degrees stay fixed until the game ends, so capped levels are
        constant during the game. A phase without moves ends the game. At that point
        no holder has a tight in-edge from a non-holder, so every holder and every
        absorbing vertex can be decremented without breaking the balance condition.

        Parameters
        ----------
        bundle : iterable of int
            Distinct vertices, each holding one staged token.
        """
        holders = set(bundle)
        for v in holders:
            self.token[v] = 1
        flipped = {}
        transparent = Counter()
        labelled = set()
        phases = 0

        while True:
            phases += 1
            members = {v for v in holders if self.store.stored_outdeg(v) < self.cap}
            self._relabel(members, holders, labelled, flipped)
            ranks = sorted(
                {i for v in members for i in self.store.nonempty_ranks(v, 0)}
            )
            moved = False
            for i in ranks:
                for v in sorted(members):
                    if v not in holders:
                        continue
                    e = self.store.probe(
                        v, i, 0, self.store.level(v) + 1, exclude=holders
                    )
                    if e is None:
                        continue
                    w = e.tail
                    self.store.set_label(e.key, 3)
                    flipped[e.key] = e
                    holders.discard(v)
                    self.token.pop(v, None)
                    if self._absorbs(w, transparent):
                        transparent[w] += 1
                    else:
                        holders.add(w)
                        self.token[w] = 1
                        self._label_out_edges(w, members, holders, labelled, flipped)
                    moved = True

            if not moved:
                break

        for key in labelled:
            if key in self.store and key not in flipped:
                self.store.set_label(key, 0)
        self.store.reverse_edges(flipped.values())
        for v in holders:
            self.store.set_outdegree(v, self.store.stored_outdeg(v) - 1)
        for w, count in transparent.items():
            self.store.set_outdegree(w, self.store.stored_outdeg(w) - count)
        self.token.clear()

        self.counters.flips += len(flipped)
        self.counters.phases_per_bundle.append(phases)
        LOGGER.debug(
            f"{self!r}: deletion bundle of {len(bundle)} settled in {phases} phases, "
            f"{len(flipped)} flips, {sum(transparent.values())} transparent"
        )

    def delete_batch(self, edges):
        """
        Delete a batch of undirected edges.

        Parameters
        ----------
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        ChangeLog
            Orientation changes of this batch; rejected edges are listed in
            ``rejected``.
        """
        ops_start = self._begin_batch()
        accepted, rejected = screen_edges(edges, self.n, self._live, inserting=False)
        self._live.difference_update(accepted)

        by_tail = {}
        for u, v in accepted:
            for copy in range(self.k):
                e = self.store.edge(EdgeKey(u, v, copy))
                by_tail.setdefault(e.tail, []).append(e)

        stripped = Counter()
        tokens = Counter()
        direct = []
        pushed = []
        for tail in sorted(by_tail):
            batch_edges = sorted(by_tail[tail], key=lambda e: e.uid)
            excess = max(0, self.store.stored_outdeg(tail) - self.cap)
            direct.extend(batch_edges[:excess])
            stripped[tail] = len(batch_edges[:excess])
            pushed.extend(batch_edges[excess:])
            tokens[tail] = len(batch_edges[excess:])

        if direct:
            self.store.apply_edge_updates(deletions=[e.key for e in direct])
            for tail, count in stripped.items():
                if count:
                    self.store.set_outdegree(
                        tail, self.store.stored_outdeg(tail) - count
                    )
        if pushed:
            self.store.apply_edge_updates(deletions=[e.key for e in pushed])

        bundles = []
        for j in range(1, max(tokens.values(), default=0) + 1):
            bundles.append([v for v in sorted(tokens) if tokens[v] >= j])
        self.counters.pushed_bundles = len(bundles)
        for bundle in bundles:
            self.push_bundle(bundle)

        return self._end_batch(ops_start, rejected)

    def apply_batch(self, kind, edges):
        """
        Dispatch a batch by kind.

        Parameters
        ----------
        kind : str
            "ins" or "del".
        edges : iterable of tuple
            (u, v) pairs.

        Returns
        -------
        ChangeLog
            Orientation changes of this batch.
        """
        if kind == INSERT:
            return self.insert_batch(edges)
        if kind == DELETE:
            return self.delete_batch(edges)
        raise ParameterError(
            f"Invalid batch kind {kind!r}: must be one of {list(BATCH_KINDS)}"
        )

    def max_out_degree(self):
        """Largest stored out-degree over all vertices, 0 when empty."""
        return max(
            (self.store.stored_outdeg(v) for v in self.store.vertices), default=0
        )


def new_instance(n, h, k=1):
    """
    Create an empty Balanced(H, K) instance.

    Parameters
    ----------
    n : int
        Universe size.
    h : int
        Balancing parameter H >= 1.
    k : int, optional
        Duplication factor K >= 1, by default 1.

    Returns
    -------
    BalancedInstance
        Empty instance; vertices are initialized lazily.
    """
    return BalancedInstance(n, h, k)
