# -*- coding: utf-8 -*-
"""
orientation module

Storage layer for a directed orientation of a multigraph. Each vertex keeps its
outgoing edges in an order-statistics list (ordered by edge uid) and an index of
incoming edges bucketed by (truncated rank, label). Inside a bucket, edges are
ordered by the capped out-degree of their tail, then tail id, then uid.

The store never corrects stored out-degrees on its own: ``reverse_edges`` and
``apply_edge_updates`` leave them untouched, and callers decide when to call
``fix_outdegrees`` or ``set_outdegree``.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from operator import attrgetter
from typing import NamedTuple

from sortedcontainers import SortedKeyList, SortedList

from bdcore.exceptions import (
    DuplicateEdgeError,
    LabelRangeError,
    MissingEdgeError,
    ParameterError,
)
from bdcore.utils import verify_vertex

LOGGER = logging.getLogger(__name__)

LABELS = (0, 1, 2, 3)


class EdgeKey(NamedTuple):
    """Orientation-free identity of an edge copy; ``u < v`` always holds."""

    u: int
    v: int
    copy: int = 0

    @classmethod
    def of(cls, a, b, copy=0):
        """Build the key of the edge {a, b} for the given copy index."""
        if a <= b:
            return cls(a, b, copy)
        return cls(b, a, copy)

    def other(self, x):
        """Return the endpoint opposite to x."""
        return self.v if x == self.u else self.u


class Rejection(NamedTuple):
    """A user edge refused by batch screening, with the reason."""

    edge: tuple
    reason: str


@dataclass(frozen=True)
class DirectedEdge:
    """An oriented edge copy (tail -> head)."""

    tail: int
    head: int
    copy: int = 0
    uid: int = -1

    @property
    def key(self):
        """EdgeKey of this edge."""
        return EdgeKey.of(self.tail, self.head, self.copy)

    def reversed(self):
        """Return the same edge copy pointing the other way (uid preserved)."""
        return DirectedEdge(self.head, self.tail, self.copy, self.uid)

    def __str__(self):
        return f"({self.tail}->{self.head}#{self.copy})"


@dataclass
class ChangeLog:
    """
    Net orientation changes since the last drain.

    Replay order is deletions, then insertions, then reversals. Reversing an edge
    inserted in the same window folds into the insertion record, and deleting such an
    edge cancels the insertion.
    """

    inserted: dict = field(default_factory=dict)
    deleted: set = field(default_factory=set)
    reversed: dict = field(default_factory=dict)
    rejected: list = field(default_factory=list)

    def record_insert(self, edge):
        """Record the insertion of a DirectedEdge."""
        self.reversed.pop(edge.key, None)
        self.inserted[edge.key] = edge

    def record_delete(self, key):
        """Record the deletion of the edge with the given EdgeKey."""
        self.reversed.pop(key, None)
        if key in self.inserted:
            del self.inserted[key]
        else:
            self.deleted.add(key)

    def record_reverse(self, key, new_tail):
        """Record that the edge with the given key now has tail ``new_tail``."""
        if key in self.inserted:
            old = self.inserted[key]
            if old.tail != new_tail:
                self.inserted[key] = old.reversed()
        else:
            self.reversed[key] = new_tail

    def merge(self, later):
        """
        Fold a later log into this one.

        Parameters
        ----------
        later : ChangeLog
            Changes that happened after the ones recorded here.
        """
        for key in sorted(later.deleted):
            self.record_delete(key)
        for edge in later.inserted.values():
            self.record_insert(edge)
        for key, tail in later.reversed.items():
            self.record_reverse(key, tail)
        self.rejected.extend(later.rejected)

    def is_empty(self):
        """True when no orientation change is recorded."""
        return not (self.inserted or self.deleted or self.reversed)

    def touched_keys(self):
        """Set of EdgeKeys mentioned anywhere in the log."""
        return set(self.inserted).union(self.deleted, self.reversed)

    def replay(self, snapshot):
        """
        Apply the log to an orientation snapshot.

        Parameters
        ----------
        snapshot : dict
            EdgeKey -> tail of the orientation the log starts from.

        Returns
        -------
        dict
            EdgeKey -> tail after the logged changes.
        """
        result = dict(snapshot)
        for key in self.deleted:
            result.pop(key, None)
        for key, edge in self.inserted.items():
            result[key] = edge.tail
        for key, tail in self.reversed.items():
            result[key] = tail

        return result


@dataclass
class StructureReport:
    """Outcome of ``OrientationStore.check_structure``."""

    violations: list = field(default_factory=list)

    @property
    def ok(self):
        """True when no violation was found."""
        return not self.violations


class OrientationStore:
    """
    Ranked out-lists, bucketed in-index, stored out-degrees and labels.

    Parameters
    ----------
    n : int
        Vertex universe size; ids are 0..n-1.
    h : int
        Cap parameter. Truncated ranks run over 1..h+1 and bucket keys use
        min(h, stored out-degree).
    """

    def __init__(self, n, h):
        if not isinstance(n, int) or n < 0:
            raise ParameterError(f"Invalid universe size n={n}: must be an int >= 0")
        if not isinstance(h, int) or h < 1:
            raise ParameterError(f"Invalid cap h={h}: must be an int >= 1")
        self.n = n
        self.h = h
        self._out = {}
        self._outdeg = {}
        self._in = {}
        # EdgeKey -> (edge, truncated rank, label, bucket entry)
        self._entries = {}
        self._next_uid = 0
        self.change_log = ChangeLog()
        self.ops = 0

    # ------------------------------------------------------------------ reads
    def ensure_vertex(self, v):
        """
        Create the per-vertex structures of v on first touch.

        Parameters
        ----------
        v : int
            Vertex id.

        Raises
        ------
        UniverseError
            If v is not in 0..n-1.
        """
        verify_vertex(v, self.n)
        if v not in self._out:
            self._out[v] = SortedKeyList(key=attrgetter("uid"))
            self._outdeg[v] = 0
            self._in[v] = {}

    def __contains__(self, key):
        return key in self._entries

    def __len__(self):
        return len(self._entries)

    @property
    def vertices(self):
        """Vertices whose structures have been created."""
        return self._out.keys()

    def edge(self, key):
        """
        Return the live DirectedEdge with the given key.

        Raises
        ------
        MissingEdgeError
            If no such edge is live.
        """
        try:
            return self._entries[key][0]
        except KeyError as e:
            raise MissingEdgeError(f"Edge {key} is not live.") from e

    def edges(self):
        """Iterate over all live DirectedEdges."""
        for entry in self._entries.values():
            yield entry[0]

    def label(self, key):
        """Current label of a live edge."""
        if key not in self._entries:
            raise MissingEdgeError(f"Edge {key} is not live.")
        return self._entries[key][2]

    def stored_outdeg(self, v):
        """Out-degree value the structure currently believes for v."""
        self.ensure_vertex(v)
        return self._outdeg[v]

    def level(self, v):
        """min(h, stored_outdeg(v))."""
        return min(self.h, self.stored_outdeg(v))

    def out_count(self, v):
        """Actual length of out(v)."""
        self.ensure_vertex(v)
        return len(self._out[v])

    def out_edges(self, v, stop=None):
        """
        Out-edges of v in rank order.

        Parameters
        ----------
        v : int
            Vertex id.
        stop : int, optional
            Only return the first ``stop`` edges.

        Returns
        -------
        list
            DirectedEdges with tail v.
        """
        self.ensure_vertex(v)
        if stop is None:
            return list(self._out[v])
        return list(self._out[v].islice(0, stop))

    def rank_of(self, edge):
        """
        1-based position of a live edge within the out-list of its tail.

        Parameters
        ----------
        edge : [DirectedEdge, EdgeKey]
            The edge.

        Returns
        -------
        int
            Rank of the edge.

        Raises
        ------
        MissingEdgeError
            If the edge is not live (or is live with the opposite orientation).
        """
        key = edge.key if isinstance(edge, DirectedEdge) else edge
        live = self.edge(key)
        if isinstance(edge, DirectedEdge) and edge.tail != live.tail:
            raise MissingEdgeError(f"Edge {edge} is not live in that orientation.")
        self.ops += 1
        return self._out[live.tail].index(live) + 1

    def truncated_rank(self, edge):
        """min(h + 1, rank_of(edge))."""
        return min(self.h + 1, self.rank_of(edge))

    def bucket(self, v, i, c):
        """
        Entries of in_index(v)[i][c] in key order.

        Returns
        -------
        list
            Tuples (min(h, stored_outdeg(tail)), tail, uid, EdgeKey).
        """
        self.ensure_vertex(v)
        return list(self._in[v].get((i, c), ()))

    def nonempty_ranks(self, v, c):
        """Sorted truncated ranks i for which in_index(v)[i][c] is non-empty."""
        self.ensure_vertex(v)
        return sorted(i for (i, label), b in self._in[v].items() if label == c and b)

    def probe(self, v, i, c, level, exclude=()):
        """
        Minimum-key edge of in_index(v)[i][c] whose tail level equals ``level``.

        Parameters
        ----------
        v : int
            Head vertex.
        i : int
            Truncated rank.
        c : int
            Label.
        level : int
            Required min(h, stored_outdeg(tail)).
        exclude : collection, optional
            Tails to skip.

        Returns
        -------
        [DirectedEdge, NoneType]
            The edge, or None if there is no such edge.
        """
        self.ensure_vertex(v)
        bucket = self._in[v].get((i, c))
        self.ops += 1
        if not bucket:
            return None
        pos = bucket.bisect_left((level, -1, -1))
        for entry in bucket.islice(pos):
            if entry[0] != level:
                return None
            if entry[1] not in exclude:
                return self._entries[entry[3]][0]
            self.ops += 1
        return None

    # ------------------------------------------------------------ internals
    def _entry_key(self, edge):
        return (min(self.h, self._outdeg[edge.tail]), edge.tail, edge.uid, edge.key)

    def _place(self, edge, i, c):
        entry = self._entry_key(edge)
        self._in[edge.head].setdefault((i, c), SortedList()).add(entry)
        self._entries[edge.key] = (edge, i, c, entry)
        self.ops += 1

    def _unplace(self, key):
        edge, i, c, entry = self._entries.pop(key)
        self._in[edge.head][(i, c)].remove(entry)
        self.ops += 1
        return edge, i, c

    def _relocate(self, key, i=None, c=None):
        edge, old_i, old_c = self._unplace(key)
        self._place(
            edge, old_i if i is None else i, old_c if c is None else c
        )

    def _rank(self, edge):
        self.ops += 1
        return self._out[edge.tail].index(edge) + 1

    def _refresh_ranks(self, tail, inserted):
        """
        Re-derive truncated ranks of the prefix of out(tail) that can have shifted.

        Edges beyond position h + 1 + inserted had rank > h + 1 before and after the
        update, so only the prefix needs to be checked.
        """
        prefix = self._out[tail].islice(0, self.h + 1 + inserted)
        for pos, edge in enumerate(prefix, start=1):
            self.ops += 1
            tr = min(self.h + 1, pos)
            if self._entries[edge.key][1] != tr:
                self._relocate(edge.key, i=tr)

    @staticmethod
    def _check_label(label):
        if label not in LABELS:
            raise LabelRangeError(f"Label {label} is outside of {list(LABELS)}.")

    # -------------------------------------------------------------- updates
    def apply_edge_updates(self, insertions=(), deletions=(), labels=None):
        """
        Insert and delete edges, keeping ranks and buckets consistent.

        Stored out-degrees are not modified. The whole request is validated before
        anything changes.

        Parameters
        ----------
        insertions : iterable of DirectedEdge
            Edges to insert. An edge with uid < 0 receives a fresh uid.
        deletions : iterable of EdgeKey
            Keys of live edges to delete.
        labels : dict, optional
            EdgeKey -> label for inserted edges; default 0.

        Returns
        -------
        ChangeLog
            The changes made by this call.

        Raises
        ------
        DuplicateEdgeError
            If an insertion is already live or repeated.
        MissingEdgeError
            If a deletion is not live or repeated.
        LabelRangeError
            If a label is outside {0, 1, 2, 3}.
        """
        insertions = list(insertions)
        deletions = list(deletions)
        labels = labels or {}

        deleting = set()
        for key in deletions:
            if key not in self._entries or key in deleting:
                raise MissingEdgeError(f"Cannot delete edge {key}: not live.")
            deleting.add(key)
        inserting = set()
        for edge in insertions:
            key = edge.key
            if edge.tail == edge.head:
                raise ParameterError(f"Self-loop {edge} cannot be stored.")
            if (key in self._entries and key not in deleting) or key in inserting:
                raise DuplicateEdgeError(f"Cannot insert edge {edge}: already live.")
            self.ensure_vertex(edge.tail)
            self.ensure_vertex(edge.head)
            self._check_label(labels.get(key, 0))
            inserting.add(key)

        delta = ChangeLog()
        touched = defaultdict(int)
        for key in deletions:
            edge, _, _ = self._unplace(key)
            self._out[edge.tail].remove(edge)
            self.ops += 1
            touched.setdefault(edge.tail, 0)
            delta.record_delete(key)

        placed = []
        for edge in insertions:
            if edge.uid < 0:
                edge = DirectedEdge(edge.tail, edge.head, edge.copy, self._next_uid)
            self._next_uid = max(self._next_uid, edge.uid + 1)
            self._out[edge.tail].add(edge)
            self.ops += 1
            touched[edge.tail] += 1
            placed.append(edge)

        for edge in placed:
            self._place(
                edge, min(self.h + 1, self._rank(edge)), labels.get(edge.key, 0)
            )
            delta.record_insert(edge)

        for tail, inserted in touched.items():
            self._refresh_ranks(tail, inserted)

        self.change_log.merge(delta)
        return delta

    def reverse_edges(self, edges, new_labels=None):
        """
        Reverse live edges. Stored out-degrees are not modified.

        Parameters
        ----------
        edges : iterable of DirectedEdge
            Edges in their current orientation.
        new_labels : dict, optional
            EdgeKey -> label after reversal; default 0.

        Returns
        -------
        ChangeLog
            The reversals made by this call.

        Raises
        ------
        MissingEdgeError
            If an edge is not live in the given orientation.
        LabelRangeError
            If a label is outside {0, 1, 2, 3}.
        """
        edges = list(edges)
        new_labels = new_labels or {}
        seen = set()
        for edge in edges:
            live = self._entries.get(edge.key)
            if live is None or live[0].tail != edge.tail or edge.key in seen:
                raise MissingEdgeError(f"Cannot reverse edge {edge}: not live.")
            self._check_label(new_labels.get(edge.key, 0))
            seen.add(edge.key)

        delta = ChangeLog()
        touched = defaultdict(int)
        flipped = []
        for edge in edges:
            live, _, _ = self._unplace(edge.key)
            self._out[live.tail].remove(live)
            touched.setdefault(live.tail, 0)
            flipped_edge = live.reversed()
            self._out[flipped_edge.tail].add(flipped_edge)
            self.ops += 2
            touched[flipped_edge.tail] += 1
            flipped.append(flipped_edge)

        for edge in flipped:
            self._place(
                edge, min(self.h + 1, self._rank(edge)), new_labels.get(edge.key, 0)
            )
            delta.record_reverse(edge.key, edge.tail)

        for tail, inserted in touched.items():
            self._refresh_ranks(tail, inserted)

        self.change_log.merge(delta)
        return delta

    def set_outdegree(self, v, value):
        """
        Overwrite stored_outdeg(v), re-keying v's out-edges if min(h, .) changes.

        Parameters
        ----------
        v : int
            Vertex id.
        value : int
            New stored out-degree.
        """
        self.ensure_vertex(v)
        if value < 0:
            raise ParameterError(f"Stored out-degree of {v} cannot be negative.")
        old_level = min(self.h, self._outdeg[v])
        self._outdeg[v] = value
        if min(self.h, value) != old_level:
            for edge in self._out[v]:
                self._relocate(edge.key)

    def fix_outdegrees(self, vertices):
        """
        Set stored_outdeg(v) := |out(v)| for each given vertex.

        Parameters
        ----------
        vertices : iterable of int
            Vertices to correct.
        """
        for v in vertices:
            self.set_outdegree(v, self.out_count(v))

    def set_label(self, key, label):
        """Move a live edge to the bucket of a new label."""
        self._check_label(label)
        if key not in self._entries:
            raise MissingEdgeError(f"Edge {key} is not live.")
        if self._entries[key][2] != label:
            self._relocate(key, c=label)

    def drain_change_log(self):
        """Return the accumulated change log and start a fresh one."""
        log, self.change_log = self.change_log, ChangeLog()
        return log

    # ----------------------------------------------------------- diagnostics
    def check_structure(self, expect_default_labels=True):
        """
        Verify every store invariant by full scan.

        Parameters
        ----------
        expect_default_labels : bool, optional
            Also require every label to be 0, by default True.

        Returns
        -------
        StructureReport
            Report listing violations; empty when the store is consistent.
        """
        report = StructureReport()
        seen = set()
        for v, out in self._out.items():
            if self._outdeg[v] < 0:
                report.violations.append(f"vertex {v}: negative stored out-degree")
            previous_uid = -1
            for pos, edge in enumerate(out, start=1):
                if edge.tail != v:
                    report.violations.append(f"edge {edge} listed in out({v})")
                if edge.uid <= previous_uid:
                    report.violations.append(f"out({v}) not ordered by uid at {edge}")
                previous_uid = edge.uid
                if edge.key in seen:
                    report.violations.append(f"edge {edge} listed twice")
                seen.add(edge.key)
                stored = self._entries.get(edge.key)
                if stored is None or stored[0] != edge:
                    report.violations.append(f"edge {edge} missing from the index")
                    continue
                _, i, c, entry = stored
                if i != min(self.h + 1, pos):
                    report.violations.append(
                        f"edge {edge}: truncated rank {i}, expected "
                        f"{min(self.h + 1, pos)}"
                    )
                if entry != self._entry_key(edge):
                    report.violations.append(f"edge {edge}: stale bucket key {entry}")
                if expect_default_labels and c != 0:
                    report.violations.append(f"edge {edge}: label {c} outside a batch")
                if entry not in self._in[edge.head].get((i, c), ()):
                    report.violations.append(
                        f"edge {edge}: absent from in_index({edge.head})[{i}][{c}]"
                    )

        if seen != set(self._entries):
            for key in set(self._entries).difference(seen):
                report.violations.append(f"edge {key}: indexed but in no out-list")

        for v, buckets in self._in.items():
            for (i, c), bucket in buckets.items():
                for a, b in zip(bucket, bucket.islice(1)):
                    if a > b:
                        report.violations.append(
                            f"in_index({v})[{i}][{c}] out of order at {b}"
                        )
                for entry in bucket:
                    stored = self._entries.get(entry[3])
                    if stored is None or stored[1:] != (i, c, entry):
                        report.violations.append(
                            f"in_index({v})[{i}][{c}] holds stray entry {entry}"
                        )

        return report

    def snapshot(self):
        """
        Plain-data copy of every field, used for reference comparisons.

        Returns
        -------
        dict
            Keys ``out``, ``outdeg``, ``labels`` and ``buckets``.
        """
        return {
            "out": {v: [e.uid for e in out] for v, out in self._out.items() if out},
            "outdeg": {v: d for v, d in self._outdeg.items() if d},
            "labels": {k: entry[2] for k, entry in self._entries.items()},
            "buckets": {
                (v, i, c): [entry[:3] for entry in bucket]
                for v, buckets in self._in.items()
                for (i, c), bucket in buckets.items()
                if bucket
            },
        }
