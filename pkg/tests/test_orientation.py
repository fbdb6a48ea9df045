# -*- coding: utf-8 -*-
"""Unit tests for bdcore.orientation module"""
import pytest

from bdcore.exceptions import (
    DuplicateEdgeError,
    LabelRangeError,
    MissingEdgeError,
    ParameterError,
    UniverseError,
)
from bdcore.orientation import ChangeLog, DirectedEdge, EdgeKey, OrientationStore


def _store_with_star(heads, h=2, n=6):
    store = OrientationStore(n, h)
    store.apply_edge_updates(insertions=[DirectedEdge(0, v) for v in heads])
    return store


def test_edge_key_is_orientation_free():
    """
    Unit test for EdgeKey.of - test that both orientations of an edge give the same
    key and that other() returns the opposite endpoint.
    """
    key = EdgeKey.of(4, 1)
    assert key == EdgeKey(1, 4, 0)
    assert key == DirectedEdge(1, 4).key == DirectedEdge(4, 1).key
    assert key.other(1) == 4
    assert key.other(4) == 1


def test_ranks_follow_uid_order():
    """
    Test that out-edges are ranked in insertion (uid) order and that truncated ranks
    saturate at h + 1.
    """
    store = _store_with_star([1, 2, 3, 4, 5], h=2)
    out = store.out_edges(0)
    assert [e.head for e in out] == [1, 2, 3, 4, 5]
    assert [store.rank_of(e) for e in out] == [1, 2, 3, 4, 5]
    assert [store.truncated_rank(e) for e in out] == [1, 2, 3, 3, 3]
    assert [e.head for e in store.out_edges(0, stop=2)] == [1, 2]
    assert store.check_structure().ok


def test_deletion_shifts_ranks():
    """
    Test that deleting the first out-edge moves the following edges one rank up and
    keeps every bucket consistent.
    """
    store = _store_with_star([1, 2, 3, 4], h=2)
    store.apply_edge_updates(deletions=[EdgeKey.of(0, 1)])
    out = store.out_edges(0)
    assert [e.head for e in out] == [2, 3, 4]
    assert [store.truncated_rank(e) for e in out] == [1, 2, 3]
    assert store.bucket(2, 1, 0)[0][3] == EdgeKey.of(0, 2)
    assert store.check_structure().ok


def test_stored_outdegree_only_changes_on_request():
    """
    Test that edge updates leave stored out-degrees untouched and that
    fix_outdegrees re-keys the in-index entries of the corrected tail.
    """
    store = _store_with_star([1, 2, 3, 4], h=2)
    assert store.stored_outdeg(0) == 0
    assert store.out_count(0) == 4
    assert store.bucket(1, 1, 0) == [(0, 0, 0, EdgeKey.of(0, 1))]

    store.fix_outdegrees([0])
    assert store.stored_outdeg(0) == 4
    assert store.level(0) == 2
    assert store.bucket(1, 1, 0) == [(2, 0, 0, EdgeKey.of(0, 1))]
    assert store.check_structure().ok


def test_fix_outdegrees_on_untouched_vertices():
    """
    Test that fix_outdegrees creates the structures of vertices never seen before
    and still rejects vertices outside the universe.
    """
    store = _store_with_star([1, 2], h=2)
    store.fix_outdegrees([0, 5])
    assert store.stored_outdeg(0) == 2
    assert store.stored_outdeg(5) == 0
    assert 5 in store.vertices
    assert store.check_structure().ok

    with pytest.raises(UniverseError, match="Vertex 6 is outside"):
        store.fix_outdegrees([6])


def test_check_structure_reports_stale_key():
    """
    Test that a stored out-degree changed behind the store's back is reported as a
    stale bucket key.
    """
    store = _store_with_star([1, 2], h=2)
    store._outdeg[0] = 2  # pylint: disable=protected-access
    report = store.check_structure()
    assert not report.ok
    assert any("stale bucket key" in v for v in report.violations)


def test_reverse_keeps_uid():
    """
    Test that reversing an edge keeps its uid, moves it to the new tail's out-list
    and is recorded in the change log.
    """
    store = _store_with_star([1, 2], h=2)
    store.drain_change_log()
    edge = store.edge(EdgeKey.of(0, 2))
    delta = store.reverse_edges([edge])
    flipped = store.edge(EdgeKey.of(0, 2))
    assert flipped.tail == 2 and flipped.head == 0
    assert flipped.uid == edge.uid
    assert store.out_count(0) == 1
    assert store.out_count(2) == 1
    assert delta.reversed == {EdgeKey.of(0, 2): 2}
    assert store.drain_change_log().reversed == {EdgeKey.of(0, 2): 2}
    assert store.check_structure().ok


def test_reverse_wrong_orientation():
    """
    Test that reversing an edge given in the opposite of its live orientation raises
    MissingEdgeError.
    """
    store = _store_with_star([1], h=2)
    with pytest.raises(MissingEdgeError, match="not live"):
        store.reverse_edges([DirectedEdge(1, 0)])


def test_updates_are_validated_atomically():
    """
    Test that a request with one invalid insertion raises DuplicateEdgeError and
    leaves the store unchanged.
    """
    store = _store_with_star([1, 2], h=2)
    before = store.snapshot()
    with pytest.raises(DuplicateEdgeError, match="already live"):
        store.apply_edge_updates(
            insertions=[DirectedEdge(3, 4), DirectedEdge(2, 0)]
        )
    assert len(store) == 2
    assert store.snapshot() == before


@pytest.mark.parametrize(
    "kwargs,error,message",
    [
        ({"deletions": [EdgeKey.of(3, 4)]}, MissingEdgeError, "not live"),
        (
            {"deletions": [EdgeKey.of(0, 1), EdgeKey.of(0, 1)]},
            MissingEdgeError,
            "not live",
        ),
        ({"insertions": [DirectedEdge(2, 2)]}, ParameterError, "Self-loop"),
        (
            {
                "insertions": [DirectedEdge(2, 3)],
                "labels": {EdgeKey.of(2, 3): 4},
            },
            LabelRangeError,
            "outside",
        ),
        ({"insertions": [DirectedEdge(2, 9)]}, UniverseError, "universe"),
    ],
)
def test_update_errors(kwargs, error, message):
    """
    Test that invalid deletions, self-loops, labels and vertices raise the expected
    errors.
    """
    store = _store_with_star([1], h=2)
    with pytest.raises(error, match=message):
        store.apply_edge_updates(**kwargs)


def test_delete_then_reinsert_in_one_request():
    """
    Test that an edge can be deleted and re-inserted with the other orientation in a
    single request.
    """
    store = _store_with_star([1], h=2)
    store.apply_edge_updates(
        insertions=[DirectedEdge(1, 0)], deletions=[EdgeKey.of(0, 1)]
    )
    assert store.edge(EdgeKey.of(0, 1)).tail == 1
    assert store.check_structure().ok


def test_minimum_incoming_entry():
    """
    Test that probe returns the minimum entry at the requested tail level and skips
    excluded tails.
    """
    store = OrientationStore(6, 2)
    store.apply_edge_updates(insertions=[DirectedEdge(3, 0), DirectedEdge(4, 0)])
    first = store.probe(0, 1, 0, 0)
    assert (first.tail, first.head) == (3, 0)
    second = store.probe(0, 1, 0, 0, exclude={3})
    assert (second.tail, second.head) == (4, 0)
    assert store.probe(0, 1, 0, 0, exclude={3, 4}) is None
    assert store.probe(0, 1, 0, 1) is None
    assert store.probe(0, 2, 0, 0) is None
    assert store.nonempty_ranks(0, 0) == [1]


def test_labels_move_between_buckets():
    """
    Test that set_label moves an edge to another label bucket and that
    check_structure flags non-default labels outside a batch.
    """
    store = _store_with_star([1], h=2)
    key = EdgeKey.of(0, 1)
    store.set_label(key, 2)
    assert store.label(key) == 2
    assert store.bucket(1, 1, 0) == []
    assert len(store.bucket(1, 1, 2)) == 1
    assert not store.check_structure().ok
    assert store.check_structure(expect_default_labels=False).ok
    with pytest.raises(LabelRangeError, match="outside"):
        store.set_label(key, 7)


def test_invalid_construction():
    """Test that OrientationStore rejects a negative universe and a cap below 1."""
    with pytest.raises(ParameterError, match="universe size"):
        OrientationStore(-1, 2)
    with pytest.raises(ParameterError, match="cap"):
        OrientationStore(4, 0)


def test_change_log_folding():
    """
    Unit test for ChangeLog - test that a reversal folds into an insertion from the
    same window and that deleting an inserted edge cancels it.
    """
    log = ChangeLog()
    log.record_insert(DirectedEdge(0, 1, uid=0))
    log.record_reverse(EdgeKey.of(0, 1), 1)
    assert log.inserted[EdgeKey.of(0, 1)].tail == 1
    assert not log.reversed

    log.record_delete(EdgeKey.of(0, 1))
    assert log.is_empty()

    log.record_delete(EdgeKey.of(2, 3))
    assert log.deleted == {EdgeKey.of(2, 3)}


def test_change_log_replay():
    """
    Test that replaying a merged log over a snapshot gives the final orientation.
    """
    snapshot = {EdgeKey.of(0, 1): 0, EdgeKey.of(1, 2): 1}
    first = ChangeLog()
    first.record_delete(EdgeKey.of(0, 1))
    first.record_insert(DirectedEdge(3, 2, uid=5))
    later = ChangeLog()
    later.record_reverse(EdgeKey.of(1, 2), 2)
    first.merge(later)
    assert first.touched_keys() == {
        EdgeKey.of(0, 1),
        EdgeKey.of(2, 3),
        EdgeKey.of(1, 2),
    }
    assert first.replay(snapshot) == {EdgeKey.of(1, 2): 2, EdgeKey.of(2, 3): 3}


if __name__ == "__main__":
    pytest.main([__file__, "-s"])
