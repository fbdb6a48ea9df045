# -*- coding: utf-8 -*-
"""Unit tests for bdcore.balanced module"""
import pytest

from bdcore.balanced import (
    BalancedInstance,
    PendingEdge,
    extraction_bound,
    new_instance,
    phase_ceiling,
    screen_edges,
    single_batch_op_envelope,
)
from bdcore.exceptions import ContractError, ParameterError
from bdcore.orientation import DirectedEdge, EdgeKey
from bdcore.utils import normalize_edge


def _outdegrees(instance, vertices):
    return {v: instance.out_degree(v) for v in vertices}


def test_bound_helpers():
    """
    Unit test for the bound helpers - test the extraction bound, the phase ceiling
    and the operation envelope on small values.
    """
    assert extraction_bound(2) == 21
    assert phase_ceiling(2) == 64
    assert phase_ceiling(2, alpha=1) == 8
    assert single_batch_op_envelope(2, 1) == pytest.approx(256.0)
    assert single_batch_op_envelope(2, 1, k=2, size=3) == pytest.approx(1536.0)


def test_screen_edges():
    """
    Unit test for screen_edges - test that self-loops, unknown vertices, repeated
    and already live edges are rejected with their reason while the rest are
    normalized and kept in input order.
    """
    accepted, rejected = screen_edges(
        [(0, 0), (0, 9), (2, 1), (1, 2), (0, 3), (3, 0)], 4, {(0, 3)}, inserting=True
    )
    assert accepted == [(1, 2)]
    assert [(r.edge, r.reason) for r in rejected] == [
        ((0, 0), "self-loop"),
        ((0, 9), "unknown-vertex"),
        ((1, 2), "duplicate"),
        ((0, 3), "duplicate"),
        ((3, 0), "duplicate"),
    ]

    accepted, rejected = screen_edges([(3, 0), (1, 2)], 4, {(0, 3)}, inserting=False)
    assert accepted == [(0, 3)]
    assert [(r.edge, r.reason) for r in rejected] == [((1, 2), "missing")]


def test_single_edge_insert():
    """
    Test that a single inserted edge is settled with one bundle of one phase and
    oriented away from the smaller id.
    """
    instance = new_instance(3, 2)
    instance.insert_batch([(1, 0)])
    assert instance.tail_of(EdgeKey.of(0, 1)) == 0
    assert instance.counters.bundle_iterations == 1
    assert instance.counters.phases_per_bundle == [1]
    assert instance.check() == []


def test_triangle_single_batch():
    """
    Test that a triangle inserted in one batch ends with every vertex of out-degree
    one after two bundle extractions.
    """
    instance = new_instance(3, 2)
    log = instance.insert_batch([(0, 1), (1, 2), (0, 2)])
    assert _outdegrees(instance, range(3)) == {0: 1, 1: 1, 2: 1}
    assert instance.counters.bundle_iterations == 2
    assert instance.tail_of(EdgeKey.of(0, 1)) == 0
    assert instance.tail_of(EdgeKey.of(1, 2)) == 1
    assert instance.tail_of(EdgeKey.of(0, 2)) == 2
    assert {k: e.tail for k, e in log.inserted.items()} == {
        EdgeKey.of(0, 1): 0,
        EdgeKey.of(1, 2): 1,
        EdgeKey.of(0, 2): 2,
    }
    assert instance.check() == []
    assert instance.verify_h_balanced()


def test_triangle_deletion():
    """
    Test that deleting one edge of a directed triangle leaves the tail with
    out-degree zero after a single pushed bundle.
    """
    instance = new_instance(3, 2)
    for edge in [(0, 1), (1, 2), (0, 2)]:
        instance.insert_batch([edge])
    assert _outdegrees(instance, range(3)) == {0: 1, 1: 1, 2: 1}

    instance.delete_batch([(0, 1)])
    assert _outdegrees(instance, range(3)) == {0: 0, 1: 1, 2: 1}
    assert instance.counters.pushed_bundles == 1
    assert instance.live_edges == {(1, 2), (0, 2)}
    assert instance.check() == []


def test_deletion_strips_excess_edges():
    """
    Test that deletions at a tail whose out-degree exceeds the cap are removed
    directly without any pushed bundle.
    """
    instance = new_instance(8, 1)
    instance.insert_batch([(0, 4), (1, 5), (2, 6), (3, 7)])
    assert instance.counters.bundle_iterations == 1
    instance.insert_batch([(0, 1), (0, 2), (0, 3)])
    assert instance.out_degree(0) == 4
    assert instance.check() == []

    instance.delete_batch([(0, 1), (0, 2)])
    assert instance.counters.pushed_bundles == 0
    assert instance.out_degree(0) == 2
    assert instance.check() == []


def test_extract_token_bundle():
    """
    Test that two pending edges proposing to the same endpoint yield a bundle with
    the earlier edge only.
    """
    instance = new_instance(4, 2)
    bundle, remaining = instance.extract_token_bundle([(1, 2), (1, 3)])
    assert bundle == [DirectedEdge(1, 2, 0)]
    assert remaining == [PendingEdge(1, 3, 0, 1)]


def test_insert_bundle_contract_errors():
    """
    Test that insert_bundle raises ContractError for repeated tails, a tail with a
    larger out-degree than its head and an edge that is already live.
    """
    instance = new_instance(4, 2)
    with pytest.raises(ContractError, match="repeated tails"):
        instance.insert_bundle([DirectedEdge(0, 1), DirectedEdge(0, 2)])

    instance.insert_batch([(0, 1)])
    with pytest.raises(ContractError, match="d\\(tail\\) > d\\(head\\)"):
        instance.insert_bundle([DirectedEdge(0, 2)])
    with pytest.raises(ContractError, match="already live"):
        instance.insert_bundle([DirectedEdge(1, 0)])


@pytest.mark.parametrize(
    "h,k,name", [(0, 1, "H"), (2, 0, "K"), (1.5, 1, "H"), (True, 1, "H")]
)
def test_invalid_parameters(h, k, name):
    """Test that a non-positive or non-integer H or K raises ParameterError."""
    with pytest.raises(ParameterError, match=f"Invalid input for {name}"):
        BalancedInstance(4, h, k)


def test_invalid_batch_kind():
    """Test that apply_batch raises ParameterError for an unknown batch kind."""
    instance = new_instance(4, 2)
    with pytest.raises(ParameterError, match="Invalid batch kind"):
        instance.apply_batch("mix", [(0, 1)])


def test_rejections_are_reported():
    """
    Test that invalid updates are listed in the returned change log while the valid
    ones are applied.
    """
    instance = new_instance(4, 2)
    log = instance.apply_batch("ins", [(0, 1), (1, 1), (1, 0)])
    assert [(r.edge, r.reason) for r in log.rejected] == [
        ((1, 1), "self-loop"),
        ((1, 0), "duplicate"),
    ]
    log = instance.apply_batch("del", [(2, 3), (0, 1)])
    assert [(r.edge, r.reason) for r in log.rejected] == [((2, 3), "missing")]
    assert instance.live_edges == frozenset()
    assert instance.check() == []


def test_drain_change_log():
    """
    Test that the change log accumulates over batches and that a second drain is
    empty.
    """
    instance = new_instance(4, 2)
    instance.apply_batch("ins", [(0, 1)])
    instance.apply_batch("ins", [(2, 3)])
    log = instance.drain_change_log()
    assert set(log.inserted) == {EdgeKey.of(0, 1), EdgeKey.of(2, 3)}
    assert instance.drain_change_log().is_empty()


def test_duplicated_copies():
    """
    Test that every user edge is stored as K copies and that deleting the edge
    removes all of them.
    """
    instance = new_instance(4, 1, k=3)
    instance.apply_batch("ins", [(0, 1), (1, 2)])
    assert len(instance.store) == 6
    assert sum(instance.out_degree(v) for v in range(4)) == 6
    assert instance.check() == []

    instance.apply_batch("del", [(0, 1)])
    assert len(instance.store) == 3
    assert instance.check() == []


def _forced_instance(n, h, oriented):
    """Balanced(h) instance holding exactly the given (tail, head) edges in order."""
    instance = new_instance(n, h)
    instance.store.apply_edge_updates(
        insertions=[DirectedEdge(u, v) for u, v in oriented]
    )
    instance.store.fix_outdegrees(range(n))
    instance._live.update(normalize_edge(u, v) for u, v in oriented)
    assert instance.check() == []
    return instance


def test_tokens_absorbed_by_high_degree_tail():
    """
    Test that two tokens pushed into the same tail of out-degree cap + 1 are
    settled: the first is absorbed, the second turns the tail into a holder, and
    the orientation stays balanced.
    """
    instance = _forced_instance(
        8, 2, [(3, 4), (3, 5), (3, 6), (4, 0), (5, 1), (6, 2)]
    )
    instance.delete_batch([(0, 4), (1, 5)])
    assert instance.check() == []
    assert instance.counters.pushed_bundles == 1
    assert instance.counters.flips == 2
    assert instance.tail_of(EdgeKey.of(3, 4)) == 4
    assert instance.tail_of(EdgeKey.of(3, 5)) == 5
    assert _outdegrees(instance, range(7)) == {
        0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1, 6: 1
    }


def test_transparent_token_through_last_rank():
    """
    Test that a token crossing a truncated-rank cap + 1 edge terminates at its
    tail without making it a holder.
    """
    instance = _forced_instance(6, 2, [(0, 1), (0, 2), (0, 3), (3, 4), (1, 5), (2, 5)])
    assert instance.store.truncated_rank(DirectedEdge(0, 3, 0, 2)) == 3
    instance.delete_batch([(3, 4)])
    assert instance.check() == []
    assert instance.tail_of(EdgeKey.of(0, 3)) == 3
    assert _outdegrees(instance, range(6)) == {0: 2, 1: 1, 2: 1, 3: 1, 4: 0, 5: 0}


@pytest.mark.parametrize(
    "h,k", [(1, 1), (2, 1), (3, 1), (4, 1), (1, 2), (2, 2), (1, 3)]
)
@pytest.mark.parametrize("seed", range(10))
def test_large_random_batches_stay_balanced(random_batches, h, k, seed):
    """
    Test that large mixed batches over a 24-vertex universe keep the instance
    balanced after every batch.
    """
    n = 24
    instance = new_instance(n, h, k)
    for step, (kind, edges) in enumerate(random_batches(n, 40, 30, seed)):
        instance.apply_batch(kind, edges)
        assert instance.check() == [], f"{kind} batch {step}"


@pytest.mark.parametrize("h,k,seed", [(2, 1, 0), (3, 1, 1), (4, 1, 2), (2, 3, 3)])
def test_corpus_batches_stay_balanced(random_batches, h, k, seed):
    """
    Test the balance condition on a larger corpus: 64 and 256 vertices with
    batches of up to 64 and 128 edges.
    """
    for n, size in [(64, 64), (256, 128)]:
        instance = new_instance(n, h, k)
        for step, (kind, edges) in enumerate(random_batches(n, 20, size, seed)):
            instance.apply_batch(kind, edges)
            assert instance.verify_h_balanced(), f"n={n} {kind} batch {step}"
            assert instance.token == {}
        assert instance.check() == []


@pytest.mark.parametrize("h,k", [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_batches_stay_balanced(random_batches, naive_outdegrees, h, k, seed):
    """
    Test that random insertion and deletion batches keep the instance balanced and
    consistent after every batch.
    """
    n = 7
    instance = new_instance(n, h, k)
    live = set()
    for kind, edges in random_batches(n, 12, 4, seed):
        instance.apply_batch(kind, edges)
        if kind == "ins":
            live.update(edges)
        else:
            live.difference_update(edges)
        assert instance.check() == []
        assert instance.live_edges == live
        assert sum(instance.out_degree(v) for v in range(n)) == k * len(live)
        tails = {e.key: e.tail for e in instance.store.edges()}
        assert naive_outdegrees(tails, n) == {
            v: instance.out_degree(v) for v in range(n)
        }
        assert instance.max_out_degree() == max(
            (instance.store.out_count(v) for v in range(n)), default=0
        )


if __name__ == "__main__":
    pytest.main([__file__, "-s"])
