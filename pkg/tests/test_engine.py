import random

import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

import fastged.engine as engine
from conftest import complete_graph, path_graph, random_graph, witness_problem
from fastged.engine import (EngineConfig, SearchNode, branch, finalize_insertions, frontiers,
                            ged_kbest, implied_edge_cost)
from fastged.errors import CapacityError, InvalidStateError
from fastged.graph import CostModel, EditOp, EditPath, LabeledGraph, path_cost
from fastged.oracle import exact_ged

CM = CostModel()


def reference_kbest(g1, g2, k, cm):
    """Level-wise search on SearchNode objects with a full sort for selection.

    Costs are compared on a 1e-9 grid, ties by (parent position, option).
    """
    n2 = g2.n
    frontier = [SearchNode.root(g1, g2)]
    for v in range(g1.n):
        pool = []
        for p, node in enumerate(frontier):
            for child in branch(node, v, g1, g2, cm):
                last = child.path.ops[-1]
                opt = n2 if last.u is None else last.u
                pool.append((round(child.ped, 9), p * (n2 + 1) + opt, child))
        pool.sort(key=lambda t: (t[0], t[1]))
        kept = sorted(pool[:k], key=lambda t: t[1])
        frontier = [c for _, _, c in kept]
    leaves = [finalize_insertions(node, g1, g2, cm) for node in frontier]
    best = min(range(len(leaves)), key=lambda i: (round(leaves[i].ped, 9), i))
    return leaves[best]


def _node(g1, g2, ops):
    node = SearchNode.root(g1, g2)
    for op in ops:
        node = branch(node, op.v, g1, g2, CM)[sorted(node.remaining_g2).index(op.u)
                                              if op.u is not None else -1]
    return node


def test_branch_examples(k1, p2):
    g2 = LabeledGraph(["C"] * 4)
    root = SearchNode.root(k1, g2)
    assert len(branch(root, 0, k1, g2, CM)) == 5
    node = SearchNode(EditPath(), 0, frozenset({3}), 0.0)
    assert len(branch(node, 0, k1, g2, CM)) == 2
    succ = branch(SearchNode.root(p2, k1), 0, p2, k1, CM)
    assert [s.ped for s in succ] == [0, 4]
    for s in succ:
        assert s.ped == path_cost(s.path, p2, k1, CM)
    with pytest.raises(InvalidStateError):
        branch(SearchNode.root(p2, k1), 1, p2, k1, CM)


def test_implied_edge_cost_examples():
    g1 = path_graph(2)
    node = _node(g1, path_graph(2), [EditOp.sub(0, 0)])
    assert implied_edge_cost(node, EditOp.sub(1, 1), g1, path_graph(2), CM) == 0
    empty2 = LabeledGraph(["C", "C"])
    node = _node(g1, empty2, [EditOp.sub(0, 0)])
    assert implied_edge_cost(node, EditOp.sub(1, 1), g1, empty2, CM) == 2
    node = _node(empty2, g1, [EditOp.sub(0, 0)])
    assert implied_edge_cost(node, EditOp.sub(1, 1), empty2, g1, CM) == 2
    node = _node(g1, g1, [EditOp.sub(0, 0)])
    assert implied_edge_cost(node, EditOp.delete(1), g1, g1, CM) == 2
    relabeled = LabeledGraph(["C", "C"], [(0, 1, "double")])
    node = _node(g1, relabeled, [EditOp.sub(0, 0)])
    assert implied_edge_cost(node, EditOp.sub(1, 1), g1, relabeled, CM) == CM.esub


def test_finalize_examples(k1, p2, triangle):
    node = _node(k1, k1, [EditOp.sub(0, 0)])
    assert finalize_insertions(node, k1, k1, CM) == node
    node = _node(k1, p2, [EditOp.sub(0, 0)])
    assert finalize_insertions(node, k1, p2, CM).ped == node.ped + 4 + 2 == 6
    node = _node(k1, triangle, [EditOp.sub(0, 0)])
    done = finalize_insertions(node, k1, triangle, CM)
    assert done.ped == 2 * 4 + 3 * 2 == 14
    assert done.path.is_complete(1, 3)
    with pytest.raises(InvalidStateError):
        finalize_insertions(SearchNode.root(p2, k1), p2, k1, CM)


def test_kbest_examples(p2, k1):
    rng = random.Random(5)
    for _ in range(10):
        g = random_graph(rng, 9)
        assert ged_kbest(g, g, EngineConfig(k=1)).distance == 0
    assert ged_kbest(p2, k1, EngineConfig(k=2)).distance == 6


def test_empty_graphs(triangle):
    empty = LabeledGraph([])
    cfg = EngineConfig(k=4)
    assert ged_kbest(empty, empty, cfg).distance == 0
    assert ged_kbest(empty, triangle, cfg).distance == 3 * 4 + 3 * 2
    res = ged_kbest(triangle, empty, cfg)
    assert res.distance == 3 * 4 + 3 * 2
    assert all(op.kind == "delete" for op in res.path.ops)


@hypothesis.given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 40))
@hypothesis.settings(max_examples=80, deadline=None)
def test_matches_reference_search(seed, k):
    rng = random.Random(seed)
    g1, g2 = random_graph(rng, 5), random_graph(rng, 5)
    cm = CostModel(*rng.choice([(2, 4, 4, 1, 2, 2), (1, 2, 2, 1, 2, 2), (4, 12, 12, 1, 10, 10),
                                (0.5, 1.5, 2.5, 0.3, 0.7, 1.1)]))
    ref = reference_kbest(g1, g2, k, cm)
    res = ged_kbest(g1, g2, EngineConfig(k=k, cost_model=cm))
    assert res.distance == pytest.approx(ref.ped, abs=1e-9)
    assert res.path.ops == ref.path.ops
    assert witness_problem(g1, g2, res, cm) is None


@hypothesis.given(seed=st.integers(0, 2**32 - 1), k=st.sampled_from([1, 3, 20, 500]))
@hypothesis.settings(max_examples=40, deadline=None)
def test_frontier_peds_match_path_cost(seed, k):
    rng = random.Random(seed)
    g1, g2 = random_graph(rng, 7, min_n=1), random_graph(rng, 7)
    cfg = EngineConfig(k=k, level_stats=True)
    for fr, stats in frontiers(g1, g2, cfg):
        assert len(fr) <= k
        if stats is not None:
            assert stats.candidates <= stats.frontier * (g2.n + 1)
            assert stats.kept == len(fr)
        for row in range(len(fr)):
            assert fr.ped[row] == pytest.approx(path_cost(fr.ops(row), g1, g2, CM), abs=1e-9)


def test_level_stats_and_width_bound():
    rng = random.Random(11)
    g1, g2 = random_graph(rng, 8, min_n=8), random_graph(rng, 8, min_n=8)
    k = 50
    res = ged_kbest(g1, g2, EngineConfig(k=k, level_stats=True))
    assert len(res.levels) == g1.n
    for st_ in res.levels:
        assert st_.frontier <= k and st_.kept <= k
        assert st_.candidates <= k * (g2.n + 1)
        assert st_.min_ped <= st_.max_ped


def test_deterministic_across_workers():
    rng = random.Random(3)
    for _ in range(5):
        g1, g2 = random_graph(rng, 9, min_n=6), random_graph(rng, 9, min_n=6)
        base = ged_kbest(g1, g2, EngineConfig(k=200))
        for w in (2, 4, 8):
            other = ged_kbest(g1, g2, EngineConfig(k=200, worker_count=w))
            assert other.distance == base.distance
            assert other.path == base.path


def test_exhaustive_width_is_exact():
    rng = random.Random(8)
    for _ in range(30):
        g1, g2 = random_graph(rng, 4), random_graph(rng, 4)
        k = (g2.n + 1) ** g1.n
        assert ged_kbest(g1, g2, EngineConfig(k=k)).distance == exact_ged(g1, g2).distance


def test_upper_bound_and_k_trend():
    rng = random.Random(21)
    for _ in range(10):
        g1, g2 = random_graph(rng, 7, min_n=5), random_graph(rng, 7, min_n=5)
        exact = exact_ged(g1, g2).distance
        d1 = ged_kbest(g1, g2, EngineConfig(k=1)).distance
        dk = ged_kbest(g1, g2, EngineConfig(k=5000)).distance
        assert d1 >= exact and dk >= exact


def test_capacity_error(monkeypatch):
    monkeypatch.setattr(engine, "_available_bytes", lambda: 1000)
    g = complete_graph(6)
    with pytest.raises(CapacityError) as info:
        ged_kbest(g, g, EngineConfig(k=100))
    assert info.value.level >= 0 and info.value.candidates > 0


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(k=0)
    with pytest.raises(ValueError):
        EngineConfig(worker_count=0)


def test_non_integral_costs_round_trip():
    cm = CostModel(0.1, 0.2, 0.3, 0.1, 0.2, 0.3)
    rng = random.Random(4)
    for _ in range(20):
        g1, g2 = random_graph(rng, 6), random_graph(rng, 6)
        res = ged_kbest(g1, g2, EngineConfig(k=30, cost_model=cm))
        assert res.distance == pytest.approx(path_cost(res.path, g1, g2, cm), abs=1e-9)
        assert np.isfinite(res.distance)
