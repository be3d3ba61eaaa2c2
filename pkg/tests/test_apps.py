import random

import numpy as np
import pytest

from conftest import complete_graph, path_graph, random_graph
from fastged.apps import continuation_path, crossover, distance_matrix, knn_classify, knn_vote
from fastged.engine import EngineConfig, ged_kbest
from fastged.errors import DatasetError
from fastged.graph import (CostModel, EditPath, LabeledGraph, apply_edit_path,
                           graphs_equal_under_mapping, path_cost, target_mapping)

CFG = EngineConfig(k=200)


def test_distance_matrix_shape_and_symmetry(k1, p2, triangle):
    graphs = [k1, p2, triangle]
    mat, errors = distance_matrix(graphs, CFG)
    assert errors == []
    assert mat.shape == (3, 3)
    np.testing.assert_array_equal(mat, mat.T)
    assert np.all(np.diag(mat) == 0)
    assert mat[0, 1] == ged_kbest(k1, p2, CFG).distance
    mat2, _ = distance_matrix(graphs, CFG, workers=3)
    np.testing.assert_array_equal(mat, mat2)


def test_knn_vote_tie_breaks():
    labels = ["a", "b", "b", "a"]
    assert knn_vote(np.array([1.0, 2.0, 3.0, 9.0]), labels, 1) == "a"
    # one vote each: the closer class wins
    assert knn_vote(np.array([5.0, 2.0, 9.0, 9.0]), labels, 2) == "b"
    # equal votes and equal mean distance: the smaller name wins
    assert knn_vote(np.array([1.0, 1.0, 9.0, 9.0]), labels, 2) == "a"


def _two_class_corpus(rng, count):
    graphs, labels = [], []
    for i in range(count):
        size = rng.randint(4, 6)
        if i % 2 == 0:
            graphs.append(complete_graph(size))
            labels.append("dense")
        else:
            graphs.append(path_graph(size))
            labels.append("chain")
    return graphs, labels


def test_knn_separates_structural_classes():
    rng = random.Random(0)
    train, train_y = _two_class_corpus(rng, 12)
    test, test_y = _two_class_corpus(rng, 6)
    rep = knn_classify(train, train_y, test, EngineConfig(k=100, cost_model=CostModel.preset("uniform")),
                       k_neighbors=3, test_labels=test_y)
    assert rep.accuracy == 1.0
    assert rep.confusion() == {"chain": {"chain": 3, "dense": 0}, "dense": {"chain": 0, "dense": 3}}
    assert rep.distances.shape == (6, 12)


def test_knn_triangles_versus_paths():
    tri = LabeledGraph(["X"] * 3, [(0, 1), (1, 2), (0, 2)])
    path = LabeledGraph(["Y"] * 3, [(0, 1), (1, 2)])
    train = [tri, path] * 10
    labels = ["A", "B"] * 10
    test = [tri, path] * 5
    rep = knn_classify(train, labels, test, EngineConfig(k=50, cost_model=CostModel.preset("uniform")),
                       test_labels=["A", "B"] * 5)
    assert rep.accuracy == 1.0
    assert rep.distances.min() == 0


def test_knn_input_errors(k1):
    with pytest.raises(ValueError):
        knn_classify([k1], ["a"], [k1], CFG, k_neighbors=0)
    with pytest.raises(DatasetError):
        knn_classify([k1], [], [k1], CFG)
    with pytest.raises(DatasetError):
        knn_classify([], [], [k1], CFG)


def _check_crossover(g1, g2, fraction):
    cx = crossover(g1, g2, fraction, CFG)
    child = cx.offspring
    cont = cx.continuation
    assert cont.is_complete(child.n, g2.n)
    final = apply_edit_path(child, cont, g2)
    assert graphs_equal_under_mapping(final, g2, target_mapping(child, cont, g2))
    return cx


def test_crossover_endpoints_and_middle():
    rng = random.Random(6)
    for _ in range(15):
        g1, g2 = random_graph(rng, 7, min_n=2), random_graph(rng, 7, min_n=2)
        zero = _check_crossover(g1, g2, 0.0)
        assert zero.prefix_len == 0 and zero.offspring == g1
        assert zero.from_g1.distance == 0
        full = _check_crossover(g1, g2, 1.0)
        assert full.prefix_len == len(full.path.ops)
        assert full.to_g2.distance == 0
        half = _check_crossover(g1, g2, 0.5)
        assert half.prefix_len == -(-len(half.path.ops) // 2)
    with pytest.raises(ValueError):
        crossover(g1, g2, 1.5, CFG)


def test_continuation_completes_every_prefix():
    rng = random.Random(17)
    cm = CostModel()
    for _ in range(15):
        g1, g2 = random_graph(rng, 6, min_n=1), random_graph(rng, 6, min_n=1)
        path = ged_kbest(g1, g2, CFG).path
        for cut in range(len(path.ops) + 1):
            child = apply_edit_path(g1, path, g2, cut)
            cont = continuation_path(g1, path, g2, cut)
            # edges from a deleted prefix vertex to an unresolved one vanish with the
            # vertex, and under second-endpoint charging neither half pays for them
            split = path_cost(path.ops[:cut], g1, g2, cm) + path_cost(cont, child, g2, cm)
            assert split <= path.total_cost + 1e-9
            final = apply_edit_path(child, cont, g2)
            assert graphs_equal_under_mapping(final, g2, target_mapping(child, cont, g2))
    assert continuation_path(LabeledGraph([]), EditPath(), LabeledGraph([]), 0).ops == ()
