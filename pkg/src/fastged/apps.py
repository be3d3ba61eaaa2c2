"""Applications built on the K-Best engine: distance matrices, KNN and crossover."""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from fastged.engine import EngineConfig, GedResult, ged_kbest
from fastged.errors import DatasetError, GedError
from fastged.graph import EditOp, EditPath, LabeledGraph, apply_edit_path, vertex_origins

log = logging.getLogger(__name__)


def _run_pairs(pairs, fn: Callable, workers: int):
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, pairs))
    return [fn(p) for p in pairs]


def distance_matrix(graphs: Sequence[LabeledGraph], cfg: EngineConfig, workers: int = 1):
    """GED for every unordered pair ``i < j`` (graph ``i`` is the source), mirrored.

    Returns ``(matrix, errors)``; a failed pair leaves NaN in both cells and an
    ``(i, j, message)`` entry in ``errors``.
    """
    n = len(graphs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def one(pair):
        i, j = pair
        try:
            return ged_kbest(graphs[i], graphs[j], cfg).distance, None
        except GedError as exc:
            log.error("pair (%s, %s) failed: %s", graphs[i].name, graphs[j].name, exc)
            return math.nan, str(exc)

    mat = np.zeros((n, n))
    errors = []
    for (i, j), (d, err) in zip(pairs, _run_pairs(pairs, one, workers)):
        mat[i, j] = mat[j, i] = d
        if err is not None:
            errors.append((i, j, err))
    return mat, errors


@dataclass
class KnnReport:
    predictions: list[str]
    truth: list[str]
    distances: np.ndarray
    classes: list[str] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        if not self.truth:
            return 0.0
        return sum(p == t for p, t in zip(self.predictions, self.truth)) / len(self.truth)

    def confusion(self) -> dict[str, dict[str, int]]:
        """``confusion[true][predicted]`` counts."""
        table = {c: {d: 0 for d in self.classes} for c in self.classes}
        for p, t in zip(self.predictions, self.truth):
            table[t][p] += 1
        return table


def knn_vote(dists: np.ndarray, labels: Sequence[str], k_neighbors: int = 1) -> str:
    """Majority class among the nearest training graphs.

    Ties go to the class with the smaller mean distance, then to the
    lexicographically smaller class name.
    """
    order = np.argsort(dists, kind="stable")[:k_neighbors]
    votes = Counter(labels[i] for i in order)
    def key(cls):
        mean = np.mean([dists[i] for i in order if labels[i] == cls])
        return (-votes[cls], mean, cls)
    return min(votes, key=key)


def knn_classify(train: Sequence[LabeledGraph], train_labels: Sequence[str],
                 test: Sequence[LabeledGraph], cfg: EngineConfig,
                 k_neighbors: int = 1, test_labels: Sequence[str] | None = None,
                 workers: int = 1) -> KnnReport:
    """Classify every test graph by its GED to the training graphs (test graph is the source)."""
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    if len(train) != len(train_labels):
        raise DatasetError("every training graph needs a class label")
    if not train:
        raise DatasetError("empty training set")
    pairs = [(i, j) for i in range(len(test)) for j in range(len(train))]
    dist = _run_pairs(pairs, lambda p: ged_kbest(test[p[0]], train[p[1]], cfg).distance, workers)
    dists = np.array(dist, dtype=float).reshape(len(test), len(train))
    preds = [knn_vote(row, train_labels, k_neighbors) for row in dists]
    truth = list(test_labels) if test_labels is not None else []
    classes = sorted(set(train_labels) | set(truth))
    return KnnReport(preds, truth, dists, classes)


@dataclass
class Crossover:
    offspring: LabeledGraph
    path: EditPath
    prefix_len: int
    continuation: EditPath
    from_g1: GedResult
    to_g2: GedResult


def continuation_path(g1: LabeledGraph, path: EditPath, g2: LabeledGraph,
                      prefix_len: int) -> EditPath:
    """The operations left after ``prefix_len``, re-indexed against the intermediate graph."""
    done = path.ops[:prefix_len]
    rest = {op.v: op.u for op in path.ops[prefix_len:] if op.v is not None}
    ops = []
    for i, (v, u) in enumerate(vertex_origins(g1.n, done)):
        if u is not None:
            ops.append(EditOp(i, u))
        else:
            ops.append(EditOp(i, rest[v]))
    ops += [op for op in path.ops[prefix_len:] if op.v is None]
    return EditPath(tuple(ops))


def crossover(g1: LabeledGraph, g2: LabeledGraph, fraction: float,
              cfg: EngineConfig) -> Crossover:
    """Offspring obtained by applying the first ``ceil(fraction * |ops|)`` ops of the g1->g2 path."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    path = ged_kbest(g1, g2, cfg).path
    prefix = math.ceil(fraction * len(path.ops))
    child = apply_edit_path(g1, path, g2, prefix)
    cont = continuation_path(g1, path, g2, prefix)
    return Crossover(child, path, prefix, cont,
                     ged_kbest(g1, child, cfg), ged_kbest(child, g2, cfg))
