"""K-Best level-wise search for graph edit distance.

Level ``i`` resolves g1 vertex ``i``: every frontier node branches into one
substitution per unused g2 vertex plus one deletion, each successor is scored
incrementally, and only the ``k`` cheapest successors survive. After the last
level the unused g2 vertices of every survivor are inserted and the cheapest
complete path wins.

The frontier is stored column-wise as numpy arrays (one row per node), and
successors of a whole level are scored at once. For successor ``v -> u`` the
implied edge cost splits into

* ``edel`` for every g1 edge from ``v`` to an earlier g1 vertex,
* ``eins`` for every g2 edge from ``u`` to an already used g2 vertex,
* a correction for edges present on both sides, found with one matrix
  product between the images of ``v``'s earlier neighbours and g2's adjacency.

:class:`SearchNode` and the functions operating on it are the direct,
per-node form of the same rules. They are slow but easy to audit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numba import njit

from fastged.errors import CapacityError, InvalidStateError
from fastged.graph import CostModel, EditOp, EditPath, LabeledGraph, op_cost
from fastged.topk import select_k_smallest

DEFAULT_K = 700_000


_EMPTY = np.zeros((0, 0), dtype=np.float32)


@njit(nogil=True, cache=True)
def _images(assign, cols, n2):
    """0/1 matrix marking the g2 images of g1 vertices ``cols`` in each row."""
    rows = assign.shape[0]
    img = np.zeros((rows, n2), dtype=np.float32)
    for r in range(rows):
        for j in cols:
            x = assign[r, j]
            if x < n2:
                img[r, x] = 1.0
    return img


@njit(nogil=True, cache=True)
def _score(ped, vrow, del_edges, nbr_used, used, both, match, c_ins, c_both, c_match, out):
    rows = out.shape[0]
    n2 = out.shape[1] - 1
    has_both = both.shape[0] > 0
    has_match = match.shape[0] > 0
    for r in range(rows):
        base = ped[r] + del_edges
        for u in range(n2):
            if used[r, u]:
                out[r, u] = np.inf
                continue
            c = base + vrow[u] + c_ins * nbr_used[r, u]
            if has_both:
                c += c_both * both[r, u]
            if has_match:
                c -= c_match * match[r, u]
            out[r, u] = c
        out[r, n2] = base + vrow[n2]


@njit(nogil=True, cache=True)
def _advance(flat_idx, level, assign, used, nbr_used, adj2, costs):
    k = flat_idx.size
    n2 = used.shape[1]
    new_assign = np.zeros((k, assign.shape[1]), dtype=assign.dtype)
    new_used = np.empty((k, n2), dtype=np.bool_)
    new_nbr = np.empty((k, n2), dtype=nbr_used.dtype)
    new_ped = np.empty(k)
    for i in range(k):
        f = flat_idx[i]
        p = f // (n2 + 1)
        opt = f - p * (n2 + 1)
        for j in range(level):
            new_assign[i, j] = assign[p, j]
        new_assign[i, level] = opt
        for u in range(n2):
            new_used[i, u] = used[p, u]
            new_nbr[i, u] = nbr_used[p, u] + adj2[opt, u]
        if opt < n2:
            new_used[i, opt] = True
        new_ped[i] = costs[f]
    return new_assign, new_used, new_nbr, new_ped


@dataclass(frozen=True)
class SearchNode:
    path: EditPath
    next_g1: int
    remaining_g2: frozenset[int]
    ped: float = 0.0

    @classmethod
    def root(cls, g1: LabeledGraph, g2: LabeledGraph) -> SearchNode:
        return cls(EditPath(), 0, frozenset(range(g2.n)), 0.0)

    def remaining_g1(self, n1: int) -> range:
        return range(self.next_g1, n1)


def implied_edge_cost(node: SearchNode, new_op: EditOp, g1: LabeledGraph,
                      g2: LabeledGraph, cm: CostModel) -> float:
    """Cost of edges between ``new_op``'s vertices and the vertices already in the path."""
    cost = 0.0
    v, u = new_op.v, new_op.u
    for op in node.path.ops:
        lab1 = g1.edge_label(op.v, v) if op.v is not None and v is not None else None
        lab2 = g2.edge_label(op.u, u) if op.u is not None and u is not None else None
        if lab1 is not None and lab2 is not None:
            cost += cm.edge_sub(lab1, lab2)
        elif lab1 is not None:
            cost += cm.edel
        elif lab2 is not None:
            cost += cm.eins
    return cost


def _extend(node: SearchNode, op: EditOp, g1, g2, cm) -> SearchNode:
    ped = node.ped + op_cost(op, g1, g2, cm) + implied_edge_cost(node, op, g1, g2, cm)
    remaining = node.remaining_g2 - {op.u} if op.u is not None else node.remaining_g2
    nxt = node.next_g1 + 1 if op.v is not None else node.next_g1
    return SearchNode(EditPath(node.path.ops + (op,), ped), nxt, remaining, ped)


def branch(node: SearchNode, v: int, g1: LabeledGraph, g2: LabeledGraph,
           cm: CostModel) -> list[SearchNode]:
    """All successors of ``node`` on g1 vertex ``v``: substitutions by ascending u, then deletion."""
    if v != node.next_g1 or v >= g1.n:
        raise InvalidStateError(f"vertex {v} is not the next unprocessed g1 vertex ({node.next_g1})")
    succ = [_extend(node, EditOp(v, u), g1, g2, cm) for u in sorted(node.remaining_g2)]
    succ.append(_extend(node, EditOp(v, None), g1, g2, cm))
    return succ


def finalize_insertions(node: SearchNode, g1: LabeledGraph, g2: LabeledGraph,
                        cm: CostModel) -> SearchNode:
    if node.next_g1 != g1.n:
        raise InvalidStateError(f"{g1.n - node.next_g1} g1 vertices are still unprocessed")
    for u in sorted(node.remaining_g2):
        node = _extend(node, EditOp(None, u), g1, g2, cm)
    return node


@dataclass(frozen=True)
class EngineConfig:
    k: int = DEFAULT_K
    cost_model: CostModel = field(default_factory=CostModel)
    worker_count: int = 1
    level_stats: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.worker_count < 1:
            raise ValueError(f"worker_count must be >= 1, got {self.worker_count}")


@dataclass(frozen=True)
class LevelStats:
    level: int
    frontier: int
    candidates: int
    kept: int
    min_ped: float
    max_ped: float


@dataclass(frozen=True)
class GedResult:
    distance: float
    path: EditPath
    levels: tuple[LevelStats, ...] = ()
    optimal: bool | None = None
    expanded: int | None = None


@dataclass
class Frontier:
    """Nodes retained after resolving g1 vertices ``0..level-1``.

    ``assign[r, j]`` is the g2 image of g1 vertex ``j`` in row ``r``, or ``n2``
    when the vertex was deleted. ``nbr_used[r, u]`` counts used g2 neighbours of ``u``.
    """

    level: int
    assign: np.ndarray
    used: np.ndarray
    nbr_used: np.ndarray
    ped: np.ndarray

    def __len__(self):
        return self.ped.size

    def ops(self, row: int) -> tuple[EditOp, ...]:
        n2 = self.used.shape[1]
        return tuple(EditOp(j, int(a) if a < n2 else None)
                     for j, a in enumerate(self.assign[row, :self.level]))


def _available_bytes() -> int | None:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


class _Problem:
    """Dense encodings of one graph pair."""

    def __init__(self, g1: LabeledGraph, g2: LabeledGraph, cm: CostModel):
        self.g1, self.g2, self.cm = g1, g2, cm
        n1, n2 = g1.n, g2.n
        self.n1, self.n2 = n1, n2
        vc = np.full((n1, n2 + 1), cm.vdel)
        for v, a in enumerate(g1.labels):
            for u, b in enumerate(g2.labels):
                vc[v, u] = cm.vertex_sub(a, b)
        self.vcost = vc

        # row n2 stands for "deleted" and has no neighbours
        adj2 = np.zeros((n2 + 1, n2), dtype=np.float32)
        for (x, y) in g2.edges:
            adj2[x, y] = adj2[y, x] = 1.0
        self.adj2 = adj2
        labels2 = sorted(set(g2.edges.values()))
        self.adj2_by_label = {}
        if cm.esub > 0 and len(set(g1.edges.values()) | set(labels2)) > 1:
            for lab in labels2:
                a = np.zeros((n2, n2), dtype=np.float32)
                for (x, y), l2 in g2.edges.items():
                    if l2 == lab:
                        a[x, y] = a[y, x] = 1.0
                self.adj2_by_label[lab] = a
        self.single_label = not self.adj2_by_label
        # earlier g1 neighbours of every vertex, grouped by edge label
        self.prev = []
        for v in range(n1):
            groups: dict[str, list[int]] = {}
            for j, lab in g1.neighbors(v).items():
                if j < v:
                    groups.setdefault(lab, []).append(j)
            self.prev.append(groups)

    def root(self) -> Frontier:
        return Frontier(
            level=0,
            assign=np.zeros((1, self.n1), dtype=np.int32),
            used=np.zeros((1, self.n2), dtype=bool),
            nbr_used=np.zeros((1, self.n2), dtype=np.float32),
            ped=np.zeros(1),
        )

    def evaluate(self, fr: Frontier, out: np.ndarray, rows: slice) -> None:
        """Write successor costs of frontier ``rows`` into ``out[rows]`` (inf = invalid)."""
        cm, n2, v = self.cm, self.n2, fr.level
        groups = self.prev[v]
        nprev = sum(len(js) for js in groups.values())
        assign = fr.assign[rows]
        both = match = _EMPTY
        c_both = 0.0
        if nprev and n2:
            cols = np.array([j for js in groups.values() for j in js], dtype=np.int64)
            both = _images(assign, cols, n2) @ self.adj2[:n2]
            if self.single_label:
                c_both = -cm.edel - cm.eins
            else:
                c_both = cm.esub - cm.edel - cm.eins
                match = np.zeros_like(both)
                for lab, js in groups.items():
                    a2 = self.adj2_by_label.get(lab)
                    if a2 is not None:
                        match += _images(assign, np.array(js, dtype=np.int64), n2) @ a2
        _score(fr.ped[rows], self.vcost[v], cm.edel * nprev, fr.nbr_used[rows],
               fr.used[rows], both, match, cm.eins, c_both, cm.esub, out[rows])

    def advance(self, fr: Frontier, flat_idx: np.ndarray, costs: np.ndarray) -> Frontier:
        assign, used, nbr_used, ped = _advance(flat_idx, fr.level, fr.assign, fr.used,
                                               fr.nbr_used, self.adj2, costs)
        return Frontier(fr.level + 1, assign, used, nbr_used, ped)

    def finalize(self, fr: Frontier) -> np.ndarray:
        """Complete costs after inserting every unused g2 vertex."""
        cm = self.cm
        nused = fr.used.sum(axis=1)
        inner = (fr.nbr_used * fr.used).sum(axis=1, dtype=np.float64) / 2.0
        return fr.ped + cm.vins * (self.n2 - nused) + cm.eins * (self.g2.m - inner)

    def path(self, fr: Frontier, row: int, cost: float) -> EditPath:
        ops = list(fr.ops(row))
        ops += [EditOp(None, u) for u in range(self.n2) if not fr.used[row, u]]
        return EditPath(tuple(ops), cost)


def _check_capacity(level: int, rows: int, n1: int, n2: int) -> None:
    candidates = rows * (n2 + 1)
    # candidate costs + scoring temporaries + two frontier copies
    needed = candidates * 8 + rows * n2 * 4 * 4 + 2 * rows * (n1 * 4 + n2 * 5 + 8)
    avail = _available_bytes()
    if avail is not None and needed > avail:
        raise CapacityError(level, candidates, needed)


def frontiers(g1: LabeledGraph, g2: LabeledGraph, cfg: EngineConfig) -> Iterator[tuple[Frontier, LevelStats | None]]:
    """Yield the frontier after every level, starting with the root."""
    prob = _Problem(g1, g2, cfg.cost_model)
    fr = prob.root()
    yield fr, None
    n2 = prob.n2
    round_costs = not cfg.cost_model.is_integral
    pool = ThreadPoolExecutor(cfg.worker_count) if cfg.worker_count > 1 else None
    try:
        for level in range(prob.n1):
            rows = len(fr)
            _check_capacity(level, rows, prob.n1, n2)
            try:
                cand = np.empty((rows, n2 + 1))
                parts = np.linspace(0, rows, min(cfg.worker_count, rows) + 1).astype(int)
                slices = [slice(a, b) for a, b in zip(parts[:-1], parts[1:])]
                if pool is not None and len(slices) > 1:
                    list(pool.map(lambda sl: prob.evaluate(fr, cand, sl), slices))
                else:
                    prob.evaluate(fr, cand, slice(0, rows))
            except MemoryError:
                raise CapacityError(level, rows * (n2 + 1)) from None
            flat = cand.ravel()
            if round_costs:
                np.round(flat, 9, out=flat)
            valid = int(np.count_nonzero(np.isfinite(flat)))
            keep = min(cfg.k, valid)
            idx = select_k_smallest(flat, keep, workers=cfg.worker_count)
            fr = prob.advance(fr, idx, flat)
            stats = None
            if cfg.level_stats:
                stats = LevelStats(level, rows, valid, len(fr),
                                   float(fr.ped.min()), float(fr.ped.max()))
            yield fr, stats
    finally:
        if pool is not None:
            pool.shutdown()


def ged_kbest(g1: LabeledGraph, g2: LabeledGraph, cfg: EngineConfig | None = None) -> GedResult:
    """Approximate GED from g1 (source) to g2 (target) keeping ``cfg.k`` nodes per level.

    The distance is the cost of the returned path, hence an upper bound on the
    exact GED; it is exact once ``k`` covers the full width of every level.
    """
    cfg = cfg or EngineConfig()
    prob = _Problem(g1, g2, cfg.cost_model)
    levels = []
    fr = None
    for fr, stats in frontiers(g1, g2, cfg):
        if stats is not None:
            levels.append(stats)
    final = prob.finalize(fr)
    if not cfg.cost_model.is_integral:
        final = np.round(final, 9)
    best = int(np.argmin(final))
    return GedResult(float(final[best]), prob.path(fr, best, float(final[best])), tuple(levels))
