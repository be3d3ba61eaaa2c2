"""Exact GED for small graphs.

``exact_ged`` is a depth-first branch and bound over the same search tree as
the K-Best engine (g1 vertices in index order; substitutions by ascending g2
index, then deletion) with a counting lower bound. The inner loop is compiled
with numba. ``exhaustive_ged`` enumerates every complete path and is the
ground truth for tiny graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from fastged.engine import EngineConfig, GedResult, SearchNode, ged_kbest
from fastged.errors import BudgetExceededError, TooLargeError
from fastged.graph import COST_TOL, CostModel, EditOp, EditPath, LabeledGraph, path_cost

# 5 + 5 vertices is 1546 complete paths; 6 + 6 is already 13327
EXHAUSTIVE_MAX_VERTICES = 10


@dataclass(frozen=True)
class OracleConfig:
    node_limit: int = 200_000_000
    use_bound: bool = True

    def __post_init__(self):
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


def _remaining_edges(g: LabeledGraph, alive) -> int:
    return sum(1 for (a, b) in g.edges if a in alive and b in alive)


def lower_bound(node: SearchNode, g1: LabeledGraph, g2: LabeledGraph, cm: CostModel) -> float:
    """Admissible bound on the cost still needed to complete ``node``.

    Counts surplus vertices and surplus edges among the unresolved parts of
    either graph; each surplus item needs at least one deletion or insertion.
    """
    r1 = set(node.remaining_g1(g1.n))
    r2 = node.remaining_g2
    e1 = _remaining_edges(g1, r1)
    e2 = _remaining_edges(g2, r2)
    return (max(0, len(r1) - len(r2)) * cm.vdel + max(0, len(r2) - len(r1)) * cm.vins
            + max(0, e1 - e2) * cm.edel + max(0, e2 - e1) * cm.eins)


def _encode_edges(g: LabeledGraph, codes: dict[str, int]) -> np.ndarray:
    mat = np.full((g.n, g.n), -1, dtype=np.int32)
    for (a, b), lab in g.edges.items():
        mat[a, b] = mat[b, a] = codes[lab]
    return mat


@njit(cache=True)
def _dfs(n1, n2, vcost, e1, e2, esub, edel, eins, vdel, vins,
         best, best_assign, node_limit, use_bound, tol):
    m2 = 0
    for x in range(n2):
        for y in range(x + 1, n2):
            if e2[x, y] >= 0:
                m2 += 1
    # rem1[i]: g1 edges with both endpoints in i..n1-1
    rem1 = np.zeros(n1 + 1, dtype=np.int64)
    for i in range(n1 - 1, -1, -1):
        c = 0
        for j in range(i + 1, n1):
            if e1[i, j] >= 0:
                c += 1
        rem1[i] = rem1[i + 1] + c

    assign = np.full(n1, -1, dtype=np.int64)
    applied = np.full(n1 + 1, -1, dtype=np.int64)
    nxt = np.zeros(n1 + 1, dtype=np.int64)
    ped = np.zeros(n1 + 1)
    used = np.zeros(n2, dtype=np.bool_)
    nused = 0
    rem2 = m2          # g2 edges among unused vertices
    inner2 = 0         # g2 edges among used vertices
    expanded = 0
    improved = False
    depth = 0

    while depth >= 0:
        if depth == n1:
            total = ped[depth] + vins * (n2 - nused) + eins * (m2 - inner2)
            if total < best - tol:
                best = total
                best_assign[:] = assign
                improved = True
            depth -= 1
            continue

        a = applied[depth]
        if a >= 0 and a < n2:
            used[a] = False
            nused -= 1
            cu = 0
            cn = 0
            for y in range(n2):
                if e2[a, y] >= 0:
                    if used[y]:
                        cu += 1
                    else:
                        cn += 1
            inner2 -= cu
            rem2 += cn
        applied[depth] = -1
        assign[depth] = -1

        v = depth
        moved = False
        while nxt[depth] <= n2:
            u = nxt[depth]
            nxt[depth] += 1
            if u < n2 and used[u]:
                continue
            cost = vcost[v, u]
            for j in range(v):
                l1 = e1[j, v]
                if u == n2:
                    if l1 >= 0:
                        cost += edel
                    continue
                x = assign[j]
                l2 = -1
                if x < n2:
                    l2 = e2[x, u]
                if l1 >= 0 and l2 >= 0:
                    if l1 != l2:
                        cost += esub
                elif l1 >= 0:
                    cost += edel
                elif l2 >= 0:
                    cost += eins
            g = ped[depth] + cost
            cu = 0
            cn = 0
            if u < n2:
                for y in range(n2):
                    if e2[u, y] >= 0:
                        if used[y]:
                            cu += 1
                        else:
                            cn += 1
            lb = 0.0
            if use_bound:
                r1 = n1 - depth - 1
                r2 = n2 - nused - (1 if u < n2 else 0)
                if r1 > r2:
                    lb += (r1 - r2) * vdel
                else:
                    lb += (r2 - r1) * vins
                re1 = rem1[depth + 1]
                re2 = rem2 - cn
                if re1 > re2:
                    lb += (re1 - re2) * edel
                else:
                    lb += (re2 - re1) * eins
            if g + lb >= best - tol:
                continue
            assign[depth] = u
            applied[depth] = u
            if u < n2:
                used[u] = True
                nused += 1
                inner2 += cu
                rem2 -= cn
            ped[depth + 1] = g
            depth += 1
            nxt[depth] = 0
            applied[depth] = -1
            expanded += 1
            moved = True
            break
        if expanded >= node_limit:
            return best, improved, expanded, False
        if not moved:
            depth -= 1
    return best, improved, expanded, True


def _path_from_assign(assign, n2: int, cost: float) -> EditPath:
    ops = [EditOp(v, int(u) if u < n2 else None) for v, u in enumerate(assign)]
    used = {int(u) for u in assign if u < n2}
    ops += [EditOp(None, u) for u in range(n2) if u not in used]
    return EditPath(tuple(ops), cost)


def exact_ged(g1: LabeledGraph, g2: LabeledGraph, cm: CostModel | None = None,
              cfg: OracleConfig | None = None, incumbent: GedResult | None = None) -> GedResult:
    """Minimum-cost complete edit path by depth-first branch and bound.

    The search starts from ``incumbent`` when given, otherwise from the K=1
    greedy path. Raises BudgetExceededError (carrying the best path found)
    once ``cfg.node_limit`` nodes have been expanded.
    """
    cm = cm or CostModel()
    cfg = cfg or OracleConfig()
    if incumbent is None:
        incumbent = ged_kbest(g1, g2, EngineConfig(k=1, cost_model=cm))
    n1, n2 = g1.n, g2.n
    labels = sorted(set(g1.edges.values()) | set(g2.edges.values()))
    codes = {lab: i for i, lab in enumerate(labels)}
    vcost = np.full((n1, n2 + 1), cm.vdel)
    for v, a in enumerate(g1.labels):
        for u, b in enumerate(g2.labels):
            vcost[v, u] = cm.vertex_sub(a, b)
    start = np.full(n1, -1, dtype=np.int64)
    fwd = incumbent.path.forward_map()
    for v in range(n1):
        u = fwd.get(v)
        start[v] = n2 if u is None else u
    best, improved, expanded, done = _dfs(
        n1, n2, vcost, _encode_edges(g1, codes), _encode_edges(g2, codes),
        cm.esub, cm.edel, cm.eins, cm.vdel, cm.vins,
        float(incumbent.distance), start, int(cfg.node_limit), bool(cfg.use_bound), COST_TOL)
    path = _path_from_assign(start, n2, best) if improved else incumbent.path
    result = GedResult(float(best), path, optimal=done, expanded=int(expanded))
    if not done:
        raise BudgetExceededError(expanded, result)
    return result


def exhaustive_ged(g1: LabeledGraph, g2: LabeledGraph, cm: CostModel | None = None) -> GedResult:
    """Minimum over every complete edit path, each costed by ``path_cost``."""
    cm = cm or CostModel()
    n1, n2 = g1.n, g2.n
    if n1 + n2 > EXHAUSTIVE_MAX_VERTICES:
        raise TooLargeError(f"exhaustive enumeration needs n1 + n2 <= "
                            f"{EXHAUSTIVE_MAX_VERTICES}, got {n1} + {n2}")
    best: EditPath | None = None
    count = 0

    def rec(v: int, chosen: list[int | None], used: set[int]):
        nonlocal best, count
        if v == n1:
            ops = [EditOp(i, u) for i, u in enumerate(chosen)]
            ops += [EditOp(None, u) for u in range(n2) if u not in used]
            cost = path_cost(ops, g1, g2, cm)
            count += 1
            if best is None or cost < best.total_cost - COST_TOL:
                best = EditPath(tuple(ops), cost)
            return
        for u in range(n2):
            if u not in used:
                used.add(u)
                chosen.append(u)
                rec(v + 1, chosen, used)
                chosen.pop()
                used.discard(u)
        chosen.append(None)
        rec(v + 1, chosen, used)
        chosen.pop()

    rec(0, [], set())
    return GedResult(best.total_cost, best, optimal=True, expanded=count)
