"""Unordered selection of the k cheapest candidates without a full sort.

Each chunk keeps its local best ``L`` costs. The k-th smallest of that merged
short list bounds the true threshold from above, so a single filtering pass
shrinks the pool before the exact threshold is found with an O(n)
partition. Ties at the threshold are admitted in ascending tag order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

LOCAL_BEST = 5


@dataclass(frozen=True)
class Candidate:
    cost: float
    tag: Hashable


def _chunks(n: int, parts: int) -> list[slice]:
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(np.int64)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _local_best(costs: np.ndarray, sl: slice, keep: int) -> np.ndarray:
    part = costs[sl]
    if part.size <= keep:
        return part
    return np.partition(part, keep - 1)[:keep]


def select_k_smallest(costs, k: int, tags=None, workers: int = 1,
                      chunks: int | None = None) -> np.ndarray:
    """Indices of the ``k`` smallest costs, in ascending index order.

    ``tags`` (unique, orderable) break ties at the threshold; by default the
    index itself is the tag. The result does not depend on ``workers`` or
    ``chunks``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    costs = np.asarray(costs, dtype=np.float64)
    n = costs.size
    if k >= n:
        return np.arange(n)

    nchunks = chunks or max(workers, 1) * 4
    parts = _chunks(n, nchunks)
    keep = max(LOCAL_BEST, math.ceil(k / len(parts)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            local = list(pool.map(lambda sl: _local_best(costs, sl, keep), parts))
    else:
        local = [_local_best(costs, sl, keep) for sl in parts]
    merged = np.concatenate(local)

    if merged.size >= k:
        upper = np.partition(merged, k - 1)[k - 1]
        pool_idx = np.flatnonzero(costs <= upper)
    else:
        pool_idx = np.arange(n)
    pool_costs = costs[pool_idx]
    thresh = np.partition(pool_costs, k - 1)[k - 1]

    below = pool_idx[pool_costs < thresh]
    ties = pool_idx[pool_costs == thresh]
    need = k - below.size
    if ties.size > need:
        if tags is None:
            ties = ties[:need]
        else:
            tag_arr = np.asarray(tags)[ties]
            ties = ties[np.argpartition(tag_arr, need - 1)[:need]]
    mask = np.zeros(n, dtype=bool)
    mask[below] = True
    mask[ties] = True
    return np.flatnonzero(mask)


def select_candidates(candidates: Sequence[Candidate], k: int, workers: int = 1) -> list[Candidate]:
    """Object-level wrapper: the ``k`` cheapest candidates, ties by smallest tag."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not candidates:
        return []
    tags = [c.tag for c in candidates]
    if len(set(tags)) != len(tags):
        raise ValueError("candidate tags must be unique")
    order = sorted(range(len(tags)), key=lambda i: tags[i])
    rank = np.empty(len(tags), dtype=np.int64)
    rank[order] = np.arange(len(tags))
    idx = select_k_smallest([c.cost for c in candidates], k, tags=rank, workers=workers)
    return [candidates[i] for i in idx]
