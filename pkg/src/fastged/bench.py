"""Experiment harnesses: oracle comparison, K sweep, size sweep and selection fuzz.

Every harness returns a :class:`RunReport` whose aggregates are a pure
function of its per-record data. Wall times live in a separate ``timings``
section so the JSON report is byte-stable across runs unless timings are
requested.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from fastged.engine import EngineConfig, ged_kbest
from fastged.errors import BudgetExceededError
from fastged.graph import DEFAULT_EDGE_LABEL, CostModel
from fastged.io import GenSpec, generate_random
from fastged.oracle import OracleConfig, exact_ged
from fastged.topk import select_k_smallest

log = logging.getLogger(__name__)

TABLE1_DENSITIES = (0.1, 0.3, 0.5, 0.7, 0.9)
KSWEEP_KS = (10, 100, 1000, 10000)
SIZESWEEP_SIZES = (50, 100, 150, 200)


@dataclass
class RunReport:
    protocol: str
    params: dict
    records: list[dict]
    aggregates: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self, timings: bool = False) -> str:
        doc = {"protocol": self.protocol, "params": self.params,
               "records": self.records, "aggregates": self.aggregates}
        if timings:
            doc["timings"] = self.timings
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        """Human-readable summary of the aggregates."""
        lines = [f"protocol: {self.protocol}"]
        for key, val in self.aggregates.items():
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
        for key, val in self.timings.items():
            if not isinstance(val, (list, dict)):
                lines.append(f"{key}: {val}")
        return "\n".join(lines)


def pair_seeds(seed: int, index: int) -> tuple[int, int]:
    return seed + 2 * index, seed + 2 * index + 1


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- table1 -------------------------------------------------------------------

def table1_aggregates(records: list[dict]) -> dict:
    out = {}
    for d in sorted({r["density"] for r in records}):
        rows = [r for r in records if r["density"] == d and not r["excluded"]]
        excluded = sum(1 for r in records if r["density"] == d and r["excluded"])
        if rows:
            mean_kb = sum(r["kbest"] for r in rows) / len(rows)
            mean_ex = sum(r["exact"] for r in rows) / len(rows)
            dev = 100.0 * (mean_kb - mean_ex) / mean_ex if mean_ex > 0 else 0.0
            hits = sum(1 for r in rows if r["optimal_match"])
        else:
            mean_kb = mean_ex = dev = 0.0
            hits = 0
        out[f"{d:g}"] = {
            "pairs": len(rows),
            "excluded": excluded,
            "mean_kbest": round(mean_kb, 9),
            "mean_exact": round(mean_ex, 9),
            "deviation_pct": round(dev, 9),
            "optimal_matches": hits,
            "optimal_rate": round(hits / len(rows), 9) if rows else 0.0,
        }
    return out


def table1(n: int = 10, densities: Sequence[float] = TABLE1_DENSITIES, pairs: int = 100,
           k: int = 700_000, cost_model: CostModel | None = None, seed: int = 0,
           node_limit: int = 200_000_000, vertex_alphabet=("A",), edge_alphabet=(DEFAULT_EDGE_LABEL,),
           workers: int = 1, progress: Callable[[str], None] | None = None) -> RunReport:
    """K-Best against the exact oracle on random pairs, per density.

    Pairs whose oracle run exhausts ``node_limit`` are excluded and counted.
    """
    cm = cost_model or CostModel()
    cfg = EngineConfig(k=k, cost_model=cm)
    ocfg = OracleConfig(node_limit=node_limit)
    jobs = [(di, d, p) for di, d in enumerate(densities) for p in range(pairs)]

    def one(job):
        di, d, p = job
        s1, s2 = pair_seeds(seed, di * pairs + p)
        g1 = generate_random(GenSpec(n, d, vertex_alphabet, edge_alphabet, s1))
        g2 = generate_random(GenSpec(n, d, vertex_alphabet, edge_alphabet, s2))
        t0 = time.perf_counter()
        kb = ged_kbest(g1, g2, cfg)
        t1 = time.perf_counter()
        excluded = False
        try:
            ex = exact_ged(g1, g2, cm, ocfg, incumbent=kb)
        except BudgetExceededError as exc:
            ex, excluded = exc.incumbent, True
        t2 = time.perf_counter()
        if progress and p == pairs - 1:
            progress(f"table1: density {d:g} done")
        return {
            "density": d, "pair": p, "g1_seed": s1, "g2_seed": s2,
            "kbest": kb.distance, "exact": ex.distance,
            "optimal_match": abs(kb.distance - ex.distance) <= 1e-9,
            "excluded": excluded,
        }, (t1 - t0, t2 - t1)

    t_start = time.perf_counter()
    out = _map(one, jobs, workers)
    records = [r for r, _ in out]
    report = RunReport(
        "table1",
        {"n": n, "densities": list(densities), "pairs": pairs, "k": k, "seed": seed,
         "costs": list(cm.as_tuple()), "node_limit": node_limit,
         "vertex_alphabet": list(vertex_alphabet), "edge_alphabet": list(edge_alphabet)},
        records, table1_aggregates(records))
    report.timings = {
        "kbest_s": [round(a, 6) for _, (a, _) in out],
        "oracle_s": [round(b, 6) for _, (_, b) in out],
        "total_s": round(time.perf_counter() - t_start, 3),
    }
    return report


# -- ksweep -------------------------------------------------------------------

def ksweep_aggregates(records: list[dict], ks: Sequence[int]) -> dict:
    means = {}
    for kk in ks:
        vals = [r["distances"][str(kk)] for r in records]
        means[str(kk)] = sum(vals) / len(vals) if vals else 0.0
    base = means.get("10") or means[str(ks[0])]
    return {
        "mean_distance": {kk: round(v, 9) for kk, v in means.items()},
        "normalized": {kk: round(v / base, 9) if base else 1.0 for kk, v in means.items()},
    }


def ksweep(n: int = 15, pairs: int = 30, ks: Sequence[int] = KSWEEP_KS, density: float = 0.5,
           cost_model: CostModel | None = None, seed: int = 0, vertex_alphabet=("A",),
           edge_alphabet=(DEFAULT_EDGE_LABEL,), workers: int = 1,
           progress: Callable[[str], None] | None = None) -> RunReport:
    """Mean K-Best distance per K on a fixed pair set, normalized to the K=10 mean."""
    if 10 not in ks:
        raise ValueError("the K list must contain 10 (the normalization point)")
    cm = cost_model or CostModel()

    def one(p):
        s1, s2 = pair_seeds(seed, p)
        g1 = generate_random(GenSpec(n, density, vertex_alphabet, edge_alphabet, s1))
        g2 = generate_random(GenSpec(n, density, vertex_alphabet, edge_alphabet, s2))
        dists, times = {}, {}
        for kk in ks:
            t0 = time.perf_counter()
            dists[str(kk)] = ged_kbest(g1, g2, EngineConfig(k=kk, cost_model=cm)).distance
            times[str(kk)] = round(time.perf_counter() - t0, 6)
        if progress:
            progress(f"ksweep: pair {p + 1}/{pairs}")
        return {"pair": p, "g1_seed": s1, "g2_seed": s2, "distances": dists}, times

    out = _map(one, range(pairs), workers)
    records = [r for r, _ in out]
    report = RunReport(
        "ksweep",
        {"n": n, "pairs": pairs, "ks": list(ks), "density": density, "seed": seed,
         "costs": list(cm.as_tuple()), "vertex_alphabet": list(vertex_alphabet),
         "edge_alphabet": list(edge_alphabet)},
        records, ksweep_aggregates(records, ks))
    report.timings = {"per_pair_s": [t for _, t in out]}
    return report


# -- sizesweep ----------------------------------------------------------------

def sizesweep(sizes: Sequence[int] = SIZESWEEP_SIZES, k: int = 5000, density: float = 0.4,
              cost_model: CostModel | None = None, seed: int = 0, repeats: int = 1,
              progress: Callable[[str], None] | None = None) -> RunReport:
    """Wall time of one K-Best run per graph size (best of ``repeats``)."""
    cm = cost_model or CostModel()
    cfg = EngineConfig(k=k, cost_model=cm)
    # compile kernels before timing anything
    ged_kbest(generate_random(GenSpec(3, 0.5)), generate_random(GenSpec(3, 0.5, seed=1)), cfg)
    records, times = [], {}
    for i, n in enumerate(sizes):
        s1, s2 = pair_seeds(seed, i)
        g1 = generate_random(GenSpec(n, density, seed=s1))
        g2 = generate_random(GenSpec(n, density, seed=s2))
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = ged_kbest(g1, g2, cfg)
            best = min(best, time.perf_counter() - t0)
        records.append({"n": n, "g1_seed": s1, "g2_seed": s2, "distance": res.distance})
        times[str(n)] = round(best, 6)
        if progress:
            progress(f"sizesweep: n={n} took {best:.3f}s")
    report = RunReport(
        "sizesweep",
        {"sizes": list(sizes), "k": k, "density": density, "seed": seed,
         "costs": list(cm.as_tuple())},
        records, {"mean_distance": round(float(np.mean([r["distance"] for r in records])), 9)})
    first, last = times[str(sizes[0])], times[str(sizes[-1])]
    report.timings = {"wall_s": times, "growth_factor": round(last / first, 6) if first else None}
    return report


# -- selection fuzz -----------------------------------------------------------

def topk_fuzz(pools: int = 1000, max_size: int = 100_000, max_k: int = 10_000, seed: int = 0,
              worker_counts: Sequence[int] = (1, 4, 8)) -> RunReport:
    """Compare selection against a full sort on random pools, for several worker counts."""
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for i in range(pools):
        # log-uniform sizes so small pools are exercised as often as big ones
        size = int(np.exp(rng.uniform(0, np.log(max_size))))
        size = min(max(size, 1), max_size)
        k = int(rng.integers(1, max_k + 1))
        levels = int(rng.integers(1, 50))
        costs = rng.integers(0, levels, size=size).astype(float)
        if rng.random() < 0.5:
            costs += rng.random(size)
        expected = np.sort(costs)[:min(k, size)]
        picks = [select_k_smallest(costs, k, workers=w) for w in worker_counts]
        same = all(np.array_equal(picks[0], p) for p in picks[1:])
        records.append({
            "pool": i, "size": size, "k": k,
            "selected": int(picks[0].size),
            "matches_sorted_prefix": bool(np.array_equal(np.sort(costs[picks[0]]), expected)),
            "deterministic": same,
            "checksum": int(picks[0].sum()),
        })
    agg = {
        "pools": len(records),
        "mismatches": sum(not r["matches_sorted_prefix"] for r in records),
        "nondeterministic": sum(not r["deterministic"] for r in records),
    }
    return RunReport("topk", {"pools": pools, "max_size": max_size, "max_k": max_k, "seed": seed,
                              "worker_counts": list(worker_counts)}, records, agg)
