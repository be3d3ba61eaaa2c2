"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 capacity or
budget error, 4 witness verification failure. Data goes to stdout, progress
and diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from fastged import apps, bench
from fastged.engine import DEFAULT_K, EngineConfig, GedResult, ged_kbest
from fastged.errors import (BudgetExceededError, CapacityError, DatasetError, ParseError,
                            TooLargeError)
from fastged.graph import (COST_TOL, CostModel, apply_edit_path, graphs_equal_under_mapping,
                           path_cost, target_mapping)
from fastged.io import GenSpec, generate_random, load_dataset, read_graph, write_graph
from fastged.oracle import OracleConfig, exact_ged

log = logging.getLogger("fastged")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CAPACITY, EXIT_VERIFY = 0, 1, 2, 3, 4
EXACT_MAX_VERTICES = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _costs(text: str) -> CostModel:
    try:
        return CostModel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fraction(text: str) -> float:
    val = float(text)
    if not 0.0 <= val <= 1.0:
        raise argparse.ArgumentTypeError(f"fraction must lie in [0, 1], got {val}")
    return val


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=DEFAULT_K, help="nodes kept per level (default %(default)s)")
    p.add_argument("--costs", type=_costs, default=CostModel(),
                   help="vsub,vdel,vins,esub,edel,eins or a preset: default, uniform, setting2")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("-o", "--output", type=Path, help="write the result here instead of stdout")


def _cfg(args, within_pair: bool = False) -> EngineConfig:
    """Engine settings. Threads go to the engine only for single-pair commands;
    multi-pair commands spend them on pair-level parallelism instead."""
    if args.k < 1 or args.threads < 1:
        raise UsageError("--k and --threads must be >= 1")
    return EngineConfig(k=args.k, cost_model=args.costs,
                        worker_count=args.threads if within_pair else 1)


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def verify_result(g1, g2, res: GedResult, cm: CostModel) -> tuple[bool, str]:
    recomputed = path_cost(res.path, g1, g2, cm)
    if abs(recomputed - res.distance) > COST_TOL:
        return False, f"path cost {recomputed} != reported {res.distance}"
    if not res.path.is_complete(g1.n, g2.n):
        return False, "witness path is incomplete"
    final = apply_edit_path(g1, res.path, g2)
    if not graphs_equal_under_mapping(final, g2, target_mapping(g1, res.path, g2)):
        return False, "applying the witness does not reproduce g2"
    return True, "ok"


# -- subcommands --------------------------------------------------------------

def cmd_ged(args) -> int:
    g1, g2 = read_graph(args.g1), read_graph(args.g2)
    cfg = _cfg(args, within_pair=True)
    t0 = time.perf_counter()
    if args.exact:
        if max(g1.n, g2.n) > EXACT_MAX_VERTICES:
            raise TooLargeError(
                f"--exact is limited to {EXACT_MAX_VERTICES} vertices per graph "
                f"(got {g1.n} and {g2.n}); drop --exact and raise --k instead")
        res = exact_ged(g1, g2, args.costs, OracleConfig(node_limit=args.node_limit))
    else:
        res = ged_kbest(g1, g2, cfg)
    elapsed = time.perf_counter() - t0
    verified = None
    if args.verify:
        verified = verify_result(g1, g2, res, args.costs)
    doc = {"g1": g1.name, "g2": g2.name, "distance": res.distance,
           "method": "exact" if args.exact else "kbest", "k": None if args.exact else args.k,
           "time_s": round(elapsed, 6)}
    if args.exact:
        doc["optimal"] = res.optimal
    if args.path:
        doc["path"] = res.path.to_json()
    if verified is not None:
        doc["verified"] = verified[0]
        doc["verify_message"] = verified[1]
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [f"distance: {res.distance:g}", f"time: {elapsed:.3f}s"]
        if args.path:
            lines.append("path: " + " ".join(str(op) for op in res.path.ops))
        if verified is not None:
            lines.append(f"verify: {verified[1]}")
        _emit(args, "\n".join(lines) + "\n")
    if verified is not None and not verified[0]:
        return EXIT_VERIFY
    return EXIT_OK


def _load(path, classes=None):
    ds = load_dataset(path, classes)
    for name, err in ds.errors:
        log.warning("failed to load %s: %s", name, err)
    return ds


def cmd_matrix(args) -> int:
    ds = _load(args.dataset)
    if len(ds) < 2:
        raise DatasetError(f"need at least 2 graphs, loaded {len(ds)}")
    cfg = _cfg(args)
    npairs = len(ds) * (len(ds) - 1) // 2
    _progress(f"computing {npairs} pairs")
    mat, errors = apps.distance_matrix(ds.graphs, cfg, workers=args.threads)
    vals = [mat[i, j] for i in range(len(ds)) for j in range(i + 1, len(ds))
            if not math.isnan(mat[i, j])]
    mean = sum(vals) / len(vals) if vals else float("nan")
    _progress(f"pairs: {npairs}, mean distance: {mean:g}")
    if args.format == "json":
        doc = {"names": ds.names, "pairs": npairs, "mean_distance": mean,
               "matrix": [[None if math.isnan(x) else x for x in row] for row in mat.tolist()],
               "errors": [{"i": i, "j": j, "error": e} for i, j, e in errors]}
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ds.names)
        for row in mat.tolist():
            w.writerow(["" if math.isnan(x) else f"{x:g}" for x in row])
        _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_knn(args) -> int:
    train = _load(args.train, args.train_classes)
    test = _load(args.test, args.test_classes)
    if train.classes is None:
        raise DatasetError("training set needs --train-classes")
    missing = [g.name for g in train.graphs if g.name not in train.classes]
    if missing:
        raise DatasetError(f"training graphs without a class: {missing[:5]}")
    truth = None
    if test.classes is not None:
        truth = [test.classes.get(g.name) for g in test.graphs]
        if None in truth:
            raise DatasetError("some test graphs have no class")
    cfg = _cfg(args)
    _progress(f"classifying {len(test)} graphs against {len(train)}")
    rep = apps.knn_classify(train.graphs, train.labels_of(), test.graphs, cfg,
                            k_neighbors=args.neighbors, test_labels=truth, workers=args.threads)
    doc = {"predictions": dict(zip(test.names, rep.predictions)),
           "neighbors": args.neighbors}
    if truth is not None:
        doc["accuracy"] = rep.accuracy
        doc["confusion"] = rep.confusion()
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"{n}: {p}" for n, p in zip(test.names, rep.predictions)]
        if truth is not None:
            lines.append(f"accuracy: {rep.accuracy:.4f}")
            lines.append("confusion (rows: true, cols: predicted)")
            lines.append("\t" + "\t".join(rep.classes))
            for c, row in rep.confusion().items():
                lines.append(c + "\t" + "\t".join(str(row[d]) for d in rep.classes))
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_crossover(args) -> int:
    g1, g2 = read_graph(args.g1), read_graph(args.g2)
    cx = apps.crossover(g1, g2, args.fraction, _cfg(args))
    final = apply_edit_path(cx.offspring, cx.continuation, g2)
    ok = graphs_equal_under_mapping(final, g2, target_mapping(cx.offspring, cx.continuation, g2))
    child = cx.offspring
    write_graph(type(child)(child.labels, child.edges, name=f"{g1.name}x{g2.name}"), args.out)
    doc = {"offspring": str(args.out), "ops_applied": cx.prefix_len, "ops_total": len(cx.path),
           "d_g1_offspring": cx.from_g1.distance, "d_offspring_g2": cx.to_g2.distance,
           "continuation_ok": ok}
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        for key, val in doc.items():
            print(f"{key}: {val}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_gen(args) -> int:
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror}") from None
    width = max(4, len(str(args.count - 1)))
    manifest = []
    for i in range(args.count):
        spec = GenSpec(args.n, args.density, tuple(args.vertex_labels),
                       tuple(args.edge_labels), args.seed + i)
        name = f"g{i:0{width}d}"
        g = generate_random(spec, name=name)
        write_graph(g, out / f"{name}.json")
        manifest.append({"file": f"{name}.json", "seed": spec.seed, "n": g.n, "m": g.m})
    if args.format == "json":
        print(json.dumps(manifest, indent=2))
    else:
        for row in manifest:
            print(f"{row['file']}\tseed={row['seed']}\tn={row['n']}\tm={row['m']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cm = args.costs
    if args.protocol == "table1":
        rep = bench.table1(n=args.n or 10, densities=args.densities or bench.TABLE1_DENSITIES,
                           pairs=args.pairs or 100, k=args.k, cost_model=cm, seed=args.seed,
                           node_limit=args.node_limit, workers=args.threads, progress=_progress)
    elif args.protocol == "ksweep":
        rep = bench.ksweep(n=args.n or 15, pairs=args.pairs or 30,
                           ks=args.ks or bench.KSWEEP_KS, density=args.density or 0.5,
                           cost_model=cm, seed=args.seed, workers=args.threads,
                           progress=_progress)
    elif args.protocol == "sizesweep":
        rep = bench.sizesweep(sizes=args.sizes or bench.SIZESWEEP_SIZES,
                              k=args.k if args.k != DEFAULT_K else 5000,
                              density=args.density or 0.4, cost_model=cm, seed=args.seed,
                              progress=_progress)
    else:
        rep = bench.topk_fuzz(pools=args.pairs or 1000, seed=args.seed)
    if args.format == "json":
        _emit(args, rep.to_json(timings=args.timings))
    else:
        _emit(args, rep.table() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fastged", description="K-Best graph edit distance")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ged", help="distance between two graphs")
    p.add_argument("g1", type=Path)
    p.add_argument("g2", type=Path)
    _engine_flags(p)
    p.add_argument("--exact", action="store_true", help="run the exact branch and bound instead")
    p.add_argument("--node-limit", type=int, default=OracleConfig().node_limit)
    p.add_argument("--verify", action="store_true", help="re-check the witness path")
    p.add_argument("--path", action="store_true", help="print the witness edit path")
    p.set_defaults(func=cmd_ged)

    p = sub.add_parser("matrix", help="distances between all pairs of a dataset (CSV)")
    p.add_argument("dataset", type=Path)
    _engine_flags(p)
    p.set_defaults(func=cmd_matrix, format="csv")

    p = sub.add_parser("knn", help="nearest-neighbour classification by GED")
    p.add_argument("train", type=Path)
    p.add_argument("test", type=Path)
    p.add_argument("--train-classes", type=Path, required=True)
    p.add_argument("--test-classes", type=Path)
    p.add_argument("--neighbors", type=int, default=1)
    _engine_flags(p)
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("crossover", help="offspring from a prefix of the edit path")
    p.add_argument("g1", type=Path)
    p.add_argument("g2", type=Path)
    p.add_argument("--fraction", type=_fraction, default=0.5)
    p.add_argument("--out", type=Path, required=True)
    _engine_flags(p)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("gen", help="write seeded random graphs as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vertex-labels", type=_csv_list(str), default=["A"])
    p.add_argument("--edge-labels", type=_csv_list(str), default=["—"])
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="experiment harnesses")
    p.add_argument("--protocol", choices=("table1", "ksweep", "sizesweep", "topk"), required=True)
    _engine_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--densities", type=_csv_list(float))
    p.add_argument("--ks", type=_csv_list(int))
    p.add_argument("--sizes", type=_csv_list(int))
    p.add_argument("--node-limit", type=int, default=OracleConfig().node_limit)
    p.add_argument("--timings", action="store_true", help="include wall times in JSON output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ParseError, DatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, TooLargeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, BudgetExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY

if __name__ == "__main__":
    sys.exit(main())
