"""Mean K-Best distance as K grows, normalized to K=10."""

import argparse
from pathlib import Path

from fastged import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=15)
    ap.add_argument("--pairs", type=int, default=30)
    ap.add_argument("--ks", default="10,100,1000,10000")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("reports/ksweep.json"))
    args = ap.parse_args()

    ks = [int(x) for x in args.ks.split(",")]
    rep = bench.ksweep(n=args.n, pairs=args.pairs, ks=ks, seed=args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(rep.to_json())
    for k in ks:
        print(f"K={k:<7} mean={rep.aggregates['mean_distance'][str(k)]:<10g} "
              f"normalized={rep.aggregates['normalized'][str(k)]:.4f}")


if __name__ == "__main__":
    main()
