"""Wall time of one K-Best run (K=5000, density 0.4) per graph size.

The JSON report keeps the timings since they are the point of this run.
"""

import argparse
from pathlib import Path

from fastged import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,150,200")
    ap.add_argument("--k", type=int, default=5000)
    ap.add_argument("--repeats", type=int, default=2)
    ap.add_argument("--out", type=Path, default=Path("reports/sizesweep.json"))
    args = ap.parse_args()

    sizes = [int(x) for x in args.sizes.split(",")]
    rep = bench.sizesweep(sizes=sizes, k=args.k, repeats=args.repeats,
                          progress=lambda m: print(m, flush=True))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(rep.to_json(timings=True))
    print(f"growth {sizes[0]} -> {sizes[-1]}: x{rep.timings['growth_factor']}")


if __name__ == "__main__":
    main()
