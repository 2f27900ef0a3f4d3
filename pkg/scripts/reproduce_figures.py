"""Full comparison sweep over all benchmark functions.

Writes the CSVs behind the convergence, spread and per-component plots to
``--out``. Defaults match the published setup (n=50, 100 generations); the
full 12-function, 10-seed sweep takes a few minutes.

    python3 scripts/reproduce_figures.py --seeds 0-9 --out results/figures
"""
import argparse
import sys

from pesa.benchmarks import list_functions
from pesa.harness import main as harness_main


def seed_list(text):
    if "-" in text:
        lo, hi = text.split("-")
        return ",".join(str(s) for s in range(int(lo), int(hi) + 1))
    return text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--functions", default=",".join(s.name for s in list_functions()))
    ap.add_argument("--seeds", default="0-9", help="range like 0-9 or a list like 0,3,5")
    ap.add_argument("--dim", default="50")
    ap.add_argument("--gens", default="100")
    ap.add_argument("--out", default="results/figures")
    args = ap.parse_args()
    return harness_main([
        "compare", "--function", args.functions, "--seeds", seed_list(args.seeds),
        "--dim", args.dim, "--gens", args.gens, "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
