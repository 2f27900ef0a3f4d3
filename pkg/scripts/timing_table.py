"""Serial wall-clock time of PESA and the standalone algorithms on Sphere."""
import argparse
import statistics
import time

from pesa.benchmarks import Benchmark
from pesa.hybrid import PESAConfig, run_algorithm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=50)
    ap.add_argument("--gens", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    f = Benchmark("sphere", args.dim)
    print(f"{'algorithm':<10}{'median s':>10}{'evals':>8}")
    for algo in ("pesa", "pso", "es", "sa"):
        times = []
        for seed in range(args.repeats):
            t0 = time.perf_counter()
            _, hist = run_algorithm(algo, PESAConfig(n_gen=args.gens, seed=seed), f)
            times.append(time.perf_counter() - t0)
        print(f"{algo:<10}{statistics.median(times):>10.3f}{hist[-1].evaluations:>8d}")


if __name__ == "__main__":
    main()
