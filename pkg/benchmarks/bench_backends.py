"""Time the numba kernels against the pure-numpy fallback on a few compiled circuits.

    python benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import random
import time

import numpy as np

from nesykc import kernels, use_backend
from nesykc.compile_card import compile_card
from nesykc.compile_path import compile_aspath
from nesykc.core import ProbabilityVector, card_theory
from nesykc.generators import grid_dag, random_probs


def circuits():
    yield "card(200, eq, 100)", compile_card(card_theory(200, "eq", 100))
    yield "card(1000, eq, 500)", compile_card(card_theory(1000, "eq", 500))
    yield "grid 8x8", compile_aspath(grid_dag(8, 8))
    yield "grid 12x12", compile_aspath(grid_dag(12, 12))


def passes(c, p, bits):
    return {
        "pqe": lambda: kernels.pqe_pass(c, p.p, 1 - p.p),
        "eqe": lambda: kernels.eqe_pass(c.smoothed, p.log_pos, p.log_neg),
        "maxsum": lambda: kernels.maxsum_pass(c, p.log_pos, p.log_neg),
        "eval": lambda: kernels.eval_pass(c, bits),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--states", type=int, default=64, help="rows for the eval pass")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'circuit':<22}{'wires':>9}  {'pass':<8}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, c in circuits():
        p = random_probs(c.vars, random.Random(0))
        bits = rng.integers(0, 2, size=(args.states, len(c.vars)), dtype=np.uint8)
        c.smoothed  # build the smoothed copy outside the timed region
        for pass_name in ("pqe", "eqe", "maxsum", "eval"):
            timings = {}
            for backend in ("numba", "numpy"):
                with use_backend(backend):
                    fn = passes(c, p, bits)[pass_name]
                    fn()  # jit warm-up and level-plan caching
                    timings[backend] = best_of(fn, args.repeat)
            speedup = timings["numpy"] / timings["numba"]
            print(
                f"{name:<22}{c.size_wires:>9}  {pass_name:<8}"
                f"{timings['numba'] * 1e3:>10.2f}{timings['numpy'] * 1e3:>10.2f}{speedup:>8.1f}x"
            )


if __name__ == "__main__":
    main()
