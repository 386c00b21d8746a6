"""Compiled vs numpy Monte Carlo kernels on identical pre-generated uniforms.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Uniform generation is excluded from the timings, so the numbers compare the
counting kernels alone.  Both backends must return the same counts.
"""

from __future__ import annotations

import argparse
import time

from safeperf import _pykernels
from safeperf.simulation import block_uniforms

try:
    from safeperf import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1 << 20)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()

    u = block_uniforms(0, 0, a.trials, a.n)
    y_min = a.n // 2 + 1
    p, rho = 0.1, 0.5
    p_mm, p_hm = p + rho * (1 - p), p * (1 - rho)
    cases = {
        "iid": lambda k: k.iid_block(u, p, y_min),
        "markov": lambda k: k.markov_block(u, p, p_mm, p_hm, y_min),
    }

    print(f"{a.trials} trials x {a.n} frames, best of {a.repeat}")
    print(f"{'kernel':<8}{'numpy (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_pykernels), a.repeat)
        if _ckernels is None:
            print(f"{name:<8}{t_py:>12.4f}{'n/a':>12}{'':>10}")
            continue
        if call(_pykernels) != call(_ckernels):
            raise SystemExit(f"{name}: backends disagree")
        t_c = best_of(lambda: call(_ckernels), a.repeat)
        print(f"{name:<8}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
