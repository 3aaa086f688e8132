"""Time the numba and numpy kernels on the 3-carrier reference scenario.

    python3 benchmarks/bench_kernels.py [--duration 2] [--repeat 3]

The first numba call includes JIT compilation (or a cache load); it is timed
separately and excluded from the steady-state numbers.
"""

import argparse
import time

import numpy as np

from slingloiter import _accel
from slingloiter.config import read_config
from slingloiter.planner import time_grid
from slingloiter.simulator import run


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=2.0, help="simulated seconds")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rc = read_config("ref-n3").with_overrides(duration=args.duration)
    fp = rc.force_plan
    grid = time_grid(20.0, 1e-4)
    cfg = rc.sim_config()
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])

    print(f"plan: {grid.size} samples; sim: {cfg.nsteps} RK4 steps, n = {rc.n}")
    results = {}
    for b in backends:
        warm = 0.0
        if b == "numba":
            t0 = time.perf_counter()
            fp.sample(grid[:10], backend=b)
            run(rc.with_overrides(duration=10 * rc.dt).sim_config(), backend=b)
            warm = time.perf_counter() - t0
        tp, p = best_of(lambda: fp.sample(grid, backend=b), args.repeat)
        ts, s = best_of(lambda: run(cfg, backend=b), args.repeat)
        results[b] = (p, s)
        extra = f"  (first call {warm:.2f} s)" if b == "numba" else ""
        print(f"{b:>6}: plan {tp * 1e3:8.1f} ms   sim {ts * 1e3:8.1f} ms{extra}")

    if len(results) == 2:
        (pa, sa), (pb, sb) = results["numpy"], results["numba"]
        print(f"max |diff|: plan v_R {np.abs(pa.v_R - pb.v_R).max():.1e}, "
              f"sim p_R {np.abs(sa.p_R - sb.p_R).max():.1e}")


if __name__ == "__main__":
    main()
