"""MCSE of gamma and wall time of the filter across particle counts."""

import argparse
import time

import numpy as np
from scipy import stats

from _desk import desk_scenario
from agehawkes.diagnostics import mcse
from agehawkes.kdpf import FilterConfig, run_filter


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--particles", type=int, nargs="+", default=[500, 1000, 2000, 4000, 8000])
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()
    cfg, seeds, data = desk_scenario()
    secs, errs = [], []
    for N in args.particles:
        start = time.perf_counter()
        res = run_filter(cfg, FilterConfig(n_particles=N, seed=args.seed), seeds, data.observed)
        secs.append(time.perf_counter() - start)
        errs.append(mcse(res.summary.bands["gamma"]["var"], N))
        print(f"N={N:>6}  MCSE(gamma)={errs[-1]:.3e}  time={secs[-1]:.1f}s")
    if len(secs) > 2:
        fit = stats.linregress(args.particles, secs)
        print(f"time ~ {fit.intercept:.2f} + {fit.slope * 1000:.2f} s per 1000 particles, R^2 = {fit.rvalue**2:.4f}")
    print(f"MCSE ratio last/first = {errs[-1] / errs[0]:.3f} (sqrt-N predicts "
          f"{np.sqrt(args.particles[0] / args.particles[-1]):.3f})")


if __name__ == "__main__":
    main()
