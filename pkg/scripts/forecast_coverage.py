"""Coverage of the one-step-ahead 95% forecast band over replicate synthetic epidemics."""

import argparse

import numpy as np

from agehawkes.kdpf import FilterConfig, forecast_next_interval, run_filter
from agehawkes.obs import ObservedSeries
from agehawkes.scenarios import random_walk_gammas, two_group_config, uniform_seeds
from agehawkes.sim import generate_synthetic


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--particles", type=int, default=250)
    p.add_argument("--population", type=int, default=6000)
    p.add_argument("--intervals", type=int, default=6)
    args = p.parse_args()
    k = args.intervals
    full = two_group_config(population=args.population, k=k + 1)
    cfg = two_group_config(population=args.population, k=k)
    seeds = uniform_seeds(full, np.round(np.array([200, 40]) * args.population / 6000))
    hits = 0
    for r in range(args.replicates):
        truth = random_walk_gammas([0.25, 0.2], k + 1, 15.22, np.random.default_rng(1000 + r))
        data = generate_synthetic(full, truth, seeds, 0.05, np.random.default_rng(2000 + r))
        res = run_filter(cfg, FilterConfig(n_particles=args.particles, seed=r, intensity_draws=0), seeds,
                         ObservedSeries(data.observed.counts[:k]))
        agg = forecast_next_interval(res.archive(0), cfg, np.random.default_rng(3000 + r), 4).to_dict()["aggregate"]
        y = int(data.observed.counts[k].sum())
        hit = agg["lo95"] <= y <= agg["hi95"]
        hits += hit
        print(f"replicate {r:>3}: realized {y:>5}  forecast median {agg['median']:.0f} "
              f"[{agg['lo95']:.0f}, {agg['hi95']:.0f}] {'' if hit else 'MISS'}")
    print(f"coverage {hits}/{args.replicates}")


if __name__ == "__main__":
    main()
