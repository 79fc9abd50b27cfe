"""Directed link counts from stored parents (method A) and re-sampled parents (method B)."""

import argparse

import numpy as np

from _desk import desk_scenario
from agehawkes.kdpf import FilterConfig, run_filter
from agehawkes.lineage import links_from_arrays, links_from_history, links_method_b


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--particles", type=int, default=2000)
    p.add_argument("--histories", type=int, default=30)
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()
    cfg, seeds, data = desk_scenario()
    rng = np.random.default_rng(args.seed)

    # on the simulated truth
    times = np.r_[seeds.times, np.concatenate([s.times for s in data.latent])]
    ages = np.r_[seeds.ages, np.concatenate([s.ages for s in data.latent])]
    events = list(seeds.events) + [e for s in data.latent for e in s.events]
    index = {id(e): i for i, e in enumerate(events)}
    parents = np.array([-1 if e.parent is None else index[id(e.parent)] for e in events])
    truth = links_from_arrays(ages, parents, cfg.n_groups).counts
    post = links_method_b(times, ages, parents < 0, cfg, args.draws, rng)
    lo, hi = np.quantile(post.draws, [0.005, 0.995], axis=0)
    print("truth events: method A counts vs method B 99% band")
    for i in range(2):
        for j in range(2):
            print(f"  {i}->{j}: A {truth[i, j]:>6}  B [{lo[i, j]:.0f}, {hi[i, j]:.0f}]")

    # on the filtered particle histories
    res = run_filter(cfg, FilterConfig(n_particles=args.particles, seed=args.seed), seeds, data.observed)
    archive = res.archive(args.histories)
    n_seeds = len(archive.seeds)
    mats_a, mats_b = [], []
    for h in archive.histories:
        mats_a.append(links_from_history(h, 2, n_seeds).counts)
        t = np.r_[archive.seeds.times, h["time"]]
        a = np.r_[archive.seeds.ages, h["age"]]
        is_seed = np.r_[np.ones(n_seeds, bool), np.zeros(len(h["time"]), bool)]
        mats_b.append(links_method_b(t, a, is_seed, cfg, 1, rng).draws[0])
    qa = np.quantile(mats_a, [0.005, 0.5, 0.995], axis=0)
    qb = np.quantile(mats_b, [0.005, 0.5, 0.995], axis=0)
    print(f"posterior over {len(mats_a)} particle histories: median [99% band]")
    for i in range(2):
        for j in range(2):
            print(f"  {i}->{j}: A {qa[1, i, j]:.0f} [{qa[0, i, j]:.0f}, {qa[2, i, j]:.0f}]  "
                  f"B {qb[1, i, j]:.0f} [{qb[0, i, j]:.0f}, {qb[2, i, j]:.0f}]")


if __name__ == "__main__":
    main()
