"""Write config.json, seeds.csv and truth_gammas.csv for the desk scenario.

    python scripts/make_example_inputs.py --out example
    agehawkes simulate --config example/config.json --truth-gammas example/truth_gammas.csv \
        --seeds example/seeds.csv --dispersion 0.05 --out example/sim
    agehawkes fit --config example/config.json --observed example/sim/observed.csv --out example/fit
"""

import argparse
import json
from pathlib import Path

import numpy as np

from agehawkes import io
from agehawkes.scenarios import random_walk_gammas, two_group_config, uniform_seeds


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out", required=True)
    p.add_argument("--population", type=int, default=25_000)
    p.add_argument("--intervals", type=int, default=16)
    p.add_argument("--seed", type=int, default=11)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = two_group_config(population=args.population, k=args.intervals)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1))
    scale = args.population / 25_000
    io.write_seeds(out / "seeds.csv", uniform_seeds(cfg, np.round(np.array([415, 85]) * scale)))
    truth = random_walk_gammas([0.2, 0.17], cfg.k, 15.22, np.random.default_rng(args.seed))
    io.write_gammas(out / "truth_gammas.csv", truth, cfg.ages.labels)
    print(f"wrote inputs to {out}")


if __name__ == "__main__":
    main()
