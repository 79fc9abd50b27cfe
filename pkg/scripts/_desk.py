"""Desk-scale 2-group scenario shared by the experiment scripts."""

import numpy as np

from agehawkes.scenarios import random_walk_gammas, two_group_config, uniform_seeds
from agehawkes.sim import generate_synthetic


def desk_scenario(truth_seed: int = 11, data_seed: int = 111, dispersion: float = 0.05):
    """25,000 people, 500 seeds, 16 weekly intervals, gamma_1 = (0.2, 0.17), d = 15.22."""
    cfg = two_group_config()
    seeds = uniform_seeds(cfg, [415, 85])
    truth = random_walk_gammas([0.2, 0.17], cfg.k, 15.22, np.random.default_rng(truth_seed))
    data = generate_synthetic(cfg, truth, seeds, dispersion, np.random.default_rng(data_seed))
    return cfg, seeds, data
