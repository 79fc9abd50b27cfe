"""Ready-made synthetic configurations: the reference two-group matrix at desk and full scale."""

from __future__ import annotations

import numpy as np

from .core import AgeStructure, ContactMatrix, EpidemicConfig, IntervalGrid, SeedHistory, coarsen_contact_matrix
from .kernels import GENERATION_INTERVAL, REPORTING_DELAY

# reopening-schools matrix coarsened to 0-59 / 60+
TWO_GROUP_MATRIX = np.array([[6.81, 0.66], [2.14, 1.27]])
TWO_GROUP_SHARES = np.array([0.831, 0.169])


def two_group_config(
    population: int = 25_000,
    susceptible_share: float = 0.7,
    k: int = 16,
    t0: float = 21.0,
    width: float = 7.0,
    beta: float = 0.5,
    gamma_prior=(0.0, 0.5),
    d_bounds=(10.0, 20.0),
    v_bounds=(1e-4, 0.5),
    eta: int = 3,
) -> EpidemicConfig:
    pops = np.round(population * TWO_GROUP_SHARES).astype(int)
    return EpidemicConfig(
        ages=AgeStructure(["0-59", "60+"], pops),
        contacts=ContactMatrix(TWO_GROUP_MATRIX),
        grid=IntervalGrid.uniform(t0, width, k),
        beta=beta,
        gi_kernel=GENERATION_INTERVAL,
        obs_kernel=REPORTING_DELAY,
        initial_susceptibles=np.round(susceptible_share * pops).astype(int),
        eta=eta,
        gamma_prior=tuple(gamma_prior),
        d_bounds=tuple(d_bounds),
        v_bounds=tuple(v_bounds),
    )


def pooled_config(cfg: EpidemicConfig, **overrides) -> EpidemicConfig:
    """Collapse all age groups into one (the unstructured model)."""
    A = cfg.n_groups
    m = coarsen_contact_matrix(cfg.contacts, cfg.populations, [list(range(A))])
    fields = dict(
        ages=AgeStructure(["all"], [cfg.populations.sum()]),
        contacts=m,
        initial_susceptibles=[int(cfg.initial_susceptibles.sum())],
    )
    fields.update(overrides)
    return cfg.replace(**fields)


def uniform_mixing_config(
    n_groups: int,
    population: int = 20_000,
    total_contacts: float = 8.0,
    susceptible_share: float = 0.7,
    k: int = 8,
    t0: float = 21.0,
    width: float = 7.0,
    beta: float = 0.5,
    **kw,
) -> EpidemicConfig:
    """Equal-size groups with homogeneous mixing; dynamics in law do not depend on n_groups."""
    pops = np.full(n_groups, population // n_groups)
    return EpidemicConfig(
        ages=AgeStructure([f"g{i}" for i in range(n_groups)], pops),
        contacts=ContactMatrix(np.full((n_groups, n_groups), total_contacts / n_groups)),
        grid=IntervalGrid.uniform(t0, width, k),
        beta=beta,
        gi_kernel=GENERATION_INTERVAL,
        obs_kernel=REPORTING_DELAY,
        initial_susceptibles=np.round(susceptible_share * pops).astype(int),
        **kw,
    )


def uniform_seeds(cfg: EpidemicConfig, counts_by_age, span: float = 21.0, rng: np.random.Generator | None = None) -> SeedHistory:
    """Seeds spread over [T_0 - span, T_0); evenly spaced unless an rng is given."""
    t0 = cfg.grid.t0
    times, ages = [], []
    for a, c in enumerate(counts_by_age):
        c = int(c)
        if rng is None:
            t = t0 - span + (np.arange(c) + 0.5) * span / max(c, 1)
        else:
            t = np.sort(rng.uniform(t0 - span, t0, c))
        times.append(t)
        ages.append(np.full(c, a))
    return SeedHistory.from_arrays(np.concatenate(times), np.concatenate(ages))


def random_walk_gammas(start, k: int, d: float, rng: np.random.Generator) -> np.ndarray:
    """gamma_1 = start, gamma_n = gamma_{n-1} * Gamma(d, d)."""
    start = np.asarray(start, dtype=float)
    out = np.empty((k, start.size))
    out[0] = start
    for n in range(1, k):
        out[n] = out[n - 1] * rng.gamma(d, 1.0 / d, size=start.size)
    return out


def full_scale_two_group_config(k: int = 20) -> EpidemicConfig:
    """Full-scale 2-group setting: weeks -2..17 on [21, 161), 70% susceptible.

    Susceptibles are 206969 (0-59) and 42104 (60+); populations are those
    counts divided by 0.7.
    """
    sus = np.array([206_969, 42_104])
    pops = np.round(sus / 0.7).astype(int)
    return EpidemicConfig(
        ages=AgeStructure(["0-59", "60+"], pops),
        contacts=ContactMatrix(TWO_GROUP_MATRIX),
        grid=IntervalGrid.uniform(21.0, 7.0, k),
        beta=0.5,
        gi_kernel=GENERATION_INTERVAL,
        obs_kernel=REPORTING_DELAY,
        initial_susceptibles=sus,
    )
