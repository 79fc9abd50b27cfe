"""Observation model: expected reported counts and the negative binomial likelihood."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .core import EpidemicConfig, MarkedEvent
from .kernels import mass_between


@dataclass(frozen=True)
class ObservedSeries:
    """Reported counts Y[n-1, a] for interval n and age group a."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 2:
            raise ValueError("observed counts must be a k x A matrix")
        if np.any(c < 0):
            raise ValueError("observed counts must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def n_groups(self) -> int:
        return self.counts.shape[1]

    def interval(self, n: int) -> np.ndarray:
        return self.counts[n - 1]

    def check(self, cfg: EpidemicConfig) -> None:
        if self.counts.shape != (cfg.k, cfg.n_groups):
            raise ValueError(f"observed shape {self.counts.shape} does not match config ({cfg.k}, {cfg.n_groups})")


@dataclass(frozen=True)
class ObsMeans:
    mu: np.ndarray


def reporting_contributions(cfg: EpidemicConfig, times, ages, n_max: int | None = None) -> np.ndarray:
    """beta-scaled reporting mass of each event into intervals 1..n_max, summed by age.

    Returns an (n_max, A) array. ``n_max`` may exceed k, in which case the grid
    is extended with the last interval width (used for forecasting).
    """
    times = np.asarray(times, dtype=float)
    ages = np.asarray(ages, dtype=np.int64)
    n_max = cfg.k if n_max is None else n_max
    b = cfg.grid.extended(max(0, n_max - cfg.k)).boundaries if n_max > cfg.k else cfg.grid.boundaries
    if not cfg.seeds_in_mu:
        keep = times >= b[0]
        times, ages = times[keep], ages[keep]
    out = np.zeros((n_max, cfg.n_groups))
    for n in range(1, n_max + 1):
        lo_t, hi_t = b[n - 1], b[n]
        sel = times < hi_t
        if not np.any(sel):
            continue
        tw = times[sel]
        m = mass_between(cfg.obs_kernel, np.maximum(tw, lo_t) - tw, hi_t - tw)
        out[n - 1] = np.bincount(ages[sel], weights=m, minlength=cfg.n_groups)
    return cfg.beta * out


def expected_observed(latent: Sequence[MarkedEvent], cfg: EpidemicConfig, n: int, a: int) -> float:
    """mu_{na}: expected reported cases of age a in interval n given latent events."""
    times = np.array([e.time for e in latent if e.age == a], dtype=float)
    if times.size == 0:
        return 0.0
    return float(reporting_contributions(cfg, times, np.full(times.size, a), n)[n - 1, a])


def nb_log_pmf(y, mu, v):
    """Negative binomial log pmf with mean mu and variance mu + v mu^2 (size 1/v).

    mu == 0 gives 0 for y == 0 and -inf otherwise.
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    v = np.asarray(v, dtype=float)
    r = 1.0 / v
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            special.gammaln(y + r)
            - special.gammaln(r)
            - special.gammaln(y + 1.0)
            - r * np.log1p(mu / r)
            + special.xlogy(y, mu / (r + mu))
        )
    zero = mu <= 0
    if np.any(zero):
        out = np.where(zero, np.where(y == 0, 0.0, -np.inf), out)
    return out[()] if np.ndim(out) == 0 else out


def interval_log_likelihood(y_n, mu_n, v) -> np.ndarray | float:
    """Sum over age groups of NB log pmf; mu_n may carry a leading particle axis."""
    mu_n = np.asarray(mu_n, dtype=float)
    v = np.asarray(v, dtype=float)
    if mu_n.ndim > 1:
        v = v[..., None]
    return np.sum(nb_log_pmf(y_n, mu_n, v), axis=-1)


def sample_observed(mu, v, rng: np.random.Generator) -> np.ndarray:
    """Negative binomial draws with mean mu and dispersion v (broadcasting)."""
    mu = np.asarray(mu, dtype=float)
    r = 1.0 / np.broadcast_to(np.asarray(v, dtype=float), mu.shape)
    p = r / (r + mu)
    y = rng.negative_binomial(r, np.where(mu > 0, p, 1.0))
    return np.where(mu > 0, y, 0).astype(np.int64)
