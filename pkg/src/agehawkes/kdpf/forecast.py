"""One-interval-ahead prediction of reported cases from the final particles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import EpidemicConfig
from ..kernels import mass_between
from ..obs import sample_observed
from ..sim import ParentBatch, _bounds, seed_parents, simulate_interval_batch
from .archive import ParticleArchive
from .steps import rw_propagate


@dataclass
class ForecastSummary:
    ages: list
    interval: int
    samples: np.ndarray  # (M, A) per-age draws
    d_hat: float
    v_hat: float

    @property
    def aggregate(self) -> np.ndarray:
        return self.samples.sum(axis=1)

    @staticmethod
    def _describe(x: np.ndarray) -> dict:
        lo, med, hi = np.quantile(x, [0.025, 0.5, 0.975])
        return {"mean": float(np.mean(x)), "median": float(med), "lo95": float(lo), "hi95": float(hi)}

    def to_dict(self) -> dict:
        return {
            "interval": self.interval,
            "n_samples": int(self.samples.shape[0]),
            "d_hat": self.d_hat,
            "v_hat": self.v_hat,
            "aggregate": self._describe(self.aggregate),
            "by_age": {str(lab): self._describe(self.samples[:, a]) for a, lab in enumerate(self.ages)},
        }


def forecast_next_interval(archive: ParticleArchive, cfg: EpidemicConfig, rng: np.random.Generator,
                           draws_per_particle: int = 1) -> ForecastSummary:
    """Predict Y_{k+1} per age group and in aggregate.

    d and v are fixed at their particle means; every particle propagates gamma,
    samples interval k+1 from its own recent history and draws NB counts.
    """
    k, A = cfg.k, cfg.n_groups
    n = k + 1
    rep = np.repeat(np.arange(archive.n_particles), draws_per_particle)
    M = len(rep)
    d_hat = float(np.mean(np.exp(archive.log_d)))
    v_hat = float(np.mean(np.exp(archive.log_v)))
    gamma = rw_propagate(archive.gamma_last[rep], d_hat, rng)

    lo, hi = _bounds(cfg, n)
    # map archived events onto the replicated particle list
    counts = np.bincount(archive.recent_owner, minlength=archive.n_particles)
    order = np.argsort(archive.recent_owner, kind="stable")
    starts = np.r_[0, np.cumsum(counts)[:-1]]
    lens = counts[rep]
    ev = np.repeat(starts[rep] - np.r_[0, np.cumsum(lens)[:-1]], lens) + np.arange(lens.sum())
    ev = order[ev]
    t = archive.recent_time[ev]
    mass = mass_between(cfg.gi_kernel, lo - t, hi - t)
    own = ParentBatch(np.repeat(np.arange(M), lens), t, archive.recent_age[ev].astype(np.int64), mass,
                      np.zeros(len(ev), dtype=np.int64), np.zeros(len(ev), dtype=np.int64))
    parents = ParentBatch.concat([seed_parents(cfg, archive.seeds, n, M), own])
    sample = simulate_interval_batch(parents, gamma, archive.susceptibles[rep], cfg, n, rng)

    fresh = cfg.beta * cfg.obs_kernel.cdf(hi - sample.time)
    mu = archive.mu_next[rep] + np.bincount(sample.pid * A + sample.age, weights=fresh,
                                            minlength=M * A).reshape(M, A)
    y = sample_observed(mu, v_hat, rng)
    return ForecastSummary(list(cfg.ages.labels), n, np.asarray(y), d_hat, v_hat)
