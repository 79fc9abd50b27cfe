"""Kernel density particle filter with auxiliary lookahead and fixed-lag smoothing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import EpidemicConfig, SeedHistory
from ..obs import ObservedSeries
from ..sim import simulate_interval_batch
from .population import ParticlePopulation
from .steps import (
    ParticleCollapseError,
    auxiliary_weights,
    ess,
    liu_west_constants,
    log_normal_init,
    normalize_log_weights,
    regenerate_params,
    resample_multinomial,
    rw_propagate,
    second_stage_weights,
    shrink_means,
    weighted_variance,
)
from .summary import PosteriorSummary, SummaryBuilder

log = logging.getLogger(__name__)

_STAGES = {"init": 0, "lookahead": 1, "resample": 2, "regenerate": 3, "propagate": 4, "posterior": 5}


class DegenerateInitializationError(ParticleCollapseError):
    pass


@dataclass
class FilterConfig:
    n_particles: int = 2000
    discount: float = 0.99
    ess_fraction: float = 0.8
    lag: int = 4
    seed: int = 0
    intensity_draws: int = 200
    r_weighting: str = "incidence"
    rescue: bool = False
    max_rescues: int = 3
    history_particles: int = 30

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if not 0 < self.ess_fraction <= 1:
            raise ValueError("ess_fraction must lie in (0, 1]")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")
        if self.lag < 0:
            raise ValueError("lag must be non-negative")

    @property
    def shrinkage(self) -> float:
        return liu_west_constants(self.discount)[0]

    @property
    def bandwidth(self) -> float:
        return liu_west_constants(self.discount)[1]


def substream(seed: int, n: int, stage: str) -> np.random.Generator:
    """Independent generator keyed by (seed, interval, stage)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(n, _STAGES[stage])))


def posterior_weights(pop: ParticlePopulation) -> np.ndarray:
    w = pop.w * pop.g
    return w / w.sum()


def init_particles(cfg: EpidemicConfig, fcfg: FilterConfig, seeds: SeedHistory, y1) -> ParticlePopulation:
    """Draw (d, v), gamma_1 and the first interval; weight by P(Y_1 | particle)."""
    N = fcfg.n_particles
    rng = substream(fcfg.seed, 1, "init")
    pop = ParticlePopulation(cfg, seeds, N)
    pop.log_d = log_normal_init(cfg.d_bounds, N, rng)
    pop.log_v = log_normal_init(cfg.v_bounds, N, rng)
    gamma = rng.uniform(cfg.gamma_prior[0], cfg.gamma_prior[1], size=(N, cfg.n_groups))
    sample = simulate_interval_batch(pop.parents_for(1), gamma, pop.S, cfg, 1, rng)
    pop.append(sample, gamma)
    ll = pop.loglik(y1, pop.seed_mu[0] + pop.mu_future[:, 0], np.exp(pop.log_v))
    try:
        pop.w = normalize_log_weights(ll)
    except ParticleCollapseError:
        raise DegenerateInitializationError(
            f"all {N} initial particles have zero likelihood; max log-likelihood {np.max(ll)}",
            interval=1, best_loglik=float(np.max(ll)))
    pop.g = np.full(N, 1.0 / N)
    pop.last_loglik = ll
    return pop


def lookahead_weights(pop: ParticlePopulation, y_next, fcfg: FilterConfig, rng: np.random.Generator):
    """Steps 6-9: shrink, draw a lookahead state per particle, auxiliary weights.

    Returns (g, lookahead log-likelihoods, shrunk log locations for d and v).
    """
    cfg = pop.cfg
    a = fcfg.shrinkage
    n_next = pop.n + 1
    d, v = np.exp(pop.log_d), np.exp(pop.log_v)
    m_logd = shrink_means(pop.log_d, pop.w, a)
    m_logv = shrink_means(pop.log_v, pop.w, a)
    m_d = shrink_means(d, pop.w, a)
    m_v = shrink_means(v, pop.w, a)
    gamma_tilde = rw_propagate(pop.gamma, m_d[:, None], rng)
    look = simulate_interval_batch(pop.parents_for(n_next), gamma_tilde, pop.S, cfg, n_next, rng)
    ll_look = pop.loglik(y_next, pop.sample_mu(look, n_next), m_v)
    try:
        g = auxiliary_weights(pop.g, pop.w, ll_look)
    except ParticleCollapseError as err:
        raise ParticleCollapseError(
            f"auxiliary weights collapsed at interval {n_next}; best log-likelihood {np.max(ll_look)}",
            interval=n_next, best_loglik=float(np.max(ll_look))) from err
    return g, ll_look, m_logd, m_logv


def propagate_and_weight(pop: ParticlePopulation, y_next, ll_look_ancestor, rng: np.random.Generator) -> np.ndarray:
    """Steps 12-14 on an already re-indexed population with regenerated (d, v)."""
    cfg = pop.cfg
    n_next = pop.n + 1
    gamma_new = rw_propagate(pop.gamma, np.exp(pop.log_d)[:, None], rng)
    sample = simulate_interval_batch(pop.parents_for(n_next), gamma_new, pop.S, cfg, n_next, rng)
    pop.append(sample, gamma_new)
    ll_new = pop.loglik(y_next, pop.seed_mu[n_next - 1] + pop.mu_future[:, n_next - 1], np.exp(pop.log_v))
    pop.last_loglik = ll_new
    try:
        return second_stage_weights(ll_new, ll_look_ancestor)
    except ParticleCollapseError as err:
        raise ParticleCollapseError(
            f"weights collapsed at interval {n_next}; best log-likelihood {np.max(ll_new)}",
            interval=n_next, best_loglik=float(np.max(ll_new))) from err


def filter_step(pop: ParticlePopulation, y_next, fcfg: FilterConfig) -> dict:
    """Advance the population from interval n to n+1 (steps 6-14)."""
    n_next = pop.n + 1
    N = pop.N
    g, ll_look, m_logd, m_logv = lookahead_weights(pop, y_next, fcfg, substream(fcfg.seed, n_next, "lookahead"))
    e = ess(g)
    resampled = e < fcfg.ess_fraction * N
    if resampled:
        idx = resample_multinomial(g, substream(fcfg.seed, n_next, "resample"))
        g = np.full(N, 1.0 / N)
    else:
        idx = np.arange(N)
    rng = substream(fcfg.seed, n_next, "regenerate")
    h = fcfg.bandwidth
    V_v = weighted_variance(pop.log_v, pop.w)
    V_d = weighted_variance(pop.log_d, pop.w)
    log_v = regenerate_params(m_logv, idx, h, V_v, rng)
    log_d = regenerate_params(m_logd, idx, h, V_d, rng)
    pop.resample(idx)
    pop.log_v, pop.log_d = log_v, log_d
    w = propagate_and_weight(pop, y_next, ll_look[idx], substream(fcfg.seed, n_next, "propagate"))
    pop.w, pop.g = w, g
    pop.compact()
    return {"interval": n_next, "ess": e, "resampled": bool(resampled)}


@dataclass
class FilterResult:
    summary: PosteriorSummary
    population: ParticlePopulation
    posterior_index: np.ndarray
    steps: list = field(default_factory=list)

    def archive(self, n_history: Optional[int] = None):
        from .archive import ParticleArchive

        return ParticleArchive.from_population(self.population, self.posterior_index, n_history)


def _duplicate(pop: ParticlePopulation) -> None:
    idx = np.repeat(np.arange(pop.N), 2)
    w, g = pop.w[idx] / 2, pop.g[idx] / 2
    pop.resample(idx)
    pop.w, pop.g = w / w.sum(), g / g.sum()


def run_filter(cfg: EpidemicConfig, fcfg: FilterConfig, seeds: SeedHistory, Y: ObservedSeries) -> FilterResult:
    """Run the filter over all k intervals and summarise lag-smoothed posteriors."""
    Y.check(cfg)
    seeds.validate(cfg.grid.t0, cfg.n_groups)
    k, L = cfg.k, fcfg.lag
    builder = SummaryBuilder(cfg, fcfg.intensity_draws, fcfg.r_weighting)
    pop = init_particles(cfg, fcfg, seeds, Y.interval(1))
    steps = []
    drift = {"d_outside": [], "v_outside": []}

    def finalize(t: int, last: bool) -> np.ndarray:
        idx = resample_multinomial(posterior_weights(pop), substream(fcfg.seed, t, "posterior"), size=pop.N)
        targets = range(max(1, t - L), t + 1) if last else ([t - L] if t - L >= 1 else [])
        for m in targets:
            builder.finalize(m, pop, idx)
        d, v = np.exp(pop.log_d[idx]), np.exp(pop.log_v[idx])
        drift["d_outside"].append(float(np.mean((d < cfg.d_bounds[0]) | (d > cfg.d_bounds[1]))))
        drift["v_outside"].append(float(np.mean((v < cfg.v_bounds[0]) | (v > cfg.v_bounds[1]))))
        return idx

    idx = finalize(1, k == 1)
    rescues = 0
    for n in range(1, k):
        while True:
            try:
                info = filter_step(pop, Y.interval(n + 1), fcfg)
                break
            except ParticleCollapseError:
                if not fcfg.rescue or rescues >= fcfg.max_rescues or pop.n != n:
                    raise
                rescues += 1
                log.warning("particle collapse at interval %d; doubling to %d particles", n + 1, 2 * pop.N)
                _duplicate(pop)
        steps.append(info)
        log.debug("interval %d ess %.1f resampled %s", info["interval"], info["ess"], info["resampled"])
        idx = finalize(n + 1, n + 1 == k)

    diagnostics = {
        "ess": [s["ess"] for s in steps],
        "resampled": [s["resampled"] for s in steps],
        "rescues": rescues,
        "shrinkage": fcfg.shrinkage,
        "bandwidth": fcfg.bandwidth,
        **drift,
    }
    summary = builder.build(pop.N, np.exp(pop.log_d[idx]), np.exp(pop.log_v[idx]), diagnostics)
    return FilterResult(summary, pop, idx, steps)
