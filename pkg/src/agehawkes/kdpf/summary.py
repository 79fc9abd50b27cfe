"""Posterior summaries built from fixed-lag smoothed particle samples."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..core import EpidemicConfig
from ..diagnostics import intensity_batch, reproduction_numbers_batch

LEVELS = {"lo99": 0.005, "lo95": 0.025, "median": 0.5, "hi95": 0.975, "hi99": 0.995}


def band(samples: np.ndarray) -> dict:
    """Quantiles, mean and variance along axis 0 (NaNs ignored)."""
    samples = np.asarray(samples, dtype=float)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for name, q in LEVELS.items():
            out[name] = np.nanquantile(samples, q, axis=0)
        out["mean"] = np.nanmean(samples, axis=0)
        out["var"] = np.nanvar(samples, axis=0)
    return out


@dataclass
class PosteriorSummary:
    ages: list
    n_particles: int
    bands: dict  # estimand -> {level -> array with interval as first axis}
    d_ci: tuple
    v_ci: tuple
    days_per_interval: int
    diagnostics: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.bands["gamma"]["median"])

    def to_dict(self) -> dict:
        def conv(x):
            if isinstance(x, np.ndarray):
                return np.where(np.isfinite(x), x, np.nan).tolist() if x.dtype.kind == "f" else x.tolist()
            if isinstance(x, dict):
                return {k: conv(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            if isinstance(x, (np.floating, np.integer)):
                return x.item()
            return x

        out = {
            "intervals": list(range(1, self.k + 1)),
            "ages": list(self.ages),
            "n_particles": self.n_particles,
            "days_per_interval": self.days_per_interval,
        }
        for name, b in self.bands.items():
            out[name] = conv(b)
        out["d_ci"] = [float(x) for x in self.d_ci]
        out["v_ci"] = [float(x) for x in self.v_ci]
        out["diagnostics"] = conv(self.diagnostics)
        return out

    def to_json(self) -> str:
        # NaN is written as null
        return json.dumps(_nan_to_none(self.to_dict()), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PosteriorSummary":
        skip = {"intervals", "ages", "n_particles", "days_per_interval", "d_ci", "v_ci", "diagnostics"}
        bands = {
            name: {lvl: np.array(_none_to_nan(v), dtype=float) for lvl, v in b.items()}
            for name, b in d.items() if name not in skip
        }
        return cls(d["ages"], d["n_particles"], bands, tuple(d["d_ci"]), tuple(d["v_ci"]),
                   d.get("days_per_interval", 7), d.get("diagnostics", {}))


def _nan_to_none(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _nan_to_none(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_nan_to_none(v) for v in x]
    return x


def _none_to_nan(x):
    if x is None:
        return float("nan")
    if isinstance(x, list):
        return [_none_to_nan(v) for v in x]
    return x


class SummaryBuilder:
    """Collects smoothed samples interval by interval and turns them into bands."""

    def __init__(self, cfg: EpidemicConfig, intensity_draws: int = 200, r_weighting: str = "incidence"):
        if r_weighting not in ("incidence", "prevalence"):
            raise ValueError("r_weighting must be 'incidence' or 'prevalence'")
        self.cfg = cfg
        self.intensity_draws = intensity_draws
        self.r_weighting = r_weighting
        widths = np.diff(cfg.grid.boundaries)
        self.days = max(1, int(np.floor(widths.min() + 1e-9)))
        self.rows: dict[int, dict] = {}

    def finalize(self, m: int, pop, idx: np.ndarray) -> None:
        """Record interval m from particles ``idx`` traced through the current lineage."""
        cfg = self.cfg
        A = cfg.n_groups
        st = pop.stores[m - 1]
        slots = pop.lineage[m - 1, idx]
        gamma = st.gamma[slots]
        counts = st.counts[slots].astype(float)
        s0 = st.s_start[slots]
        M = len(idx)
        lo, _ = cfg.grid.bounds(m)
        owner, t, a, _ = pop.gather(m, idx)
        day = np.minimum(np.floor(t - lo).astype(np.int64), self.days - 1)
        daily = np.bincount((owner * self.days + day) * A + a, minlength=M * self.days * A).reshape(M, self.days, A)

        if self.r_weighting == "incidence":
            weights = counts
        else:
            weights = counts.copy()
            for mm in range(max(1, m - cfg.eta), m):
                weights += pop.stores[mm - 1].counts[pop.lineage[mm - 1, idx]]
        _, R_a, R = reproduction_numbers_batch(gamma, s0, cfg, weights)

        row = {
            "gamma": gamma,
            "latent_weekly": counts,
            "latent_total": counts.sum(axis=1),
            "latent_daily": daily.astype(float),
            "susceptibles": s0.astype(float),
            "R_age": R_a,
            "R": R,
        }
        if self.intensity_draws > 0:
            row.update(self._intensity(m, pop, idx[: self.intensity_draws], gamma[: self.intensity_draws],
                                       s0[: self.intensity_draws]))
        self.rows[m] = row

    def _intensity(self, m, pop, sub, gamma, s0):
        cfg = self.cfg
        A = cfg.n_groups
        lo, _ = cfg.grid.bounds(m)
        grid = lo + np.arange(self.days, dtype=float)
        K = len(sub)
        owners, times, ages = [], [], []
        before = np.zeros((K, self.days, A))
        for mm in range(max(1, m - cfg.eta), m + 1):
            o, t, a, _ = pop.gather(mm, sub)
            owners.append(o), times.append(t), ages.append(a)
            if mm == m:
                for p, tg in enumerate(grid):
                    sel = t < tg
                    before[:, p, :] = np.bincount(o[sel] * A + a[sel], minlength=K * A).reshape(K, A)
        seeds = pop.seeds
        lam = intensity_batch(np.concatenate(owners), np.concatenate(times), np.concatenate(ages), K,
                              gamma, s0, before, cfg, grid, seeds.times if len(seeds) else None,
                              seeds.ages if len(seeds) else None)
        return {"intensity": lam, "intensity_total": lam.sum(axis=2)}

    def build(self, n_particles: int, d_samples, v_samples, diagnostics=None, keep_samples=True) -> PosteriorSummary:
        k = self.cfg.k
        names = list(self.rows[1].keys())
        bands = {}
        samples = {}
        for name in names:
            per = [band(self.rows[m][name]) for m in range(1, k + 1)]
            if name in ("latent_daily", "intensity", "intensity_total"):
                # flatten interval x day onto one daily axis
                bands[name] = {lvl: np.concatenate([p[lvl] for p in per], axis=0) for lvl in per[0]}
            else:
                bands[name] = {lvl: np.stack([p[lvl] for p in per]) for lvl in per[0]}
            if keep_samples and name in ("gamma", "latent_weekly", "latent_total", "R_age", "R", "susceptibles"):
                samples[name] = np.stack([self.rows[m][name] for m in range(1, k + 1)])
        d_ci = tuple(np.quantile(d_samples, [0.005, 0.995]))
        v_ci = tuple(np.quantile(v_samples, [0.005, 0.995]))
        samples["d"] = np.asarray(d_samples)
        samples["v"] = np.asarray(v_samples)
        return PosteriorSummary(list(self.cfg.ages.labels), n_particles, bands, d_ci, v_ci, self.days,
                                diagnostics or {}, samples)
