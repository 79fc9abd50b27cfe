"""Gamma transition kernels: generation interval h and reporting delay g."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


class UnsampleableRegionError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Gamma law given by its mean and standard deviation (days)."""

    mean: float
    sd: float

    def __post_init__(self):
        if not (self.mean > 0 and self.sd > 0):
            raise ValueError("kernel mean and sd must be positive")

    @property
    def shape(self) -> float:
        return (self.mean / self.sd) ** 2

    @property
    def rate(self) -> float:
        return self.mean / self.sd**2

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(self.shape, self.rate * x)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammaincc(self.shape, self.rate * x)


# the two kernels used for COVID-19
GENERATION_INTERVAL = KernelSpec(6.7, 1.8)
REPORTING_DELAY = KernelSpec(8.8, 4.1)


def density(k: KernelSpec, s):
    """Gamma pdf at s, zero for s < 0. Accepts scalars or arrays."""
    s = np.asarray(s, dtype=float)
    pos = np.maximum(s, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = (
            k.shape * np.log(k.rate)
            + special.xlogy(k.shape - 1.0, pos)
            - k.rate * pos
            - special.gammaln(k.shape)
        )
        out = np.where(s < 0, 0.0, np.exp(logp))
    return out[()] if out.ndim == 0 else out


def mass_between(k: KernelSpec, lo, hi):
    """Vectorised P(lo <= X < hi) without argument checks; lo <= hi assumed."""
    lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
    hi = np.maximum(np.asarray(hi, dtype=float), 0.0)
    a, r = k.shape, k.rate
    # use the upper tail where the lower CDF would lose precision
    upper = special.gammainc(a, r * lo) > 0.5
    lower_mass = special.gammainc(a, r * hi) - special.gammainc(a, r * lo)
    upper_mass = special.gammaincc(a, r * lo) - special.gammaincc(a, r * hi)
    out = np.clip(np.where(upper, upper_mass, lower_mass), 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def interval_mass(k: KernelSpec, lo: float, hi: float) -> float:
    if lo > hi:
        raise ValueError(f"interval_mass needs lo <= hi, got [{lo}, {hi}]")
    if hi <= 0:
        return 0.0
    return float(mass_between(k, lo, hi))


def sample_truncated_many(k: KernelSpec, lo, hi, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the kernel restricted to [lo_i, hi_i), one per window.

    Windows with zero mass are not checked here; callers only pass windows that
    produced Poisson offspring, which requires positive mass.
    """
    lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
    hi = np.asarray(hi, dtype=float)
    a, r = k.shape, k.rate
    u = rng.random(lo.shape)
    F_lo = special.gammainc(a, r * lo)
    upper = F_lo > 0.5
    out = np.empty(lo.shape)
    lw = ~upper
    if np.any(lw):
        F_hi = special.gammainc(a, r * hi[lw])
        p = F_lo[lw] + u[lw] * (F_hi - F_lo[lw])
        out[lw] = special.gammaincinv(a, p) / r
    if np.any(upper):
        S_lo = special.gammaincc(a, r * lo[upper])
        S_hi = special.gammaincc(a, r * hi[upper])
        q = S_lo - u[upper] * (S_lo - S_hi)
        out[upper] = special.gammainccinv(a, q) / r
    top = np.nextafter(hi, -np.inf)
    return np.minimum(np.maximum(out, lo), top)


def sample_truncated(k: KernelSpec, lo: float, hi: float, rng: np.random.Generator, size=None):
    """Draw from the kernel conditioned on [lo, hi) by inverting the CDF."""
    if lo > hi or interval_mass(k, lo, hi) <= 0:
        raise UnsampleableRegionError(f"kernel has no mass on [{lo}, {hi})")
    n = 1 if size is None else size
    draws = sample_truncated_many(k, np.full(n, lo, dtype=float), np.full(n, hi, dtype=float), rng)
    return float(draws[0]) if size is None else draws


def masses_over_boundaries(k: KernelSpec, times, boundaries) -> np.ndarray:
    """Kernel mass of each event time inside consecutive windows [b_j, b_{j+1}).

    Returns an array of shape (len(times), len(boundaries) - 1). Survival-function
    differences keep small tail masses accurate.
    """
    times = np.asarray(times, dtype=float)
    b = np.asarray(boundaries, dtype=float)
    sf = k.sf(b[None, :] - times[:, None])
    return np.maximum(sf[:, :-1] - sf[:, 1:], 0.0)
