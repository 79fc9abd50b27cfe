"""Building blocks of the kernel density particle filter."""

from __future__ import annotations

import numpy as np


class ParticleCollapseError(RuntimeError):
    """Every particle received zero weight."""

    def __init__(self, message: str, interval: int | None = None, best_loglik: float | None = None):
        super().__init__(message)
        self.interval = interval
        self.best_loglik = best_loglik


def rw_propagate(gamma_prev, d, rng: np.random.Generator):
    """gamma_prev * eps with eps ~ Gamma(shape d, rate d): mean gamma_prev, sd gamma_prev / sqrt(d)."""
    gamma_prev = np.asarray(gamma_prev, dtype=float)
    d = np.asarray(d, dtype=float)
    shape = np.broadcast_shapes(gamma_prev.shape, d.shape)
    eps = rng.gamma(np.broadcast_to(d, shape), 1.0 / np.broadcast_to(d, shape))
    out = gamma_prev * eps
    return out[()] if out.ndim == 0 else out


def shrink_means(values, weights, a: float) -> np.ndarray:
    """a * x_j + (1 - a) * weighted mean of x."""
    values = np.asarray(values, dtype=float)
    xbar = np.dot(weights, values)
    return a * values + (1.0 - a) * xbar


def weighted_variance(values, weights) -> float:
    values = np.asarray(values, dtype=float)
    xbar = np.dot(weights, values)
    return float(np.dot(weights, (values - xbar) ** 2))


def normalize_log_weights(logw) -> np.ndarray:
    """exp(logw) / sum exp(logw), computed after subtracting the maximum."""
    logw = np.asarray(logw, dtype=float)
    top = np.max(logw)
    if not np.isfinite(top):
        raise ParticleCollapseError("all particle weights are zero", best_loglik=float(top))
    w = np.exp(logw - top)
    return w / w.sum()


def ess(weights) -> float:
    weights = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(weights**2))


def resample_multinomial(weights, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Ancestor indices from iid categorical draws."""
    weights = np.asarray(weights, dtype=float)
    n = len(weights) if size is None else size
    return rng.choice(len(weights), size=n, p=weights / weights.sum())


def auxiliary_weights(g, w, lookahead_loglik) -> np.ndarray:
    """Normalised g_j * w_j * P(Y_next | lookahead sample of j)."""
    with np.errstate(divide="ignore"):
        logw = np.log(g) + np.log(w) + np.asarray(lookahead_loglik, dtype=float)
    return normalize_log_weights(logw)


def second_stage_weights(loglik_new, loglik_lookahead_ancestor) -> np.ndarray:
    """Normalised ratio of the fresh likelihood to the ancestor's lookahead likelihood."""
    new = np.asarray(loglik_new, dtype=float)
    old = np.asarray(loglik_lookahead_ancestor, dtype=float)
    with np.errstate(invalid="ignore"):
        logw = np.where(np.isneginf(new), -np.inf, new - old)
    return normalize_log_weights(logw)


def regenerate_params(shrunk_log, ancestors, h: float, variance: float, rng: np.random.Generator) -> np.ndarray:
    """log theta_j ~ N(shrunk location of ancestor j, h^2 V)."""
    loc = np.asarray(shrunk_log, dtype=float)[ancestors]
    if variance <= 0 or h == 0:
        return loc.copy()
    return loc + h * np.sqrt(variance) * rng.standard_normal(len(loc))


def liu_west_constants(discount: float) -> tuple[float, float]:
    """Shrinkage a = (3 delta - 1) / (2 delta) and bandwidth h = sqrt(1 - a^2)."""
    a = (3.0 * discount - 1.0) / (2.0 * discount)
    return a, float(np.sqrt(max(0.0, 1.0 - a * a)))


def log_normal_init(bounds, size: int, rng: np.random.Generator) -> np.ndarray:
    """log theta ~ N(mid of log bounds, (log range / 8)^2)."""
    lo, hi = np.log(bounds[0]), np.log(bounds[1])
    mu, sigma = 0.5 * (lo + hi), (hi - lo) / 8.0
    if sigma == 0:
        return np.full(size, mu)
    return rng.normal(mu, sigma, size)
