"""Reproduction numbers, Monte Carlo standard errors, PAE and latent intensity."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import EpidemicConfig, MarkedEvent, interval_indices
from .kernels import density


class UndefinedMetricError(ValueError):
    pass


def reproduction_numbers(gammas, susceptibles, cfg: EpidemicConfig, infected_weights):
    """R_{aa'} = (S_{a'}/N_{a'}) gamma_{a'} m_{a'a}, R_a = sum_{a'} R_{aa'}, R = infected-weighted mean.

    ``R`` is NaN when no group has any infected weight.
    """
    gammas = np.asarray(gammas, dtype=float)
    frac = np.asarray(susceptibles, dtype=float) / cfg.populations
    R_mat = (frac * gammas)[None, :] * cfg.m.T
    R_a = R_mat.sum(axis=1)
    w = np.asarray(infected_weights, dtype=float)
    R = float(np.dot(w, R_a) / w.sum()) if w.sum() > 0 else float("nan")
    return R_mat, R_a, R


def reproduction_numbers_batch(gammas, susceptibles, cfg: EpidemicConfig, infected_weights):
    """Row-wise reproduction_numbers for (M, A) inputs; returns (M, A, A), (M, A), (M,)."""
    frac = np.asarray(susceptibles, dtype=float) / cfg.populations
    R_mat = (frac * np.asarray(gammas, dtype=float))[:, None, :] * cfg.m.T[None, :, :]
    R_a = R_mat.sum(axis=2)
    w = np.asarray(infected_weights, dtype=float)
    tot = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        R = np.where(tot > 0, (w * R_a).sum(axis=1) / tot, np.nan)
    return R_mat, R_a, R


def mcse(variances, n_particles: int) -> float:
    """Mean over intervals of sqrt(var / N)."""
    variances = np.asarray(variances, dtype=float)
    return float(np.mean(np.sqrt(variances / n_particles)))


def pae(reference, candidate) -> float:
    """sum |A_i - U_i| / sum A_i."""
    A = np.asarray(reference, dtype=float)
    U = np.asarray(candidate, dtype=float)
    if A.shape != U.shape:
        raise ValueError("series must have equal length")
    total = A.sum()
    if total == 0:
        raise UndefinedMetricError("reference series sums to zero")
    return float(np.abs(A - U).sum() / total)


def intensity_curve(events: Sequence[MarkedEvent], gammas, cfg: EpidemicConfig, grid_times) -> np.ndarray:
    """lambda(t, a) on ``grid_times`` for one event history (seeds included in ``events``).

    ``gammas`` is (k, A); S_{t,a} is the initial count minus infections in [T_0, t).
    """
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    t_ev = np.array([e.time for e in events], dtype=float)
    a_ev = np.array([e.age for e in events], dtype=np.int64)
    grid_times = np.asarray(grid_times, dtype=float)
    A = cfg.n_groups
    out = np.zeros((len(grid_times), A))
    idx = interval_indices(grid_times, cfg.grid)
    for p, t in enumerate(grid_times):
        before = t_ev < t
        hv = density(cfg.gi_kernel, t - t_ev[before])
        pressure = np.bincount(a_ev[before], weights=hv, minlength=A)  # by infector group
        infected = np.bincount(a_ev[before & (t_ev >= cfg.grid.t0)], minlength=A)
        S = cfg.initial_susceptibles - infected
        gam = gammas[min(max(idx[p], 1), len(gammas)) - 1]
        out[p] = S / cfg.populations * gam * (cfg.m @ pressure)
    return out


def intensity_batch(owner, times, ages, n_draws: int, gammas, s_start, counts_before, cfg: EpidemicConfig,
                    grid_times, seed_times=None, seed_ages=None) -> np.ndarray:
    """lambda(t, a) for many histories at once.

    ``owner`` maps each event to a draw; ``s_start`` (M, A) is S at the start of
    the interval holding the grid and ``counts_before`` (M, P, A) the infections
    of that interval before each grid time. Returns (M, P, A).
    """
    A = cfg.n_groups
    P = len(grid_times)
    grid_times = np.asarray(grid_times, dtype=float)
    pressure = np.zeros((n_draws, P, A))
    if len(times):
        lag = grid_times[None, :] - np.asarray(times)[:, None]
        hv = np.where(lag > 0, density(cfg.gi_kernel, np.maximum(lag, 0.0)), 0.0)
        key = np.asarray(owner) * A + np.asarray(ages)
        for p in range(P):
            pressure[:, p, :] = np.bincount(key, weights=hv[:, p], minlength=n_draws * A).reshape(n_draws, A)
    if seed_times is not None and len(seed_times):
        lag = grid_times[None, :] - np.asarray(seed_times)[:, None]
        hv = np.where(lag > 0, density(cfg.gi_kernel, np.maximum(lag, 0.0)), 0.0)
        for p in range(P):
            pressure[:, p, :] += np.bincount(seed_ages, weights=hv[:, p], minlength=A)
    S = np.asarray(s_start, dtype=float)[:, None, :] - counts_before
    force = pressure @ cfg.m.T
    return S / cfg.populations * np.asarray(gammas)[:, None, :] * force
