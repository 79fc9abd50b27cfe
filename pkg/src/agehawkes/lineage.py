"""Who infected whom: directed link counts between age groups.

Method A tallies stored parent references. Method B forgets the parents and
re-samples each infector from the events of the preceding eta intervals (and
the current one), with probability proportional to h(t_j - t_i) m[a_j, a_i].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import EpidemicConfig, MarkedEvent, interval_indices
from .kernels import density


class LineageIntegrityError(ValueError):
    pass


class OrphanEventError(ValueError):
    pass


@dataclass
class LinkCountMatrix:
    """counts[i, j] = infections in group j caused by an infector in group i."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("link counts must be a square matrix")
        if np.any(self.counts < 0):
            raise ValueError("link counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def infectors(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def infectees(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        A = self.counts.shape[0]
        labels = [str(a) for a in range(A)] if labels is None else list(labels)
        return {f"{labels[i]}->{labels[j]}": int(self.counts[i, j]) for i in range(A) for j in range(A)}


def links_method_a(events: Sequence[MarkedEvent], n_groups: int, seeds: Sequence[MarkedEvent] = ()) -> LinkCountMatrix:
    """Tally (parent age -> child age) over the non-seed events.

    Every parent must itself be among ``events`` or ``seeds``.
    """
    known = {id(e) for e in events} | {id(e) for e in seeds}
    out = np.zeros((n_groups, n_groups), dtype=np.int64)
    for e in events:
        if e.parent is None:
            continue
        if id(e.parent) not in known:
            raise LineageIntegrityError(f"event at t={e.time} refers to a parent outside the event log")
        out[e.parent.age, e.age] += 1
    return LinkCountMatrix(out)


def links_from_arrays(ages, parent_ids, n_groups: int, ids=None) -> LinkCountMatrix:
    """Method A on flat arrays. ``parent_ids`` holds -1 for seeds; other values are event ids."""
    ages = np.asarray(ages, dtype=np.int64)
    parent_ids = np.asarray(parent_ids, dtype=np.int64)
    ids = np.arange(len(ages)) if ids is None else np.asarray(ids, dtype=np.int64)
    child = parent_ids >= 0
    out = np.zeros((n_groups, n_groups), dtype=np.int64)
    if not child.any():
        return LinkCountMatrix(out)
    order = np.argsort(ids)
    pos = np.minimum(np.searchsorted(ids, parent_ids[child], sorter=order), len(ids) - 1)
    parent = order[pos]
    if np.any(ids[parent] != parent_ids[child]):
        raise LineageIntegrityError("some parent ids do not match any event")
    np.add.at(out, (ages[parent], ages[child]), 1)
    return LinkCountMatrix(out)


def links_from_history(hist: dict, n_groups: int, n_seeds: int) -> LinkCountMatrix:
    """Method A on a particle history (see ParticlePopulation.history)."""
    interval = np.asarray(hist["interval"], dtype=np.int64)
    p_int = np.asarray(hist["parent_interval"], dtype=np.int64)
    p_pos = np.asarray(hist["parent_pos"], dtype=np.int64)
    sizes = np.bincount(interval, minlength=int(interval.max(initial=0)) + 1)
    sizes[0] = n_seeds
    ok = (p_int >= 0) & (p_int <= interval) & (p_int < len(sizes))
    ok &= p_pos < np.where(ok, sizes[np.minimum(p_int, len(sizes) - 1)], 0)
    ok &= p_pos >= 0
    if not np.all(ok):
        raise LineageIntegrityError(f"{int((~ok).sum())} events have dangling parent references")
    out = np.zeros((n_groups, n_groups), dtype=np.int64)
    np.add.at(out, (np.asarray(hist["parent_age"], dtype=np.int64), np.asarray(hist["age"], dtype=np.int64)), 1)
    return LinkCountMatrix(out)


def parent_probabilities(t_j: float, a_j: int, cand_times, cand_ages, cfg: EpidemicConfig) -> np.ndarray:
    """pi_i proportional to h(t_j - t_i) m[a_j, a_i] over the candidate set."""
    cand_times = np.asarray(cand_times, dtype=float)
    cand_ages = np.asarray(cand_ages, dtype=np.int64)
    if cand_times.size == 0:
        raise OrphanEventError(f"event at t={t_j} has no candidate parents")
    lag = t_j - cand_times
    w = np.where(lag > 0, density(cfg.gi_kernel, np.maximum(lag, 0.0)), 0.0) * cfg.m[a_j, cand_ages]
    total = w.sum()
    if not total > 0:
        raise OrphanEventError(f"event at t={t_j} has no candidate parent with positive weight")
    return w / total


def candidate_window(times, cfg: EpidemicConfig) -> np.ndarray:
    """Earliest admissible parent time per event: the start of interval J - eta."""
    J = interval_indices(np.asarray(times, dtype=float), cfg.grid)
    return np.array([cfg.grid.window_start(int(j), cfg.eta) for j in J]) if len(J) else np.zeros(0)


@dataclass
class LinkPosterior:
    draws: np.ndarray  # (n_draws, A, A)
    expected: np.ndarray  # (A, A) sum of parent probabilities
    orphans: int

    def quantiles(self, levels=(0.005, 0.5, 0.995)) -> np.ndarray:
        return np.quantile(self.draws, levels, axis=0)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        A = self.expected.shape[0]
        labels = [str(a) for a in range(A)] if labels is None else list(labels)
        lo, med, hi = self.quantiles()
        return {
            f"{labels[i]}->{labels[j]}": {
                "median": float(med[i, j]), "lo99": float(lo[i, j]), "hi99": float(hi[i, j]),
                "mean": float(self.draws[:, i, j].mean()), "expected": float(self.expected[i, j]),
            }
            for i in range(A) for j in range(A)
        }


def links_method_b(times, ages, is_seed, cfg: EpidemicConfig, n_draws: int, rng: np.random.Generator,
                   chunk: int = 2_000_000) -> LinkPosterior:
    """Sample a parent for every non-seed event and tally links, ``n_draws`` times.

    Candidates of an event are all earlier events (seeds included) from the
    start of interval J - eta, J being the event's interval. Events without any
    admissible candidate are skipped and counted in ``orphans``.
    """
    times = np.asarray(times, dtype=float)
    ages = np.asarray(ages, dtype=np.int64)
    is_seed = np.asarray(is_seed, dtype=bool)
    A = cfg.n_groups
    order = np.argsort(times, kind="stable")
    t, a, seed = times[order], ages[order], is_seed[order]
    draws = np.zeros((n_draws, A, A), dtype=np.int64)
    expected = np.zeros((A, A))
    orphans = 0
    children = np.flatnonzero(~seed)
    if children.size == 0:
        return LinkPosterior(draws, expected, 0)
    start = np.searchsorted(t, candidate_window(t[children], cfg), side="left")
    stop = np.searchsorted(t, t[children], side="left")  # strictly earlier events
    lens = np.maximum(stop - start, 0)
    pos = 0
    while pos < children.size:
        # group children so that each chunk holds at most ``chunk`` candidate pairs
        end = pos + max(1, int(np.searchsorted(np.cumsum(lens[pos:]), chunk, side="right")))
        c = children[pos:end]
        L = lens[pos:end]
        owner = np.repeat(np.arange(len(c)), L)
        cand = np.repeat(start[pos:end] - np.r_[0, np.cumsum(L)[:-1]], L) + np.arange(L.sum())
        lag = t[c][owner] - t[cand]
        w = density(cfg.gi_kernel, lag) * cfg.m[a[c][owner], a[cand]]
        tot = np.bincount(owner, weights=w, minlength=len(c))
        good = tot > 0
        orphans += int((~good).sum())
        pi = w / np.where(good, tot, 1.0)[owner]
        np.add.at(expected, (a[cand], a[c][owner]), pi)
        cum = np.cumsum(w)
        base = np.r_[0.0, cum][np.r_[0, np.cumsum(L)][:-1]]
        ends = np.r_[0, np.cumsum(L)]
        for d in range(n_draws):
            u = base[good] + rng.random(good.sum()) * tot[good]
            hit = np.searchsorted(cum, u, side="right")
            hit = np.clip(hit, ends[:-1][good], ends[1:][good] - 1)
            np.add.at(draws[d], (a[cand[hit]], a[c[good]]), 1)
        pos = end
    return LinkPosterior(draws, expected, orphans)


def links_method_b_events(events: Sequence[MarkedEvent], cfg: EpidemicConfig, n_draws: int,
                          rng: np.random.Generator) -> LinkPosterior:
    """Method B on MarkedEvents; events with parent None are treated as seeds."""
    return links_method_b([e.time for e in events], [e.age for e in events],
                          [e.parent is None for e in events], cfg, n_draws, rng)
