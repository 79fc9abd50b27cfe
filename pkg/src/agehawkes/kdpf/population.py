"""Particle population with shared, ancestry-indexed interval histories.

Each interval's sampled events are kept once, grouped in *slots* (one slot per
particle alive when the interval was sampled). ``lineage[m, j]`` is the slot
holding interval m+1 of current particle j. Resampling permutes the lineage
columns instead of copying histories; slots no longer referenced are dropped
by ``compact``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import EpidemicConfig, SeedHistory
from ..kernels import masses_over_boundaries
from ..obs import interval_log_likelihood, reporting_contributions
from ..sim import BatchSample, ParentBatch, seed_parents


_CHUNK = 250_000


def _gather_ranges(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Concatenation of arange(s, s + l) for each (s, l)."""
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    shift = np.repeat(starts - np.r_[0, np.cumsum(lens)[:-1]], lens)
    return shift + np.arange(total)


@dataclass
class IntervalStore:
    n: int
    offsets: np.ndarray
    time: np.ndarray
    age: np.ndarray
    parent_interval: np.ndarray
    parent_pos: np.ndarray
    parent_age: np.ndarray
    gamma: np.ndarray
    s_start: np.ndarray
    counts: np.ndarray
    hmass: Optional[np.ndarray] = None  # h-mass into intervals n+1 .. n+eta

    @property
    def n_slots(self) -> int:
        return len(self.offsets) - 1

    def event_index(self, slots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Flat event indices of the given slots and the owning position in ``slots``."""
        starts = self.offsets[slots]
        lens = self.offsets[slots + 1] - starts
        return _gather_ranges(starts, lens), np.repeat(np.arange(len(slots)), lens)

    def local_pos(self, idx: np.ndarray, owner_slots: np.ndarray) -> np.ndarray:
        return idx - self.offsets[owner_slots]

    def keep_slots(self, keep: np.ndarray) -> None:
        ev, _ = self.event_index(keep)
        lens = self.offsets[keep + 1] - self.offsets[keep]
        self.offsets = np.r_[0, np.cumsum(lens)].astype(np.int64)
        for name in ("time", "age", "parent_interval", "parent_pos", "parent_age"):
            setattr(self, name, getattr(self, name)[ev])
        if self.hmass is not None:
            self.hmass = self.hmass[ev]
        self.gamma = self.gamma[keep]
        self.s_start = self.s_start[keep]
        self.counts = self.counts[keep]

    @property
    def nbytes(self) -> int:
        arrays = [self.offsets, self.time, self.age, self.parent_interval, self.parent_pos,
                  self.parent_age, self.gamma, self.s_start, self.counts]
        if self.hmass is not None:
            arrays.append(self.hmass)
        return sum(a.nbytes for a in arrays)


@dataclass
class ParticleState:
    """One particle viewed on its own (copies, for inspection)."""

    gammas: np.ndarray
    latent_times: list
    latent_ages: list
    susceptibles: np.ndarray
    log_d: float
    log_v: float
    w: float
    g: float
    ancestry: np.ndarray


class ParticlePopulation:
    def __init__(self, cfg: EpidemicConfig, seeds: SeedHistory, n_particles: int):
        self.cfg = cfg
        self.seeds = seeds
        self.N = n_particles
        A, k = cfg.n_groups, cfg.k
        self.n = 0
        self.gamma = np.zeros((n_particles, A))
        self.log_d = np.zeros(n_particles)
        self.log_v = np.zeros(n_particles)
        self.w = np.full(n_particles, 1.0 / n_particles)
        self.g = np.full(n_particles, 1.0 / n_particles)
        self.S = np.tile(cfg.initial_susceptibles, (n_particles, 1)).astype(np.int64)
        # reporting contributions of each particle's own events into intervals 1..k+1
        self.mu_future = np.zeros((n_particles, k + 1, A))
        self.seed_mu = reporting_contributions(cfg, seeds.times, seeds.ages, k + 1) if len(seeds) else np.zeros((k + 1, A))
        self.lineage = np.full((k, n_particles), -1, dtype=np.int64)
        self.stores: list[Optional[IntervalStore]] = [None] * k
        self._boundaries = cfg.grid.extended(cfg.eta + 1).boundaries

    # -------------------------------------------------------------- history
    def parents_for(self, n_next: int) -> ParentBatch:
        """Seeds plus each particle's events of the eta intervals before n_next."""
        cfg = self.cfg
        batches = [seed_parents(cfg, self.seeds, n_next, self.N)]
        for m in range(max(1, n_next - cfg.eta), n_next):
            st = self.stores[m - 1]
            slots = self.lineage[m - 1]
            ev, owner = st.event_index(slots)
            mass = st.hmass[ev, n_next - m - 1]
            nz = mass > 0
            ev, owner, mass = ev[nz], owner[nz], mass[nz]
            batches.append(ParentBatch(
                owner, st.time[ev], st.age[ev], mass,
                np.full(len(ev), m, dtype=np.int64), st.local_pos(ev, slots[owner]),
            ))
        return ParentBatch.concat(batches)

    def sample_mu(self, sample: BatchSample, n: int) -> np.ndarray:
        """Expected reported counts in interval n for each particle given a fresh interval-n sample."""
        cfg = self.cfg
        A = cfg.n_groups
        hi = self._boundaries[n]
        own = cfg.beta * cfg.obs_kernel.cdf(hi - sample.time)
        fresh = np.bincount(sample.pid * A + sample.age, weights=own, minlength=self.N * A).reshape(self.N, A)
        return self.seed_mu[n - 1] + self.mu_future[:, n - 1] + fresh

    def loglik(self, y_n, mu_n, v) -> np.ndarray:
        return interval_log_likelihood(y_n, mu_n, v)

    def append(self, sample: BatchSample, gamma_new: np.ndarray) -> None:
        """Record interval n+1 for every current particle."""
        cfg = self.cfg
        n = self.n + 1
        A, N = cfg.n_groups, self.N
        b = self._boundaries
        pid = sample.pid
        hmass = masses_over_boundaries(cfg.gi_kernel, sample.time, b[n:n + cfg.eta + 1])
        key = pid * A + sample.age
        for lo in range(0, len(key), _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            rep = masses_over_boundaries(cfg.obs_kernel, sample.time[sl], b[n - 1:cfg.k + 2])
            for j in range(rep.shape[1]):
                self.mu_future[:, n - 1 + j] += cfg.beta * np.bincount(
                    key[sl], weights=rep[:, j], minlength=N * A).reshape(N, A)
        self.stores[n - 1] = IntervalStore(
            n, sample.offsets, sample.time, sample.age.astype(np.int16),
            sample.parent_interval.astype(np.int16), sample.parent_pos.astype(np.int32),
            sample.parent_age.astype(np.int16), gamma_new.copy(), self.S.copy(), sample.counts, hmass,
        )
        self.lineage[n - 1] = np.arange(N)
        self.gamma = gamma_new
        self.S = sample.s_end
        self.n = n
        old = n - cfg.eta
        if old >= 1 and self.stores[old - 1] is not None:
            self.stores[old - 1].hmass = None

    def resample(self, idx: np.ndarray) -> None:
        if np.array_equal(idx, np.arange(self.N)):
            return
        self.gamma = self.gamma[idx]
        self.log_d = self.log_d[idx]
        self.log_v = self.log_v[idx]
        self.S = self.S[idx]
        self.mu_future = self.mu_future[idx]
        self.lineage = self.lineage[:, idx]
        self.N = len(idx)

    def compact(self, min_unused: float = 0.5) -> None:
        """Drop slots no longer referenced by any particle."""
        for m in range(self.n):
            st = self.stores[m]
            if st is None:
                continue
            used = np.unique(self.lineage[m])
            if len(used) > (1.0 - min_unused) * st.n_slots:
                continue
            remap = np.full(st.n_slots, -1, dtype=np.int64)
            remap[used] = np.arange(len(used))
            st.keep_slots(used)
            self.lineage[m] = remap[self.lineage[m]]

    @property
    def nbytes(self) -> int:
        return sum(s.nbytes for s in self.stores if s is not None)

    # -------------------------------------------------------------- views
    def gather(self, m: int, particles: np.ndarray):
        """Interval-m events of the given particles: (owner index, time, age, local pos)."""
        st = self.stores[m - 1]
        slots = self.lineage[m - 1, particles]
        ev, owner = st.event_index(slots)
        return owner, st.time[ev], st.age[ev].astype(np.int64), ev

    def history(self, j: int) -> dict:
        """Full event history of particle j as flat arrays (intervals 1..n)."""
        parts = {k: [] for k in ("time", "age", "interval", "pos", "parent_interval", "parent_pos", "parent_age")}
        for m in range(1, self.n + 1):
            st = self.stores[m - 1]
            s = self.lineage[m - 1, j]
            sl = slice(st.offsets[s], st.offsets[s + 1])
            cnt = st.offsets[s + 1] - st.offsets[s]
            parts["time"].append(st.time[sl])
            parts["age"].append(st.age[sl].astype(np.int64))
            parts["interval"].append(np.full(cnt, m))
            parts["pos"].append(np.arange(cnt))
            parts["parent_interval"].append(st.parent_interval[sl].astype(np.int64))
            parts["parent_pos"].append(st.parent_pos[sl].astype(np.int64))
            parts["parent_age"].append(st.parent_age[sl].astype(np.int64))
        return {k: (np.concatenate(v) if v else np.zeros(0)) for k, v in parts.items()}

    def state(self, j: int) -> ParticleState:
        h = self.history(j)
        times = [h["time"][h["interval"] == m] for m in range(1, self.n + 1)]
        ages = [h["age"][h["interval"] == m] for m in range(1, self.n + 1)]
        gam = np.array([self.stores[m].gamma[self.lineage[m, j]] for m in range(self.n)])
        return ParticleState(gam, times, ages, self.S[j].copy(), float(self.log_d[j]), float(self.log_v[j]),
                             float(self.w[j]), float(self.g[j]), self.lineage[: self.n, j].copy())
