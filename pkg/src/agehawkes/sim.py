"""Branching-structure simulation of latent infections, one interval at a time.

Two samplers live here. ``simulate_interval`` is the event-by-event FIFO queue
sampler for a single replicate. ``simulate_interval_batch`` runs many
independent replicates (particles) at once, one offspring generation at a time;
the particle filter uses it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import EpidemicConfig, MarkedEvent, SeedHistory, SusceptibleLedger
from .kernels import interval_mass, mass_between, sample_truncated, sample_truncated_many
from .obs import ObservedSeries, reporting_contributions, sample_observed


@dataclass
class IntervalSample:
    events: list
    counts_by_age: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.events], dtype=float)

    @property
    def ages(self) -> np.ndarray:
        return np.array([e.age for e in self.events], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.events)


def _bounds(cfg: EpidemicConfig, n: int) -> tuple[float, float]:
    if n <= cfg.k:
        return cfg.grid.bounds(n)
    return cfg.grid.extended(n - cfg.k).bounds(n)


def offspring_rate(parent: MarkedEvent, gammas, ledger: SusceptibleLedger, cfg: EpidemicConfig, n: int) -> float:
    """Expected number of offspring of ``parent`` inside interval n."""
    lo, hi = _bounds(cfg, n)
    if parent.time >= hi:
        return 0.0
    weight = float(np.sum(np.asarray(gammas) * ledger.fraction() * cfg.m[:, parent.age]))
    if weight <= 0:
        return 0.0
    start = max(parent.time, lo)
    return weight * interval_mass(cfg.gi_kernel, start - parent.time, hi - parent.time)


def sample_offspring_ages(parent_age: int, ledger: SusceptibleLedger, cfg: EpidemicConfig) -> Optional[np.ndarray]:
    """Categorical law of an offspring's age group; None when nobody is left to infect."""
    w = ledger.fraction() * cfg.m[:, parent_age]
    total = w.sum()
    if total <= 0:
        return None
    return w / total


def simulate_interval(
    history: Sequence[MarkedEvent],
    gammas,
    ledger: SusceptibleLedger,
    cfg: EpidemicConfig,
    n: int,
    rng: np.random.Generator,
) -> IntervalSample:
    """Sample the latent infections falling in interval n (FIFO queue, Algorithm-1 style).

    ``history`` holds the seeds and the events of the preceding eta intervals.
    The ledger is decremented as each infection is created.
    """
    lo, hi = _bounds(cfg, n)
    A = cfg.n_groups
    queue = deque(e for e in history if e.time < hi)
    out = []
    while queue:
        parent = queue.popleft()
        lam = offspring_rate(parent, gammas, ledger, cfg, n)
        if lam <= 0:
            continue
        n_off = rng.poisson(lam)
        if n_off == 0:
            continue
        probs = sample_offspring_ages(parent.age, ledger, cfg)
        if probs is None:
            continue
        start = max(parent.time, lo)
        offsets = sample_truncated(cfg.gi_kernel, start - parent.time, hi - parent.time, rng, size=n_off)
        ages = rng.choice(A, size=n_off, p=probs)
        for dt, a in zip(offsets, ages):
            if not ledger.available(a):
                continue
            t = parent.time + float(dt)
            ledger.decrement(int(a), t)
            ev = MarkedEvent(t, int(a), parent)
            out.append(ev)
            queue.append(ev)
    out.sort(key=lambda e: e.time)
    counts = np.bincount([e.age for e in out], minlength=A).astype(np.int64)
    return IntervalSample(out, counts)


# ---------------------------------------------------------------- batch sampler


@dataclass
class ParentBatch:
    """Flat parent list for many particles; ``mass`` is each parent's h-mass inside the interval."""

    pid: np.ndarray
    time: np.ndarray
    age: np.ndarray
    mass: np.ndarray
    ref_interval: np.ndarray
    ref_pos: np.ndarray

    @classmethod
    def empty(cls) -> "ParentBatch":
        z = np.zeros(0)
        zi = np.zeros(0, dtype=np.int64)
        return cls(zi, z, zi, z, zi, zi)

    @staticmethod
    def concat(batches: Sequence["ParentBatch"]) -> "ParentBatch":
        batches = [b for b in batches if len(b.pid)]
        if not batches:
            return ParentBatch.empty()
        return ParentBatch(*(np.concatenate([getattr(b, f) for b in batches]) for f in
                             ("pid", "time", "age", "mass", "ref_interval", "ref_pos")))


@dataclass
class BatchSample:
    """Events of one interval for N particles, grouped by particle and time-sorted."""

    offsets: np.ndarray
    time: np.ndarray
    age: np.ndarray
    parent_interval: np.ndarray
    parent_pos: np.ndarray
    parent_age: np.ndarray
    counts: np.ndarray
    s_end: np.ndarray

    @property
    def pid(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.offsets) - 1), np.diff(self.offsets))


def _clamp_to_susceptibles(key, remaining, rng):
    """Keep at most remaining[key] children per (particle, age) key, dropping at random."""
    M = len(key)
    perm = rng.permutation(M)
    order = perm[np.argsort(key[perm], kind="stable")]
    ks = key[order]
    starts = np.r_[0, np.flatnonzero(np.diff(ks)) + 1]
    rank = np.arange(M) - np.repeat(starts, np.diff(np.r_[starts, M]))
    keep = np.zeros(M, dtype=bool)
    keep[order[rank < remaining[ks]]] = True
    return keep


def simulate_interval_batch(
    parents: ParentBatch,
    gammas: np.ndarray,
    s_start: np.ndarray,
    cfg: EpidemicConfig,
    n: int,
    rng: np.random.Generator,
) -> BatchSample:
    """Sample interval n for every particle at once, generation by generation.

    Rates of a generation use the susceptibles left after the previous
    generation; children beyond the remaining susceptibles of a group are
    dropped at random.
    """
    N, A = s_start.shape
    lo, hi = _bounds(cfg, n)
    h = cfg.gi_kernel
    m = cfg.m
    pops = cfg.populations
    S = s_start.astype(np.int64).copy()

    pid, ptime, page, pmass = parents.pid, parents.time, parents.age, parents.mass
    p_int, p_pos = parents.ref_interval, parents.ref_pos
    p_global = None  # output index of in-interval parents
    chunks = []
    n_out = 0
    while len(pid):
        frac = S / pops
        colfac = (gammas * frac) @ m
        lam = colfac[pid, page] * pmass
        cnt = rng.poisson(lam)
        total = int(cnt.sum())
        if total == 0:
            break
        src = np.repeat(np.arange(len(pid)), cnt)
        cpid = pid[src]
        tp = ptime[src]
        start = np.maximum(tp, lo)
        ctime = tp + sample_truncated_many(h, start - tp, hi - tp, rng)
        cum = np.cumsum(frac[cpid] * m[:, page[src]].T, axis=1)
        u = rng.random(total) * cum[:, -1]
        cage = np.minimum((cum < u[:, None]).sum(axis=1), A - 1)
        key = cpid * A + cage
        wanted = np.bincount(key, minlength=N * A)
        if np.any(wanted > S.ravel()):
            keep = _clamp_to_susceptibles(key, S.ravel(), rng)
            src, cpid, ctime, cage, key = src[keep], cpid[keep], ctime[keep], cage[keep], key[keep]
        S -= np.bincount(key, minlength=N * A).reshape(N, A)
        M = len(cpid)
        if M == 0:
            break
        if p_global is None:
            c_int, c_pos, c_local = p_int[src], p_pos[src], np.zeros(M, dtype=bool)
        else:
            c_int = np.full(M, n, dtype=np.int64)
            c_pos = p_global[src]
            c_local = np.ones(M, dtype=bool)
        chunks.append((cpid, ctime, cage, c_int, c_pos, c_local, page[src]))
        p_global = n_out + np.arange(M)
        n_out += M
        pid, ptime, page = cpid, ctime, cage
        pmass = mass_between(h, 0.0, hi - ctime)

    if not chunks:
        z = np.zeros(0)
        zi = np.zeros(0, dtype=np.int64)
        return BatchSample(np.zeros(N + 1, dtype=np.int64), z, zi, zi, zi, zi,
                           np.zeros((N, A), dtype=np.int64), S)

    cpid, ctime, cage, c_int, c_pos, c_local, c_page = (np.concatenate(x) for x in zip(*chunks))
    order = np.lexsort((ctime, cpid))
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    offsets = np.r_[0, np.cumsum(np.bincount(cpid, minlength=N))].astype(np.int64)
    c_pos = c_pos.copy()
    # in-interval parents: global output index -> position within the particle's list
    c_pos[c_local] = inv[c_pos[c_local]] - offsets[cpid[c_local]]
    counts = np.bincount(cpid * A + cage, minlength=N * A).reshape(N, A)
    return BatchSample(
        offsets,
        ctime[order],
        cage[order],
        c_int[order],
        c_pos[order],
        c_page[order],
        counts,
        S,
    )


def seed_parents(cfg: EpidemicConfig, seeds: SeedHistory, n: int, n_particles: int, min_mass: float = 0.0) -> ParentBatch:
    """Seeds replicated for every particle with their h-mass inside interval n."""
    if len(seeds) == 0:
        return ParentBatch.empty()
    lo, hi = _bounds(cfg, n)
    t = seeds.times
    mass = mass_between(cfg.gi_kernel, lo - t, hi - t)
    keep = np.flatnonzero(mass > min_mass)
    if keep.size == 0:
        return ParentBatch.empty()
    S = keep.size
    return ParentBatch(
        np.repeat(np.arange(n_particles), S),
        np.tile(t[keep], n_particles),
        np.tile(seeds.ages[keep], n_particles),
        np.tile(mass[keep], n_particles),
        np.zeros(S * n_particles, dtype=np.int64),
        np.tile(keep, n_particles),
    )


# ---------------------------------------------------------------- synthetic data


class SyntheticData(NamedTuple):
    latent: list
    observed: ObservedSeries
    mu: np.ndarray
    susceptibles: np.ndarray
    gammas: np.ndarray
    seeds: SeedHistory
    v: float


def all_events(data: SyntheticData) -> list:
    return list(data.seeds.events) + [e for s in data.latent for e in s.events]


def generate_synthetic(
    cfg: EpidemicConfig,
    gammas_truth,
    seeds: SeedHistory,
    v: float,
    rng: np.random.Generator,
) -> SyntheticData:
    """Simulate latent infections over intervals 1..k and reported counts Y ~ NB(mu, v).

    ``susceptibles`` has k+1 rows: S at T_0, ..., T_k.
    """
    gammas_truth = np.asarray(gammas_truth, dtype=float)
    if gammas_truth.shape != (cfg.k, cfg.n_groups):
        raise ValueError(f"truth gammas must be ({cfg.k}, {cfg.n_groups})")
    if np.any(gammas_truth < 0):
        raise ValueError("truth gammas must be non-negative")
    seeds.validate(cfg.grid.t0, cfg.n_groups)
    ledger = SusceptibleLedger.from_config(cfg)
    latent = []
    sus = [ledger.counts.copy()]
    for n in range(1, cfg.k + 1):
        recent = [e for s in latent[max(0, n - 1 - cfg.eta):] for e in s.events]
        sample = simulate_interval(list(seeds.events) + recent, gammas_truth[n - 1], ledger, cfg, n, rng)
        latent.append(sample)
        sus.append(ledger.counts.copy())
    times = np.concatenate([seeds.times] + [s.times for s in latent])
    ages = np.concatenate([seeds.ages] + [s.ages for s in latent])
    mu = reporting_contributions(cfg, times, ages)
    y = sample_observed(mu, v, rng)
    return SyntheticData(latent, ObservedSeries(y), mu, np.array(sus), gammas_truth, seeds, float(v))
