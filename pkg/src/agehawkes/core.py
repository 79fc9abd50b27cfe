"""Shared domain types: age structure, contact matrix, interval grid, events, config."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .kernels import KernelSpec


class OutOfRangeError(ValueError):
    pass


class InvalidPartitionError(ValueError):
    pass


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AgeStructure:
    labels: tuple
    populations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        pops = _frozen(self.populations, float)
        object.__setattr__(self, "populations", pops)
        if len(self.labels) < 1 or len(self.labels) != len(pops):
            raise ValueError("need one population per age label")
        if np.any(pops <= 0):
            raise ValueError("populations must be positive")

    @property
    def n_groups(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ContactMatrix:
    """Row a, column a': average daily contacts of a person in a with people in a'."""

    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries, float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"contact matrix must be square, got shape {m.shape}")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("contact matrix entries must be finite and non-negative")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class IntervalGrid:
    boundaries: np.ndarray

    def __post_init__(self):
        b = _frozen(self.boundaries, float)
        if b.ndim != 1 or len(b) < 2:
            raise ValueError("grid needs at least two boundaries")
        if np.any(np.diff(b) <= 0):
            raise ValueError("grid boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def uniform(cls, t0: float, width: float, k: int) -> "IntervalGrid":
        return cls(t0 + width * np.arange(k + 1))

    @property
    def t0(self) -> float:
        return float(self.boundaries[0])

    @property
    def k(self) -> int:
        return len(self.boundaries) - 1

    def bounds(self, n: int) -> tuple[float, float]:
        """Return (T_{n-1}, T_n) for the 1-based interval n."""
        return float(self.boundaries[n - 1]), float(self.boundaries[n])

    @property
    def last_width(self) -> float:
        return float(self.boundaries[-1] - self.boundaries[-2])

    def extended(self, extra: int = 1) -> "IntervalGrid":
        w = self.last_width
        tail = self.boundaries[-1] + w * np.arange(1, extra + 1)
        return IntervalGrid(np.concatenate([self.boundaries, tail]))

    def window_start(self, n: int, eta: int) -> float:
        """Start of interval n - eta, extrapolated below T_0 with the first width."""
        j = n - eta - 1
        if j >= 0:
            return float(self.boundaries[j])
        w0 = float(self.boundaries[1] - self.boundaries[0])
        return self.t0 + j * w0


def interval_index(t: float, grid: IntervalGrid) -> int:
    """1-based index j with t in [T_{j-1}, T_j)."""
    b = grid.boundaries
    if not (b[0] <= t < b[-1]):
        raise OutOfRangeError(f"time {t} outside [{b[0]}, {b[-1]})")
    return int(np.searchsorted(b, t, side="right"))


def interval_indices(times, grid: IntervalGrid) -> np.ndarray:
    """Vectorised interval_index; times before T_0 map to <= 0 using the first width."""
    times = np.asarray(times, dtype=float)
    b = grid.boundaries
    idx = np.searchsorted(b, times, side="right").astype(np.int64)
    early = times < b[0]
    if np.any(early):
        w0 = b[1] - b[0]
        idx[early] = np.floor((times[early] - b[0]) / w0).astype(np.int64) + 1
    return idx


def coarsen_contact_matrix(fine: ContactMatrix, fine_pops, grouping: Sequence[Sequence[int]]) -> ContactMatrix:
    """Merge age bands: population-weighted average over contactor rows, sum over contactee columns."""
    m = np.asarray(fine.entries)
    pops = np.asarray(fine_pops, dtype=float)
    if len(pops) != m.shape[0]:
        raise ValueError("fine_pops must align with the fine bands")
    flat = [i for g in grouping for i in g]
    if any(len(g) == 0 for g in grouping):
        raise InvalidPartitionError("empty coarse group")
    if sorted(flat) != list(range(m.shape[0])):
        raise InvalidPartitionError(f"grouping is not a partition of 0..{m.shape[0] - 1}")
    out = np.zeros((len(grouping), len(grouping)))
    for A, rows in enumerate(grouping):
        rows = list(rows)
        w = pops[rows] / pops[rows].sum()
        for B, cols in enumerate(grouping):
            out[A, B] = w @ m[np.ix_(rows, list(cols))].sum(axis=1)
    return ContactMatrix(out)


@dataclass(frozen=True, eq=False)
class MarkedEvent:
    time: float
    age: int
    parent: Optional["MarkedEvent"] = None

    @property
    def is_seed(self) -> bool:
        return self.parent is None


@dataclass(frozen=True)
class SeedHistory:
    events: tuple

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if any(e.parent is not None for e in self.events):
            raise ValueError("seed events cannot have parents")

    @classmethod
    def from_arrays(cls, times, ages) -> "SeedHistory":
        return cls(tuple(MarkedEvent(float(t), int(a)) for t, a in zip(times, ages)))

    def validate(self, t0: float, n_groups: int) -> None:
        for e in self.events:
            if not e.time < t0:
                raise ValueError(f"seed at {e.time} is not before T_0={t0}")
            if not 0 <= e.age < n_groups:
                raise ValueError(f"seed age {e.age} out of range")

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.events], dtype=float)

    @property
    def ages(self) -> np.ndarray:
        return np.array([e.age for e in self.events], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class EpidemicConfig:
    ages: AgeStructure
    contacts: ContactMatrix
    grid: IntervalGrid
    beta: float
    gi_kernel: KernelSpec
    obs_kernel: KernelSpec
    initial_susceptibles: np.ndarray
    eta: int = 3
    gamma_prior: tuple = (0.0, 0.5)
    d_bounds: tuple = (10.0, 20.0)
    v_bounds: tuple = (1e-4, 0.5)
    # include pre-T_0 seed infections in expected reported counts
    seeds_in_mu: bool = True
    start_date: Optional[str] = None

    def __post_init__(self):
        s0 = _frozen(self.initial_susceptibles, np.int64)
        object.__setattr__(self, "initial_susceptibles", s0)
        A = self.ages.n_groups
        if self.contacts.dim != A or len(s0) != A:
            raise ValueError("contact matrix and susceptibles must match the number of age groups")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.eta < 1:
            raise ValueError("eta must be a positive integer")
        lo, hi = self.gamma_prior
        if not 0 <= lo < hi:
            raise ValueError("gamma prior needs 0 <= min < max")
        for name, (lo, hi) in (("d_bounds", self.d_bounds), ("v_bounds", self.v_bounds)):
            if not 0 < lo <= hi:
                raise ValueError(f"{name} needs 0 < min <= max")
        if np.any(s0 < 0) or np.any(s0 > self.ages.populations):
            raise ValueError("initial susceptibles must lie in [0, N_a]")

    @property
    def n_groups(self) -> int:
        return self.ages.n_groups

    @property
    def k(self) -> int:
        return self.grid.k

    @property
    def populations(self) -> np.ndarray:
        return self.ages.populations

    @property
    def m(self) -> np.ndarray:
        return self.contacts.entries

    def replace(self, **changes) -> "EpidemicConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def to_dict(self) -> dict:
        b = self.grid.boundaries
        widths = np.diff(b)
        grid = (
            {"t0": float(b[0]), "width": float(widths[0]), "k": self.k}
            if np.allclose(widths, widths[0])
            else {"boundaries": b.tolist()}
        )
        out = {
            "age_bands": list(self.ages.labels),
            "populations": self.populations.tolist(),
            "contact_matrix": self.m.tolist(),
            "beta": self.beta,
            "gi_kernel": {"mean": self.gi_kernel.mean, "sd": self.gi_kernel.sd},
            "obs_kernel": {"mean": self.obs_kernel.mean, "sd": self.obs_kernel.sd},
            "grid": grid,
            "gamma_prior": {"min": self.gamma_prior[0], "max": self.gamma_prior[1]},
            "d_bounds": list(self.d_bounds),
            "v_bounds": list(self.v_bounds),
            "eta": self.eta,
            "initial_susceptibles": self.initial_susceptibles.tolist(),
            "seeds_in_mu": self.seeds_in_mu,
        }
        if self.start_date is not None:
            out["start_date"] = self.start_date
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EpidemicConfig":
        g = d["grid"]
        if "boundaries" in g:
            grid = IntervalGrid(g["boundaries"])
        else:
            grid = IntervalGrid.uniform(float(g["t0"]), float(g["width"]), int(g["k"]))
        gp = d.get("gamma_prior", {"min": 0.0, "max": 0.5})
        if isinstance(gp, dict):
            gp = (gp["min"], gp["max"])
        return cls(
            ages=AgeStructure(d["age_bands"], d["populations"]),
            contacts=ContactMatrix(d["contact_matrix"]),
            grid=grid,
            beta=float(d["beta"]),
            gi_kernel=KernelSpec(**d["gi_kernel"]),
            obs_kernel=KernelSpec(**d["obs_kernel"]),
            initial_susceptibles=d.get("initial_susceptibles", d["populations"]),
            eta=int(d.get("eta", 3)),
            gamma_prior=tuple(float(x) for x in gp),
            d_bounds=tuple(float(x) for x in d.get("d_bounds", (10.0, 20.0))),
            v_bounds=tuple(float(x) for x in d.get("v_bounds", (1e-4, 0.5))),
            seeds_in_mu=bool(d.get("seeds_in_mu", True)),
            start_date=d.get("start_date"),
        )


def load_config(path) -> EpidemicConfig:
    with open(Path(path)) as fh:
        return EpidemicConfig.from_dict(json.load(fh))


@dataclass
class SusceptibleLedger:
    """Running susceptible tally S_{t,a} with an event-ordered depletion log."""

    initial: np.ndarray
    populations: np.ndarray
    counts: np.ndarray = field(init=False)
    log: list = field(init=False, default_factory=list)

    def __post_init__(self):
        self.initial = np.array(self.initial, dtype=np.int64)
        self.populations = np.asarray(self.populations, dtype=float)
        if np.any(self.initial < 0) or np.any(self.initial > self.populations):
            raise ValueError("initial susceptibles must lie in [0, N_a]")
        self.counts = self.initial.copy()

    @classmethod
    def from_config(cls, cfg: EpidemicConfig) -> "SusceptibleLedger":
        return cls(cfg.initial_susceptibles, cfg.populations)

    def fraction(self) -> np.ndarray:
        return self.counts / self.populations

    def available(self, age: int) -> bool:
        return self.counts[age] > 0

    def decrement(self, age: int, time: float) -> None:
        if self.counts[age] <= 0:
            raise ValueError(f"no susceptibles left in group {age}")
        self.counts[age] -= 1
        self.log.append((time, age))

    def replay(self) -> np.ndarray:
        out = self.initial.copy()
        for _, a in self.log:
            out[a] -= 1
        return out

    def copy(self) -> "SusceptibleLedger":
        new = SusceptibleLedger(self.initial, self.populations)
        new.counts = self.counts.copy()
        new.log = list(self.log)
        return new
