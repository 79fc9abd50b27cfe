"""Data ingestion, initialisation heuristics and file writers."""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import EpidemicConfig, IntervalGrid, SeedHistory, interval_indices
from .obs import ObservedSeries


class BandMappingError(ValueError):
    pass


class DateGapError(ValueError):
    pass


class InsufficientHistoryError(ValueError):
    pass


@dataclass
class DailySeries:
    """Daily counts per model age group; row 0 is ``first_date``."""

    first_date: Optional[dt.date]
    counts: np.ndarray  # (days, A)

    @property
    def n_days(self) -> int:
        return self.counts.shape[0]

    def dates(self) -> list:
        if self.first_date is None:
            return []
        return [self.first_date + dt.timedelta(days=i) for i in range(self.n_days)]

    def relative(self, start_date: dt.date) -> tuple[int, np.ndarray]:
        """(offset of row 0 in days from ``start_date``, counts)."""
        if self.first_date is None:
            return 0, self.counts
        return (self.first_date - start_date).days, self.counts


def _parse_date(s: str) -> dt.date:
    return dt.date.fromisoformat(s.strip())


def ingest_cases(path, band_mapping: Mapping[str, int], grid: IntervalGrid, start_date,
                 n_groups: Optional[int] = None) -> tuple[ObservedSeries, DailySeries]:
    """Aggregate a ``date,age_band,count`` CSV onto the interval grid.

    ``start_date`` is the calendar date of time T_0. Days outside [T_0, T_k)
    are kept in the returned daily series (they feed the seed heuristic) but do
    not enter the observed series.
    """
    start_date = _parse_date(start_date) if isinstance(start_date, str) else start_date
    A = n_groups if n_groups is not None else max(band_mapping.values(), default=-1) + 1
    rows = []
    unknown = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"date", "age_band", "count"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"case file lacks columns {sorted(missing)}")
        for r in reader:
            band = r["age_band"].strip()
            if band not in band_mapping:
                unknown.add(band)
                continue
            count = int(r["count"])
            if count < 0:
                raise ValueError(f"negative count on {r['date']}")
            rows.append((_parse_date(r["date"]), band_mapping[band], count))
    if unknown:
        raise BandMappingError(f"unmapped age bands: {', '.join(sorted(unknown))}")

    Y = np.zeros((grid.k, A), dtype=np.int64)
    if not rows:
        return ObservedSeries(Y), DailySeries(None, np.zeros((0, A), dtype=np.int64))
    dates = sorted({r[0] for r in rows})
    first, last = dates[0], dates[-1]
    n_days = (last - first).days + 1
    if len(dates) != n_days:
        present = set(dates)
        gaps = [str(first + dt.timedelta(days=i)) for i in range(n_days)
                if first + dt.timedelta(days=i) not in present]
        raise DateGapError(f"missing dates: {', '.join(gaps[:10])}" + (" ..." if len(gaps) > 10 else ""))
    daily = np.zeros((n_days, A), dtype=np.int64)
    for d, a, c in rows:
        daily[(d - first).days, a] += c
    offset = (first - start_date).days
    t = grid.t0 + offset + np.arange(n_days, dtype=float)
    idx = interval_indices(t, grid)
    inside = (idx >= 1) & (idx <= grid.k)
    for a in range(A):
        Y[:, a] = np.bincount(idx[inside] - 1, weights=daily[inside, a], minlength=grid.k).astype(np.int64)
    return ObservedSeries(Y), DailySeries(first, daily)


def write_cases(path, daily: DailySeries, labels: Sequence[str]) -> None:
    """Write a daily series as ``date,age_band,count`` rows (one per day and group)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "age_band", "count"])
        for d, row in zip(daily.dates(), daily.counts):
            for a, c in enumerate(row):
                w.writerow([d.isoformat(), labels[a], int(c)])


def _spread(n: int, lo: float, width: float, rng: Optional[np.random.Generator]) -> np.ndarray:
    if rng is None:
        return lo + (np.arange(n) + 0.5) * width / n
    return np.sort(lo + rng.random(n) * width)


def init_seed_history(daily_counts, beta: float, t0: float, first_day: int = -14, lookback: int = 21,
                      delay: int = 7, rng: Optional[np.random.Generator] = None) -> SeedHistory:
    """Seeds from daily reports: day -i receives round(count(day -i + delay) / beta) events per age.

    ``daily_counts`` is (days, A) with row 0 being day ``first_day`` relative to
    the day starting at T_0. Events are evenly spaced within their day unless
    ``rng`` is given (random placement). Rounding is half-to-even.
    """
    daily = np.asarray(daily_counts, dtype=float)
    if daily.ndim != 2:
        raise ValueError("daily counts must be a (days, A) matrix")
    needed = [-i + delay for i in range(1, lookback + 1)]
    rows = [d - first_day for d in needed]
    missing = [d for d, r in zip(needed, rows) if not 0 <= r < daily.shape[0]]
    if missing:
        raise InsufficientHistoryError(f"daily counts missing for days {sorted(missing)} relative to T_0")
    times, ages = [], []
    for i, r in zip(range(1, lookback + 1), rows):
        for a in range(daily.shape[1]):
            n = int(np.round(daily[r, a] / beta))
            if n > 0:
                times.append(_spread(n, t0 - i, 1.0, rng))
                ages.append(np.full(n, a))
    if not times:
        return SeedHistory(())
    t = np.concatenate(times)
    a = np.concatenate(ages)
    order = np.argsort(t, kind="stable")
    return SeedHistory.from_arrays(t[order], a[order])


def init_seed_history_weekly(weekly_counts, beta: float, t0: float, width: float = 7.0, n_weeks: int = 3,
                             rng: Optional[np.random.Generator] = None) -> SeedHistory:
    """Seeds from weekly reports of weeks -(n_weeks-2)..1 (rows in that order).

    Week i (for -(n_weeks-1) <= i <= 0) spans [t0 + (i-1) width, t0 + i width)
    and receives round(count(week i+1) / beta) events of each age, spread evenly.
    """
    weekly = np.asarray(weekly_counts, dtype=float)
    if weekly.shape[0] != n_weeks:
        raise InsufficientHistoryError(f"need {n_weeks} weeks of reports, got {weekly.shape[0]}")
    times, ages = [], []
    for row, i in enumerate(range(-(n_weeks - 1), 1)):
        lo = t0 + (i - 1) * width
        for a in range(weekly.shape[1]):
            n = int(np.round(weekly[row, a] / beta))
            if n > 0:
                times.append(_spread(n, lo, width, rng))
                ages.append(np.full(n, a))
    if not times:
        return SeedHistory(())
    t = np.concatenate(times)
    a = np.concatenate(ages)
    order = np.argsort(t, kind="stable")
    return SeedHistory.from_arrays(t[order], a[order])


def init_susceptibles(populations, antibody_fraction, z: float = 0.0, reported=None,
                      enforce_2x: bool = False) -> np.ndarray:
    """S_a = round((1 - p_a + z) N_a), clamped to [0, N_a]."""
    N = np.asarray(populations, dtype=float)
    p = np.asarray(antibody_fraction, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("antibody fractions must lie in [0, 1]")
    if z < 0 or z > p.min():
        raise ValueError("discount z must satisfy 0 <= z <= min p_a")
    S = np.clip(np.round((1.0 - p + z) * N), 0, N).astype(np.int64)
    if enforce_2x:
        if reported is None:
            raise ValueError("enforce_2x needs the reported case totals")
        low = np.flatnonzero(S < 2 * np.asarray(reported))
        if low.size:
            raise ValueError(f"susceptibles below twice the reported cases in groups {low.tolist()}")
    return S


# ---------------------------------------------------------------- simple CSV files


def write_seeds(path, seeds: SeedHistory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "age"])
        for e in seeds.events:
            w.writerow([repr(float(e.time)), int(e.age)])


def read_seeds(path) -> SeedHistory:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return SeedHistory.from_arrays([float(r["time"]) for r in rows], [int(r["age"]) for r in rows])


def write_gammas(path, gammas, labels: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["interval", *labels])
        for n, row in enumerate(np.asarray(gammas, dtype=float), start=1):
            w.writerow([n, *(repr(float(x)) for x in row)])


def read_gammas(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = sorted((int(r[0]), [float(x) for x in r[1:]]) for r in reader if r)
    return np.array([r for _, r in rows], dtype=float)


def write_observed(path, Y: ObservedSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["interval", "age", "count"])
        for n in range(1, Y.k + 1):
            for a in range(Y.n_groups):
                w.writerow([n, a, int(Y.counts[n - 1, a])])


def read_observed(path, k: Optional[int] = None, n_groups: Optional[int] = None) -> ObservedSeries:
    with open(path, newline="") as fh:
        rows = [(int(r["interval"]), int(r["age"]), int(r["count"])) for r in csv.DictReader(fh)]
    k = k if k is not None else max((r[0] for r in rows), default=0)
    A = n_groups if n_groups is not None else max((r[1] for r in rows), default=-1) + 1
    Y = np.zeros((k, A), dtype=np.int64)
    for n, a, c in rows:
        if not (1 <= n <= k and 0 <= a < A):
            raise ValueError(f"observed row ({n}, {a}) outside a {k} x {A} series")
        Y[n - 1, a] += c
    return ObservedSeries(Y)


def write_latent_events(path, seeds: SeedHistory, latent: Sequence) -> None:
    """``id,time,age,interval,parent_id``; seeds have interval 0 and an empty parent_id."""
    ids = {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "time", "age", "interval", "parent_id"])
        for e in seeds.events:
            ids[id(e)] = len(ids)
            w.writerow([ids[id(e)], repr(float(e.time)), int(e.age), 0, ""])
        for n, sample in enumerate(latent, start=1):
            for e in sample.events:
                ids[id(e)] = len(ids)
                w.writerow([ids[id(e)], repr(float(e.time)), int(e.age), n, ids[id(e.parent)]])


def read_latent_events(path) -> dict:
    """Arrays id, time, age, interval, parent_id (-1 for seeds)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {
        "id": np.array([int(r["id"]) for r in rows], dtype=np.int64),
        "time": np.array([float(r["time"]) for r in rows], dtype=float),
        "age": np.array([int(r["age"]) for r in rows], dtype=np.int64),
        "interval": np.array([int(r.get("interval") or 0) for r in rows], dtype=np.int64),
        "parent_id": np.array([int(r["parent_id"]) if r["parent_id"] not in ("", None) else -1 for r in rows],
                              dtype=np.int64),
    }
    return out


def write_band_csv(path, bands: Mapping[str, np.ndarray], labels: Sequence[str], index_name: str = "day",
                   start: int = 0) -> None:
    """Plot-ready CSV: one row per (index, age) with 6 significant digits."""
    levels = list(bands)
    first = np.asarray(bands[levels[0]])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([index_name, "age", *levels])
        for i in range(first.shape[0]):
            if first.ndim == 1:
                w.writerow([start + i, "all", *(f"{float(bands[l][i]):.6g}" for l in levels)])
                continue
            for a in range(first.shape[1]):
                w.writerow([start + i, labels[a], *(f"{float(bands[l][i, a]):.6g}" for l in levels)])


# ---------------------------------------------------------------- manifest


def config_hash(cfg: EpidemicConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path, cfg: Optional[EpidemicConfig], command: str, argv: Sequence[str], **extra) -> dict:
    import numpy
    import scipy

    from . import __version__

    manifest = {
        "command": command,
        "argv": list(argv),
        "config_sha256": config_hash(cfg) if cfg is not None else None,
        "versions": {
            "agehawkes": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        **extra,
    }
    Path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest
