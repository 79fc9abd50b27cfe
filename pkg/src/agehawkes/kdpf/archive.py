"""Final particle archive, written as ``particles.bin`` (an uncompressed npz container).

Layout (M = archived particles, A = age groups, E = stored recent events):

- ``config_json``: the EpidemicConfig as a JSON string (0-d unicode array)
- ``gamma_last`` (M, A), ``log_d`` (M,), ``log_v`` (M,), ``susceptibles`` (M, A) int64
- ``mu_next`` (M, A): expected reports in interval k+1 from seeds and intervals 1..k
- ``recent_owner``, ``recent_time``, ``recent_age`` (E,): events of intervals k-eta+1..k
- ``seed_time``, ``seed_age``: the seed history
- ``hist_*``: full event histories of the first ``n_history`` particles, flattened
  with ``hist_owner`` and columns time, age, interval, pos, parent_interval,
  parent_pos, parent_age (parent_interval 0 points into the seed list)
- ``hist_gamma`` (H, k, A): gamma paths of those particles
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import EpidemicConfig, SeedHistory

_HIST_FIELDS = ("time", "age", "interval", "pos", "parent_interval", "parent_pos", "parent_age")


@dataclass
class ParticleArchive:
    cfg: EpidemicConfig
    gamma_last: np.ndarray
    log_d: np.ndarray
    log_v: np.ndarray
    susceptibles: np.ndarray
    mu_next: np.ndarray
    recent_owner: np.ndarray
    recent_time: np.ndarray
    recent_age: np.ndarray
    seeds: SeedHistory
    histories: list  # list of dicts of arrays, see _HIST_FIELDS
    hist_gamma: np.ndarray

    @property
    def n_particles(self) -> int:
        return len(self.log_d)

    @classmethod
    def from_population(cls, pop, idx: np.ndarray, n_history: Optional[int] = None) -> "ParticleArchive":
        """Archive the particles ``idx`` (typically a posterior draw) of a finished run."""
        cfg = pop.cfg
        k = pop.n
        idx = np.asarray(idx)
        owners, times, ages = [], [], []
        for m in range(max(1, k - cfg.eta + 1), k + 1):
            o, t, a, _ = pop.gather(m, idx)
            owners.append(o), times.append(t), ages.append(a)
        n_history = len(idx) if n_history is None else min(n_history, len(idx))
        histories = [pop.history(int(j)) for j in idx[:n_history]]
        hist_gamma = np.array([[pop.stores[m].gamma[pop.lineage[m, j]] for m in range(k)] for j in idx[:n_history]])
        return cls(
            cfg,
            pop.gamma[idx].copy(),
            pop.log_d[idx].copy(),
            pop.log_v[idx].copy(),
            pop.S[idx].copy(),
            pop.seed_mu[k] + pop.mu_future[idx, k],
            np.concatenate(owners) if owners else np.zeros(0, dtype=np.int64),
            np.concatenate(times) if times else np.zeros(0),
            np.concatenate(ages) if ages else np.zeros(0, dtype=np.int64),
            pop.seeds,
            histories,
            hist_gamma.reshape(n_history, k, cfg.n_groups),
        )

    def save(self, path) -> None:
        arrays = {
            "config_json": np.array(json.dumps(self.cfg.to_dict(), sort_keys=True)),
            "gamma_last": self.gamma_last,
            "log_d": self.log_d,
            "log_v": self.log_v,
            "susceptibles": self.susceptibles,
            "mu_next": self.mu_next,
            "recent_owner": self.recent_owner,
            "recent_time": self.recent_time,
            "recent_age": self.recent_age,
            "seed_time": self.seeds.times,
            "seed_age": self.seeds.ages,
            "hist_gamma": self.hist_gamma,
        }
        lens = [len(h["time"]) for h in self.histories]
        arrays["hist_owner"] = np.repeat(np.arange(len(lens)), lens)
        for f in _HIST_FIELDS:
            parts = [np.asarray(h[f]) for h in self.histories]
            arrays[f"hist_{f}"] = np.concatenate(parts) if parts else np.zeros(0)
        # write through a file handle so numpy keeps the given name
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path) -> "ParticleArchive":
        with np.load(Path(path), allow_pickle=False) as z:
            cfg = EpidemicConfig.from_dict(json.loads(str(z["config_json"])))
            H = z["hist_gamma"].shape[0]
            owner = z["hist_owner"]
            histories = []
            for j in range(H):
                sel = owner == j
                histories.append({f: (z[f"hist_{f}"][sel] if f == "time" else z[f"hist_{f}"][sel].astype(np.int64))
                                  for f in _HIST_FIELDS})
            return cls(
                cfg, z["gamma_last"], z["log_d"], z["log_v"], z["susceptibles"], z["mu_next"],
                z["recent_owner"], z["recent_time"], z["recent_age"],
                SeedHistory.from_arrays(z["seed_time"], z["seed_age"]),
                histories, z["hist_gamma"],
            )
