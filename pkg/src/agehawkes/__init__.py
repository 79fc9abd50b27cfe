"""Age-structured marked Hawkes epidemic model with particle-filter inference."""

from .core import (
    AgeStructure,
    ContactMatrix,
    EpidemicConfig,
    IntervalGrid,
    MarkedEvent,
    SeedHistory,
    SusceptibleLedger,
    load_config,
)
from .kernels import GENERATION_INTERVAL, REPORTING_DELAY, KernelSpec
from .obs import ObservedSeries

__version__ = "0.1.0"

__all__ = [
    "AgeStructure", "ContactMatrix", "EpidemicConfig", "GENERATION_INTERVAL", "IntervalGrid", "KernelSpec",
    "MarkedEvent", "ObservedSeries", "REPORTING_DELAY", "SeedHistory", "SusceptibleLedger", "load_config",
]
