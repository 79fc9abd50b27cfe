"""Kernel density particle filter."""

from .archive import ParticleArchive
from .filter import (
    DegenerateInitializationError,
    FilterConfig,
    FilterResult,
    filter_step,
    init_particles,
    lookahead_weights,
    propagate_and_weight,
    run_filter,
)
from .forecast import ForecastSummary, forecast_next_interval
from .steps import (
    ParticleCollapseError,
    ess,
    liu_west_constants,
    regenerate_params,
    resample_multinomial,
    rw_propagate,
    shrink_means,
)
from .summary import PosteriorSummary

__all__ = [
    "DegenerateInitializationError", "FilterConfig", "FilterResult", "ForecastSummary", "ParticleArchive",
    "ParticleCollapseError", "PosteriorSummary", "ess", "filter_step", "forecast_next_interval",
    "init_particles", "liu_west_constants", "lookahead_weights", "propagate_and_weight",
    "regenerate_params", "resample_multinomial", "run_filter", "rw_propagate", "shrink_means",
]
