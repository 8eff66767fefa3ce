"""Harvested-power traces and their Markov chain model."""

from src.ckpt.energy.trace import (
    PowerTrace,
    PowerLevelSet,
    quantize_trace,
    scale_trace,
    trace_digest,
)
from src.ckpt.energy.markov import (
    TransitionModel,
    fit_transitions,
    generate_trace,
    stationary_distribution,
    default_transition_model,
)

__all__ = [
    "PowerTrace",
    "PowerLevelSet",
    "quantize_trace",
    "scale_trace",
    "trace_digest",
    "TransitionModel",
    "fit_transitions",
    "generate_trace",
    "stationary_distribution",
    "default_transition_model",
]
