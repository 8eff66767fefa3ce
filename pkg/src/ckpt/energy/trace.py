"""Harvested-power traces and power-level quantization"""
from dataclasses import dataclass, field
from typing import Sequence, Union
import hashlib

import numpy as np

from src.ckpt.errors import TraceFormatError


def _frozen_array(values: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PowerTrace:
    """Uniformly-sampled harvested power, in milliwatts"""
    sample_period: float
    samples: np.ndarray = field(default_factory=lambda: _frozen_array([]))

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        object.__setattr__(self, "samples", samples)
        if not self.sample_period > 0:
            raise ValueError(f"sample_period must be > 0, got {self.sample_period}")
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if np.any(~np.isfinite(samples)) or np.any(samples < 0):
            raise ValueError("samples must be finite and non-negative")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) * self.sample_period

    @property
    def mean_power(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(self.samples.mean())


@dataclass(frozen=True, eq=False)
class PowerLevelSet:
    """Strictly increasing set of quantization levels, in milliwatts"""
    levels: np.ndarray

    def __post_init__(self):
        levels = _frozen_array(self.levels)
        object.__setattr__(self, "levels", levels)
        problems = []
        if levels.ndim != 1 or levels.shape[0] < 2:
            problems.append("at least 2 levels required")
        elif np.any(np.diff(levels) <= 0):
            problems.append("levels must be strictly increasing")
        if levels.size and np.any(levels < 0):
            problems.append("levels must be non-negative")
        if problems:
            raise ValueError("; ".join(problems))

    def __len__(self) -> int:
        return int(self.levels.shape[0])

    @classmethod
    def default(cls) -> "PowerLevelSet":
        """Six RF power levels: 0, 5, ..., 25 mW"""
        return cls(levels=np.array([0.0, 5.0, 10.0, 15.0, 20.0, 25.0]))

    @classmethod
    def parse(cls, text: str) -> "PowerLevelSet":
        """Parse a comma-separated list such as '0,5,10'"""
        try:
            values = [float(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise ValueError(f"invalid level list '{text}': {e}") from e
        return cls(levels=np.array(values))

    def index_of(self, samples: np.ndarray) -> np.ndarray:
        """Map exact level values to level indices; -1 where a sample is not a level"""
        idx = np.searchsorted(self.levels, samples)
        idx = np.clip(idx, 0, len(self) - 1)
        return np.where(self.levels[idx] == samples, idx, -1)


def quantize_indices(trace: PowerTrace, levels: PowerLevelSet) -> np.ndarray:
    """Index of the nearest level per sample (ties go to the lower level)"""
    if len(trace) == 0:
        raise TraceFormatError("empty trace")
    distance = np.abs(trace.samples[:, None] - levels.levels[None, :])
    # argmin returns the first minimum, i.e. the lower level on a tie
    return np.argmin(distance, axis=1)


def quantize_trace(trace: PowerTrace, levels: PowerLevelSet) -> PowerTrace:
    """Snap every sample to its nearest power level"""
    idx = quantize_indices(trace, levels)
    return PowerTrace(sample_period=trace.sample_period, samples=levels.levels[idx])


def scale_trace(trace: PowerTrace, target_mean_power: float) -> PowerTrace:
    """Multiply a trace so that its mean equals `target_mean_power` (mW)"""
    if not target_mean_power > 0:
        raise ValueError(f"target mean power must be > 0, got {target_mean_power}")
    if len(trace) == 0:
        raise TraceFormatError("empty trace")
    mean = trace.mean_power
    if mean <= 0:
        raise TraceFormatError("cannot scale zero trace")
    factor = target_mean_power / mean
    return PowerTrace(sample_period=trace.sample_period, samples=trace.samples * factor)


def trace_digest(trace: PowerTrace) -> str:
    """sha256 over the sample period and little-endian float64 samples"""
    h = hashlib.sha256()
    h.update(repr(float(trace.sample_period)).encode("ascii"))
    h.update(trace.samples.astype("<f8").tobytes())
    return h.hexdigest()
