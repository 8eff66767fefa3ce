"""First-order Markov chain model of harvested power"""
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from src.ckpt.energy.trace import PowerLevelSet, PowerTrace
from src.ckpt.errors import TraceFormatError

ROW_SUM_TOLERANCE = 1e-9

# Sticky six-level chain shaped after a measured RF harvesting trace:
# long dwell times, mostly single-level steps, occasional dropouts to 0 mW.
_DEFAULT_COUNTS = [
    [80, 12, 5, 2, 1, 0],
    [10, 70, 14, 4, 2, 0],
    [4, 12, 68, 12, 3, 1],
    [2, 4, 14, 66, 11, 3],
    [1, 2, 5, 14, 68, 10],
    [0, 1, 2, 5, 14, 78],
]


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True).astype(np.float64)
    probs = np.divide(counts, totals, out=np.zeros(counts.shape, dtype=np.float64), where=totals > 0)
    # rows never left in the data become absorbing so generation never stalls
    empty = totals[:, 0] == 0
    probs[empty, :] = 0.0
    probs[empty, np.flatnonzero(empty)] = 1.0
    return probs


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Power levels plus counted and row-normalized transition matrices"""
    levels: PowerLevelSet
    counts: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        k = len(self.levels)
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        probs = np.array(self.probs, dtype=np.float64, copy=True)
        problems = []
        if counts.shape != (k, k):
            problems.append(f"counts must be {k}x{k}, got {counts.shape}")
        elif np.any(counts < 0):
            problems.append("counts must be non-negative")
        if probs.shape != (k, k):
            problems.append(f"probs must be {k}x{k}, got {probs.shape}")
        else:
            if np.any(probs < 0) or np.any(probs > 1):
                problems.append("probs entries must lie in [0, 1]")
            if np.any(np.abs(probs.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
                problems.append("each probs row must sum to 1")
        if problems:
            raise ValueError("; ".join(problems))
        counts.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_counts(cls, levels: PowerLevelSet, counts: np.ndarray) -> "TransitionModel":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(levels=levels, counts=counts, probs=_normalize_rows(counts))

    @property
    def n_levels(self) -> int:
        return len(self.levels)


def fit_transitions(quantized: PowerTrace, levels: PowerLevelSet) -> TransitionModel:
    """Count level-to-level transitions of a quantized trace"""
    if len(quantized) < 2:
        raise ValueError(f"need at least 2 samples to fit transitions, got {len(quantized)}")
    idx = levels.index_of(quantized.samples)
    bad = np.flatnonzero(idx < 0)
    if bad.size:
        raise TraceFormatError("unquantized sample", row=int(bad[0]))

    k = len(levels)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (idx[:-1], idx[1:]), 1)

    unseen = np.flatnonzero(counts.sum(axis=1) == 0)
    if unseen.size:
        logger.warning(
            f"No outgoing transitions for levels {levels.levels[unseen].tolist()} mW; using self-loops"
        )
    return TransitionModel.from_counts(levels, counts)


def generate_trace(
    model: TransitionModel,
    n_samples: int,
    sample_period: float,
    seed: int,
    initial_level_index: int = 0,
) -> PowerTrace:
    """Sample a synthetic trace from the chain, deterministically for a given seed"""
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if not 0 <= initial_level_index < model.n_levels:
        raise ValueError(f"initial_level_index {initial_level_index} out of range")

    cdf = np.cumsum(model.probs, axis=1)
    cdf[:, -1] = 1.0
    rows = [row.tolist() for row in cdf]
    last = model.n_levels - 1

    rng = np.random.default_rng(seed)
    draws = rng.random(n_samples - 1).tolist()
    idx = np.empty(n_samples, dtype=np.int64)
    current = initial_level_index
    idx[0] = current
    for t, u in enumerate(draws, start=1):
        current = min(bisect_right(rows[current], u), last)
        idx[t] = current

    return PowerTrace(sample_period=sample_period, samples=model.levels.levels[idx])


def stationary_distribution(model: TransitionModel) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 (least squares for reducible chains)"""
    k = model.n_levels
    a = np.vstack([model.probs.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def default_transition_model(levels: Optional[PowerLevelSet] = None) -> TransitionModel:
    """Bundled RF-like chain over the six default levels"""
    levels = levels or PowerLevelSet.default()
    if len(levels) != len(_DEFAULT_COUNTS):
        raise ValueError(f"default model has {len(_DEFAULT_COUNTS)} levels, got {len(levels)}")
    return TransitionModel.from_counts(levels, np.array(_DEFAULT_COUNTS))
