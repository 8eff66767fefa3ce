"""Harvested energy over time from a power trace"""
import math
from typing import Optional

import numpy as np
from loguru import logger

from src.ckpt.energy.markov import TransitionModel, generate_trace, stationary_distribution
from src.ckpt.energy.trace import PowerTrace, scale_trace, trace_digest

# mW * s = mJ = 1e6 nJ
NJ_PER_MW_S = 1e6


class HarvestSource:
    """
    Zero-order-hold integral of a power trace, wrapping cyclically.

    `energy_until(t)` is O(1); `time_to_harvest` is a binary search over
    the cumulative energy of one trace period.
    """

    def __init__(self, trace: PowerTrace):
        if len(trace) == 0:
            raise ValueError("harvest source needs a non-empty trace")
        self.trace = trace
        self.dt = float(trace.sample_period)
        self._power = trace.samples * NJ_PER_MW_S  # nJ per second
        self._cum = np.concatenate([[0.0], np.cumsum(self._power * self.dt)])
        self._period = self.dt * len(trace)
        self.total_energy = float(self._cum[-1])
        self.digest = trace_digest(trace)
        # first sample at or after k with positive power, else the last sample
        n = len(self._power)
        live = np.flatnonzero(self._power > 0)
        pos = np.searchsorted(live, np.arange(n))
        self._next_live = np.full(n, n - 1)
        if len(live):
            found = pos < len(live)
            self._next_live[found] = live[pos[found]]

    def energy_until(self, t: float) -> float:
        """Energy harvested over [0, t), in nJ"""
        if t <= 0:
            return 0.0
        cycles = math.floor(t / self._period)
        r = t - cycles * self._period
        k = min(int(r / self.dt), len(self._power) - 1)
        return cycles * self.total_energy + self._cum[k] + self._power[k] * (r - k * self.dt)

    def energy_between(self, t0: float, t1: float) -> float:
        if t1 <= t0:
            return 0.0
        return max(0.0, self.energy_until(t1) - self.energy_until(t0))

    def time_to_harvest(self, t0: float, energy_nj: float) -> float:
        """Seconds from t0 until `energy_nj` more has been harvested (inf if never)"""
        if energy_nj <= 0:
            return 0.0
        if self.total_energy <= 0:
            return math.inf
        target = self.energy_until(t0) + energy_nj
        cycles = math.floor(target / self.total_energy)
        rem = target - cycles * self.total_energy
        k = int(np.searchsorted(self._cum, rem, side="right")) - 1
        k = min(max(k, 0), len(self._power) - 1)
        while self._power[k] <= 0 and k < len(self._power) - 1:
            k += 1
        t = cycles * self._period + k * self.dt
        if self._power[k] > 0:
            t += max(0.0, rem - self._cum[k]) / self._power[k]
        return max(0.0, t - t0)

    def energies_until(self, ts: np.ndarray) -> np.ndarray:
        """Element-wise energy_until"""
        ts = np.maximum(np.asarray(ts, dtype=np.float64), 0.0)
        cycles = np.floor(ts / self._period)
        r = ts - cycles * self._period
        k = np.minimum((r / self.dt).astype(np.int64), len(self._power) - 1)
        return cycles * self.total_energy + self._cum[k] + self._power[k] * (r - k * self.dt)

    def times_to_harvest(self, t0: float, energies_nj: np.ndarray) -> np.ndarray:
        """Element-wise time_to_harvest from a common start time"""
        energies_nj = np.asarray(energies_nj, dtype=np.float64)
        if self.total_energy <= 0:
            return np.where(energies_nj <= 0, 0.0, math.inf)
        target = self.energy_until(t0) + np.maximum(energies_nj, 0.0)
        cycles = np.floor(target / self.total_energy)
        rem = target - cycles * self.total_energy
        k = np.clip(np.searchsorted(self._cum, rem, side="right") - 1, 0, len(self._power) - 1)
        k = self._next_live[k]
        power = self._power[k]
        live = power > 0
        step = np.where(live, np.maximum(0.0, rem - self._cum[k]) / np.where(live, power, 1.0), 0.0)
        t = cycles * self._period + k * self.dt + step
        return np.where(energies_nj <= 0, 0.0, np.maximum(0.0, t - t0))

    @classmethod
    def from_model(
        cls,
        model: TransitionModel,
        n_samples: int,
        sample_period: float,
        seed: int,
        target_mean_power: Optional[float] = None,
    ) -> "HarvestSource":
        """Generate a seeded synthetic trace, optionally scaled to a mean power"""
        pick = np.random.default_rng([seed, 1])
        start = int(pick.choice(model.n_levels, p=stationary_distribution(model)))
        trace = generate_trace(model, n_samples, sample_period, seed, initial_level_index=start)
        return cls(scaled(trace, target_mean_power))


def scaled(trace: PowerTrace, target_mean_power: Optional[float]) -> PowerTrace:
    """Scale to the target mean; zero traces are left untouched"""
    if target_mean_power is None:
        return trace
    if trace.mean_power <= 0:
        logger.warning("Trace has zero mean power; using it unscaled")
        return trace
    return scale_trace(trace, target_mean_power)
