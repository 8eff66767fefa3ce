"""Training environments: what happens to the battery over one interval"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger

from src.ckpt.energy.markov import TransitionModel
from src.ckpt.errors import NoForwardProgressError
from src.ckpt.mdp.core import MdpState
from src.ckpt.simulation.engine import IntervalEngine
from src.ckpt.simulation.harvest import HarvestSource
from src.ckpt.system.costs import (
    battery_levels_of,
    checkpoint_cost,
    cycles_to_seconds,
    interval_demand,
    lookup_energy_per_superinterval,
    default_wake_level,
    restore_cost,
    wake_energy,
)
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.models.actions import Action


class StepOutcome(NamedTuple):
    failure: bool
    aborted: bool
    b_next: int


class LevelOutcomes(NamedTuple):
    """One sampled step seen from every battery level, indexed by level"""
    failure: np.ndarray
    aborted: np.ndarray
    b_next: np.ndarray


class CheckpointEnvironment(ABC):
    """Stochastic battery dynamics sampled one interval at a time"""

    @property
    @abstractmethod
    def battery_levels(self) -> int:
        """Number of battery levels B"""
        pass

    @abstractmethod
    def reset(self, rng: np.random.Generator) -> int:
        """Start an episode; returns the initial battery level"""
        pass

    @abstractmethod
    def step(self, state: MdpState, action: Action, rng: np.random.Generator) -> StepOutcome:
        """
        Take `action` at `state` and run the following interval.

        `aborted` means the checkpoint itself could not be paid for;
        `failure` means the interval ran out of energy.
        """
        pass

    def close(self, state: MdpState, rng: np.random.Generator) -> StepOutcome:
        """
        Run the last interval of a super-interval, then the mandatory checkpoint.

        `aborted` means the interval finished but the checkpoint could not
        be paid for. Without a checkpoint energy model this is a plain proc.
        """
        return self.step(state, Action.PROC, rng)

    @abstractmethod
    def level_outcomes(self, action: Action, rng: np.random.Generator, closing: bool = False) -> LevelOutcomes:
        """
        Outcome of the next step from every battery level under one random draw.

        Does not advance the episode.
        """
        pass


@dataclass(frozen=True)
class TrainingTrace:
    """Where the simulated environment draws its harvested power from"""
    model: TransitionModel
    n_samples: int = 200_000
    sample_period_s: float = 0.005
    warmup_intervals: int = 0  # 0 means 2 * B


class SimulatedEnvironment(CheckpointEnvironment):
    """
    Runs the simulator's interval engine on a synthetic training trace.

    Each episode starts at a random point of the trace with an empty
    battery that charges idle for a random warm-up period.
    """

    def __init__(self, params: SystemParams, prog: ProgramSpec, trace: TrainingTrace, seed: int):
        self.params = params
        self.source = HarvestSource.from_model(
            trace.model,
            trace.n_samples,
            trace.sample_period_s,
            seed,
            target_mean_power=params.target_mean_power_mw,
        )
        self.demand = interval_demand(params)
        self.cp_cost = checkpoint_cost(params, prog)
        self.restore_cost = restore_cost(params, prog)
        self.extra_nj = (
            lookup_energy_per_superinterval(params) / params.super_interval
            + params.nvm_log_energy_per_interval
        )
        self.wake_energy = wake_energy(params, prog, default_wake_level(params, prog))
        self.warmup_intervals = trace.warmup_intervals or 2 * params.battery_levels
        self._engine = None
        logger.debug(
            f"Training environment: {len(trace.model.levels)} levels, "
            f"{trace.n_samples} samples, trace digest {self.source.digest[:12]}"
        )

    @property
    def battery_levels(self) -> int:
        return self.params.battery_levels

    @property
    def need_nj(self) -> float:
        return self.demand.energy_nj + self.extra_nj

    def reset(self, rng: np.random.Generator) -> int:
        period = self.source.dt * len(self.source.trace)
        start = float(rng.uniform(0.0, period))
        self._engine = IntervalEngine(self.params, self.source, 0.0, start_time_s=start)
        warmup = float(rng.uniform(0.0, self.warmup_intervals * self.demand.duration_s))
        self._engine.idle(warmup)
        return self._engine.level

    def step(self, state: MdpState, action: Action, rng: np.random.Generator) -> StepOutcome:
        engine = self._require_engine()
        if action == Action.CHPT and not engine.try_checkpoint(self.cp_cost):
            self._recover()
            return StepOutcome(True, True, engine.level)
        return self._run_interval()

    def close(self, state: MdpState, rng: np.random.Generator) -> StepOutcome:
        engine = self._require_engine()
        outcome = self._run_interval()
        if outcome.failure:
            return outcome
        if not engine.try_checkpoint(self.cp_cost):
            self._recover()
            return StepOutcome(True, True, engine.level)
        return outcome

    def level_outcomes(self, action: Action, rng: np.random.Generator, closing: bool = False) -> LevelOutcomes:
        """
        Replays the upcoming harvest against every battery level.

        Each level keeps the current energy's offset within its level, so
        the current level sees exactly what `step` or `close` will do.
        """
        engine = self._require_engine()
        t, cap = engine.time, engine.battery.capacity
        quantum = cap / self.battery_levels
        here = engine.level
        offset = min(max(engine.battery.energy - here * quantum, 0.0), quantum * (1 - 1e-6))
        energy = np.minimum(np.arange(self.battery_levels) * quantum + offset, cap)
        energy[here] = engine.battery.energy

        cp_energy = self.cp_cost.energy_nj
        cp_latency = cycles_to_seconds(self.params, self.cp_cost.latency_cycles)
        aborted = np.zeros(self.battery_levels, dtype=bool)
        start = t
        if action == Action.CHPT and not closing:
            aborted = energy < cp_energy
            start = t + cp_latency
            paid = np.minimum(energy - cp_energy + self.source.energy_between(t, start), cap)
            energy = np.where(aborted, energy, paid)
        end = start + self.demand.duration_s
        harvest = self.source.energy_between(start, end)
        ran = ~aborted & (energy + harvest >= self.need_nj)
        after = np.clip(energy + harvest - self.need_nj, 0.0, cap)
        # energy and time at which each failing level powers off
        off_energy = energy.copy()
        off_time = np.where(aborted, t, start)
        if closing:
            aborted = ran & (after < cp_energy)
            off_energy[aborted] = after[aborted]
            off_time[aborted] = end
            paid = np.minimum(after - cp_energy + self.source.energy_between(end, end + cp_latency), cap)
            after = np.where(aborted, after, paid)
        failure = ~ran | aborted

        final = after.copy()
        if failure.any():
            final[failure] = self._recovered(off_energy[failure], off_time[failure])
        return LevelOutcomes(failure, aborted, battery_levels_of(self.params, final))

    def _recovered(self, energy: np.ndarray, when: np.ndarray) -> np.ndarray:
        """Battery after wait_for(wake) and a restore, element-wise"""
        cap = self.params.battery_capacity_nj
        target = min(self.wake_energy, cap)
        short = np.maximum(target - energy, 0.0)
        wait = np.zeros_like(energy)
        for t0 in np.unique(when):
            at = when == t0
            wait[at] = self.source.times_to_harvest(float(t0), short[at])
        if np.any(np.isinf(wait)):
            raise NoForwardProgressError(f"no forward progress: battery cannot reach {target:.1f} nJ")
        woke = np.maximum(energy, target)
        start = when + wait
        latency = cycles_to_seconds(self.params, self.restore_cost.latency_cycles)
        harvest = self.source.energies_until(start + latency) - self.source.energies_until(start)
        return np.minimum(woke - self.restore_cost.energy_nj + np.maximum(harvest, 0.0), cap)

    def _run_interval(self) -> StepOutcome:
        engine = self._engine
        if not engine.try_interval(self.need_nj, self.demand.duration_s):
            self._recover()
            return StepOutcome(True, False, engine.level)
        return StepOutcome(False, False, engine.level)

    def _require_engine(self) -> IntervalEngine:
        if self._engine is None:
            raise RuntimeError("reset() must be called before step()")
        return self._engine

    def _recover(self) -> None:
        self._engine.wait_for(self.wake_energy)
        self._engine.restore(self.restore_cost)
