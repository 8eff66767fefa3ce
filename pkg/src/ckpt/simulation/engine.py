"""Interval-granularity execution engine shared by simulation and training"""
import math

from src.ckpt.errors import NoForwardProgressError
from src.ckpt.simulation.battery import BatteryState
from src.ckpt.simulation.harvest import HarvestSource
from src.ckpt.system.costs import Cost, battery_level, cycles_to_seconds
from src.ckpt.system.params import SystemParams


class IntervalEngine:
    """
    Owns simulated time, the battery and the harvest source.

    Every operation is atomic at interval granularity: an interval or a
    checkpoint either completes (advancing time while harvesting) or is
    refused up front without consuming anything.
    """

    def __init__(
        self,
        params: SystemParams,
        source: HarvestSource,
        initial_energy_nj: float,
        start_time_s: float = 0.0,
        max_time_s: float = math.inf,
    ):
        self.params = params
        self.source = source
        self.battery = BatteryState(initial_energy_nj, params.battery_capacity_nj)
        self.start_time = start_time_s
        self.time = start_time_s
        self.max_time = max_time_s
        self.busy_time = 0.0
        self.off_time = 0.0

    @property
    def elapsed(self) -> float:
        return self.time - self.start_time

    @property
    def level(self) -> int:
        return battery_level(self.params, self.battery.energy)

    def harvest_over(self, duration_s: float) -> float:
        return self.source.energy_between(self.time, self.time + duration_s)

    def projected_energy(self, demand_nj: float, duration_s: float) -> float:
        """Battery energy at the end of the next interval if it were executed"""
        return self.battery.energy + self.harvest_over(duration_s) - demand_nj

    def try_interval(self, demand_nj: float, duration_s: float) -> bool:
        """Run one interval; False (nothing consumed) if energy would run out"""
        harvested = self.harvest_over(duration_s)
        if self.battery.energy + harvested < demand_nj:
            return False
        self.battery.run(harvested, demand_nj)
        self._advance(duration_s, busy=True)
        return True

    def try_checkpoint(self, cost: Cost) -> bool:
        """Atomic checkpoint; False if the battery cannot pay for it"""
        if self.battery.energy < cost.energy_nj:
            return False
        self._pay(cost)
        return True

    def restore(self, cost: Cost) -> None:
        self._pay(cost)

    def idle(self, duration_s: float) -> None:
        """Powered-off charging for a fixed duration"""
        self.battery.charge(self.harvest_over(duration_s))
        self._advance(duration_s, busy=False)

    def wait_for(self, energy_nj: float) -> float:
        """Stay off until the battery holds `energy_nj`; returns off time"""
        target = min(energy_nj, self.battery.capacity)
        needed = target - self.battery.energy
        if needed <= 0:
            return 0.0
        wait = self.source.time_to_harvest(self.time, needed)
        if math.isinf(wait) or self.elapsed + wait > self.max_time:
            raise NoForwardProgressError(
                f"no forward progress: battery cannot reach {target:.1f} nJ "
                f"within {self.max_time:g} s of simulated time"
            )
        self.battery.harvested += needed
        self.battery.energy = target
        self._advance(wait, busy=False)
        return wait

    def _pay(self, cost: Cost) -> None:
        self.battery.draw(cost.energy_nj)
        latency = cycles_to_seconds(self.params, cost.latency_cycles)
        if latency > 0:
            self.battery.charge(self.harvest_over(latency))
            self._advance(latency, busy=True)

    def _advance(self, duration_s: float, busy: bool) -> None:
        self.time += duration_s
        if busy:
            self.busy_time += duration_s
        else:
            self.off_time += duration_s
        if self.elapsed > self.max_time:
            raise NoForwardProgressError(
                f"no forward progress within {self.max_time:g} s of simulated time"
            )
