"""Conservative dual-threshold policy, which never rolls back"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from src.ckpt.errors import NoForwardProgressError
from src.ckpt.policies.base import DecisionContext, OnlinePolicy, PolicyDecision
from src.ckpt.system.costs import (
    checkpoint_cost_for_bytes,
    level_for_energy,
    restore_cost_for_bytes,
    worst_case_bytes,
)
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.ckpt.validation import build_strict, raise_if
from src.models.actions import PolicyName


@dataclass(frozen=True)
class ConservativeConfig:
    """
    low_threshold: energy (nJ) of a worst-case checkpoint.
    high_threshold: low_threshold plus a worst-case restore.
    wake_level: battery level that stands in for high_threshold; it is
    clamped to the top level when high_threshold exceeds the capacity.
    """
    low_threshold: float
    high_threshold: float
    wake_level: Optional[int] = None

    def __post_init__(self):
        problems = []
        if not self.low_threshold > 0:
            problems.append("low_threshold: must be > 0")
        if self.high_threshold < self.low_threshold:
            problems.append("high_threshold: must be >= low_threshold")
        if self.wake_level is not None and self.wake_level < 0:
            problems.append("wake_level: must be >= 0")
        raise_if(problems, "conservative")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConservativeConfig":
        return build_strict(cls, data, "conservative")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def conservative_thresholds(sys: SystemParams, prog: Optional[ProgramSpec] = None) -> ConservativeConfig:
    """Worst case: every line of the data cache is dirty"""
    n_bytes = worst_case_bytes(sys)
    low = checkpoint_cost_for_bytes(sys, n_bytes).energy_nj
    high = low + restore_cost_for_bytes(sys, n_bytes).energy_nj
    wake = level_for_energy(sys, min(high, sys.battery_capacity_nj))
    return ConservativeConfig(low_threshold=low, high_threshold=high, wake_level=wake)


def conservative_decide(
    battery_energy: float,
    running: bool,
    cfg: ConservativeConfig,
    uncommitted: bool = True,
) -> PolicyDecision:
    """Below the low threshold: checkpoint any uncommitted work, then power off"""
    wake = cfg.wake_level if cfg.wake_level is not None else 0
    if running:
        if battery_energy < cfg.low_threshold:
            return PolicyDecision.power_off_until(wake, checkpoint_first=uncommitted)
        return PolicyDecision.proceed()
    if battery_energy >= cfg.high_threshold:
        return PolicyDecision.proceed()
    return PolicyDecision.power_off_until(wake)


class ConservativePolicy(OnlinePolicy):
    """
    Decides on the projected end-of-interval energy, the way a voltage
    comparator would trip inside the interval.
    """
    name = PolicyName.CONSERVATIVE.value

    def __init__(self, cfg: ConservativeConfig):
        self.cfg = cfg

    def decide(self, ctx: DecisionContext) -> PolicyDecision:
        return conservative_decide(
            ctx.projected_energy_nj, ctx.running, self.cfg, uncommitted=ctx.insts_since_cp > 0
        )

    def check_feasible(self, sys: SystemParams, prog: ProgramSpec) -> None:
        if self.cfg.low_threshold >= sys.battery_capacity_nj:
            raise NoForwardProgressError(
                f"no forward progress: low threshold {self.cfg.low_threshold:.1f} nJ "
                f"needs more than the {sys.battery_capacity_nj:.1f} nJ battery"
            )

    def wake_level(self, sys: SystemParams, prog: ProgramSpec) -> int:
        if self.cfg.wake_level is not None:
            return min(self.cfg.wake_level, sys.battery_levels - 1)
        return level_for_energy(sys, min(self.cfg.high_threshold, sys.battery_capacity_nj))
