"""Online scheduling interface shared by every policy"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from src.ckpt.mdp.core import MdpState
from src.ckpt.system.costs import default_wake_level
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.models.actions import DecisionKind


@dataclass(frozen=True)
class PolicyDecision:
    kind: DecisionKind
    wake_level: Optional[int] = None
    checkpoint_first: bool = False

    @classmethod
    def checkpoint(cls) -> "PolicyDecision":
        return cls(DecisionKind.CHECKPOINT)

    @classmethod
    def proceed(cls) -> "PolicyDecision":
        return cls(DecisionKind.PROCEED)

    @classmethod
    def power_off_until(cls, level: int, checkpoint_first: bool = False) -> "PolicyDecision":
        if level < 0:
            raise ValueError(f"wake level must be >= 0, got {level}")
        return cls(DecisionKind.POWER_OFF, wake_level=level, checkpoint_first=checkpoint_first)

    @property
    def takes_checkpoint(self) -> bool:
        return self.kind == DecisionKind.CHECKPOINT or self.checkpoint_first


@dataclass(frozen=True)
class DecisionContext:
    """
    What a policy sees at an interval boundary.

    `state` is local to the current super-interval. `projected_energy_nj`
    is the battery energy at the end of the next interval if it ran.
    """
    state: MdpState
    insts_since_cp: int
    battery_energy_nj: float
    projected_energy_nj: float
    running: bool = True


class OnlinePolicy(ABC):
    """Decides at every interval boundary; immutable once built"""

    name: str = "policy"

    @abstractmethod
    def decide(self, ctx: DecisionContext) -> PolicyDecision:
        pass

    def wake_level(self, sys: SystemParams, prog: ProgramSpec) -> int:
        """Battery level to wait for after a failure"""
        return default_wake_level(sys, prog)

    def lookup_energy_nj(self, sys: SystemParams) -> float:
        """Extra energy charged per interval for consulting the policy"""
        return 0.0

    def check_feasible(self, sys: SystemParams, prog: ProgramSpec) -> None:
        """Raise NoForwardProgressError if the policy can never make progress"""
        return None
