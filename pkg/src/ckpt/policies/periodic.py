"""Periodic policy: checkpoint whenever the instruction counter reaches a threshold"""
from dataclasses import asdict, dataclass
from typing import Any, Dict

from src.ckpt.policies.base import DecisionContext, OnlinePolicy, PolicyDecision
from src.ckpt.validation import build_strict, raise_if
from src.models.actions import PolicyName


@dataclass(frozen=True)
class PeriodicConfig:
    threshold_insts: int = 1000

    def __post_init__(self):
        raise_if(["threshold_insts: must be >= 1"] if self.threshold_insts < 1 else [], "periodic")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PeriodicConfig":
        return build_strict(cls, data, "periodic")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def periodic_decide(insts_since_cp: int, cfg: PeriodicConfig) -> PolicyDecision:
    if insts_since_cp >= cfg.threshold_insts:
        return PolicyDecision.checkpoint()
    return PolicyDecision.proceed()


class PeriodicPolicy(OnlinePolicy):
    name = PolicyName.PERIODIC.value

    def __init__(self, cfg: PeriodicConfig = PeriodicConfig()):
        self.cfg = cfg

    def decide(self, ctx: DecisionContext) -> PolicyDecision:
        return periodic_decide(ctx.insts_since_cp, self.cfg)
