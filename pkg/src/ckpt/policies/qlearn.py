"""Q-learning policy: one action-bit lookup per interval"""
from src.ckpt.errors import DimensionMismatchError
from src.ckpt.learning.action_bits import ActionBitTable
from src.ckpt.mdp.core import MdpState
from src.ckpt.policies.base import DecisionContext, OnlinePolicy, PolicyDecision
from src.ckpt.system.params import SystemParams
from src.models.actions import PolicyName


def q_decide(table: ActionBitTable, s: MdpState) -> PolicyDecision:
    """Mandatory checkpoint on the last interval of a super-interval, else the stored bit"""
    if not s.is_valid(table.S, table.B):
        raise DimensionMismatchError(f"state {s} outside table dimensions S={table.S}, B={table.B}")
    if s.p == table.S - 1 or table.bit(s):
        return PolicyDecision.checkpoint()
    return PolicyDecision.proceed()


class QLearningPolicy(OnlinePolicy):
    name = PolicyName.QLEARN.value

    def __init__(self, table: ActionBitTable, sys: SystemParams):
        if (table.S, table.B) != (sys.super_interval, sys.battery_levels):
            raise DimensionMismatchError(
                f"action table is S={table.S}, B={table.B} but the system uses "
                f"S={sys.super_interval}, B={sys.battery_levels}"
            )
        self.table = table

    def decide(self, ctx: DecisionContext) -> PolicyDecision:
        return q_decide(self.table, ctx.state)

    def lookup_energy_nj(self, sys: SystemParams) -> float:
        # one NVM word read per decision
        return sys.nvm_read_nj
