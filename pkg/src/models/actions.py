from enum import Enum, IntEnum


class Action(IntEnum):
    """Scheduler action at an interval boundary (value = Q-table column)"""
    PROC = 0
    CHPT = 1


class DecisionKind(str, Enum):
    """Online policy decision"""
    CHECKPOINT = "checkpoint"
    PROCEED = "proceed"
    POWER_OFF = "power_off"


class PolicyName(str, Enum):
    """Online checkpointing policies"""
    QLEARN = "qlearn"
    PERIODIC = "periodic"
    CONSERVATIVE = "conservative"
