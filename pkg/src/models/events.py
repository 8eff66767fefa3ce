from enum import Enum


class EventKind(str, Enum):
    """Simulator event log entry kind"""
    INTERVAL_DONE = "interval_done"
    CHECKPOINT = "checkpoint"
    FAILURE = "failure"
    ROLLBACK = "rollback"
    RESTORE = "restore"
    POWER_OFF = "power_off"
    POWER_ON = "power_on"


class CipherName(str, Enum):
    """Checkpoint encryption cipher"""
    NONE = "none"
    PRINCE = "prince"
    AES = "aes"
