"""System constants and cost model."""

from src.ckpt.system.params import (
    CipherConfig,
    SystemParams,
    ProgramSpec,
    PROGRAM_PRESETS,
    cipher_preset,
    program_preset,
)
from src.ckpt.system.costs import (
    Cost,
    Demand,
    checkpoint_bytes,
    checkpoint_cost,
    restore_cost,
    interval_demand,
    lookup_energy_per_superinterval,
    battery_level,
    level_energy,
    level_for_energy,
)

__all__ = [
    "CipherConfig",
    "SystemParams",
    "ProgramSpec",
    "PROGRAM_PRESETS",
    "cipher_preset",
    "program_preset",
    "Cost",
    "Demand",
    "checkpoint_bytes",
    "checkpoint_cost",
    "restore_cost",
    "interval_demand",
    "lookup_energy_per_superinterval",
    "battery_level",
    "level_energy",
    "level_for_energy",
]
