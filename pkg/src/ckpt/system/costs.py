"""Checkpoint, restore and interval costs"""
import math
from typing import NamedTuple, Optional

import numpy as np

from src.ckpt.errors import NoForwardProgressError
from src.ckpt.system.params import ProgramSpec, SystemParams

BLOCK_BYTES = 8
WORD_BYTES = 4
# absorbs float error when energy sits exactly on a level boundary
_LEVEL_EPS = 1e-9


class Cost(NamedTuple):
    energy_nj: float
    latency_cycles: int


class Demand(NamedTuple):
    energy_nj: float
    duration_s: float


def checkpoint_bytes(params: SystemParams, prog: ProgramSpec) -> int:
    """PC + register file + dirty cache lines"""
    raw = params.pc_bytes + params.rf_bytes + prog.dirty_lines_per_cp * params.cache_line_bytes
    return int(math.ceil(raw))


def _blocks_and_words(n_bytes: int):
    return math.ceil(n_bytes / BLOCK_BYTES), math.ceil(n_bytes / WORD_BYTES)


def _latency(params: SystemParams) -> int:
    return params.base_cp_latency_cycles + params.cipher.extra_latency_cycles


def checkpoint_cost_for_bytes(params: SystemParams, n_bytes: int) -> Cost:
    blocks, words = _blocks_and_words(n_bytes)
    energy = blocks * params.cipher.encrypt_energy_per_block + words * params.nvm_write_nj
    return Cost(energy, _latency(params))


def restore_cost_for_bytes(params: SystemParams, n_bytes: int) -> Cost:
    blocks, words = _blocks_and_words(n_bytes)
    energy = words * params.nvm_read_nj + blocks * params.cipher.encrypt_energy_per_block
    return Cost(energy, _latency(params))


def checkpoint_cost(params: SystemParams, prog: ProgramSpec) -> Cost:
    """Encrypt every 8-byte block and write every 4-byte word to NVM"""
    return checkpoint_cost_for_bytes(params, checkpoint_bytes(params, prog))


def restore_cost(params: SystemParams, prog: ProgramSpec) -> Cost:
    """Read every word back from NVM and decrypt it"""
    return restore_cost_for_bytes(params, checkpoint_bytes(params, prog))


def worst_case_bytes(params: SystemParams) -> int:
    """Checkpoint size with the whole data cache dirty"""
    lines = params.data_cache_bytes // params.cache_line_bytes
    return params.pc_bytes + params.rf_bytes + lines * params.cache_line_bytes


def interval_demand(params: SystemParams, insts: Optional[int] = None) -> Demand:
    """Energy and duration of `insts` instructions (one full interval by default)"""
    n = params.interval_insts if insts is None else insts
    return Demand(n * params.proc_energy_per_inst, n * params.cpi / params.clock_hz)


def lookup_energy_per_superinterval(params: SystemParams) -> float:
    # one action-bit word read per interval
    return params.super_interval * params.nvm_read_nj


def cycles_to_seconds(params: SystemParams, cycles: float) -> float:
    return cycles / params.clock_hz


def battery_level(params: SystemParams, energy_nj: float) -> int:
    """Quantized battery level, floor(E*B/capacity) clamped to [0, B-1]"""
    if energy_nj <= 0:
        return 0
    level = math.floor(energy_nj * params.battery_levels / params.battery_capacity_nj + _LEVEL_EPS)
    return min(level, params.battery_levels - 1)


def battery_levels_of(params: SystemParams, energies_nj: np.ndarray) -> np.ndarray:
    """Element-wise battery_level"""
    scaled = np.asarray(energies_nj, dtype=np.float64) * params.battery_levels / params.battery_capacity_nj
    return np.clip(np.floor(scaled + _LEVEL_EPS), 0, params.battery_levels - 1).astype(np.int64)


def level_energy(params: SystemParams, level: int) -> float:
    """Lowest energy that reads as `level`"""
    return float(params.battery_quantum * level)


def level_for_energy(params: SystemParams, energy_nj: float) -> int:
    """Smallest level whose floor energy covers `energy_nj`, clamped to B-1"""
    if energy_nj <= 0:
        return 0
    level = math.ceil(energy_nj / params.battery_quantum)
    return min(int(level), params.battery_levels - 1)


def default_wake_level(params: SystemParams, prog: ProgramSpec) -> int:
    """Level covering one restore plus one interval, clamped to B-1"""
    needed = restore_cost(params, prog).energy_nj + interval_demand(params).energy_nj
    return level_for_energy(params, needed)


def wake_energy(params: SystemParams, prog: ProgramSpec, level: int) -> float:
    """Energy to wait for before powering on: the wake level, and never less than a restore"""
    restore = restore_cost(params, prog).energy_nj
    if restore > params.battery_capacity_nj:
        raise NoForwardProgressError(
            f"no forward progress: restore needs {restore:.1f} nJ but the battery holds "
            f"{params.battery_capacity_nj:.1f} nJ"
        )
    return max(level_energy(params, level), restore)
