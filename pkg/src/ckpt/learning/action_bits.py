"""One-bit-per-state online policy table and its ABT1 file format"""
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from src.ckpt.errors import DimensionMismatchError, TraceFormatError
from src.ckpt.learning.qtable import QTable
from src.ckpt.mdp.core import MdpState, reachable_count, state_count, state_index
from src.models.actions import Action

MAGIC = b"ABT1"
_HEADER = struct.Struct("<III")
HEADER_BYTES = len(MAGIC) + _HEADER.size


@dataclass(frozen=True, eq=False)
class ActionBitTable:
    """Bit i = 1 means checkpoint in the state with index i"""
    S: int
    B: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool, copy=True).ravel()
        if bits.size != state_count(self.S, self.B):
            raise DimensionMismatchError(
                f"expected {state_count(self.S, self.B)} bits for S={self.S}, B={self.B}, got {bits.size}"
            )
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def bit(self, s: MdpState) -> bool:
        return bool(self.bits[state_index(s, self.S, self.B)])

    def packed(self) -> bytes:
        """LSB-first within each byte, state-index order"""
        return np.packbits(self.bits, bitorder="little").tobytes()

    @property
    def payload_bytes(self) -> int:
        return (self.bits.size + 7) // 8


def extract_action_bits(q: QTable) -> ActionBitTable:
    """bit = Q(chpt) < Q(proc); unvisited states keep proc"""
    bits = q.values[:, Action.CHPT] < q.values[:, Action.PROC]
    unvisited = reachable_count(q.S, q.B) - int(_reachable_mask(q.S, q.B)[q.visited_states()].sum())
    if unvisited:
        logger.warning(f"{unvisited} reachable states were never visited; they default to proc")
    return ActionBitTable(q.S, q.B, bits)


def _reachable_mask(S: int, B: int) -> np.ndarray:
    p, c = np.meshgrid(np.arange(S), np.arange(S), indexing="ij")
    return np.repeat((c <= p).ravel(), B)


def write_action_bits(table: ActionBitTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(MAGIC + _HEADER.pack(table.S, table.B, 0) + table.packed())
    logger.info(f"Wrote action-bit table ({HEADER_BYTES + table.payload_bytes} bytes) to {path}")
    return path


def read_action_bits(path: Union[str, Path]) -> ActionBitTable:
    data = Path(path).read_bytes()
    if len(data) < HEADER_BYTES or data[:4] != MAGIC:
        raise TraceFormatError("not an ABT1 action-bit file", field="magic")
    S, B, reserved = _HEADER.unpack_from(data, len(MAGIC))
    if reserved != 0:
        raise TraceFormatError("reserved header bytes must be zero", field="reserved")
    n = state_count(S, B)
    payload = np.frombuffer(data, dtype=np.uint8, offset=HEADER_BYTES)
    if payload.size != (n + 7) // 8:
        raise TraceFormatError(
            f"expected {(n + 7) // 8} payload bytes for S={S}, B={B}, got {payload.size}",
            field="payload",
        )
    bits = np.unpackbits(payload, bitorder="little", count=n).astype(bool)
    return ActionBitTable(S, B, bits)
