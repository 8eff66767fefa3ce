"""Checkpoint-scheduling MDP: states, transitions, costs and dense indexing"""
from dataclasses import dataclass
from typing import Iterator

from src.ckpt.errors import InvalidStateError
from src.models.actions import Action


@dataclass(frozen=True)
class MdpState:
    """(progress counter, checkpoint counter, battery level)"""
    p: int
    c: int
    b: int

    def is_valid(self, S: int, B: int) -> bool:
        return 0 <= self.c <= self.p < S and 0 <= self.b < B

    def validate(self, S: int, B: int) -> "MdpState":
        if not self.is_valid(S, B):
            raise InvalidStateError(f"invalid state {self} for S={S}, B={B}")
        return self


def next_state(s: MdpState, a: Action, failure: bool, b_next: int) -> MdpState:
    """
    Deterministic (p, c) part of the transition.

    chpt keeps the just-committed interval even when the following
    interval fails; proc without a checkpoint rolls back to c.
    """
    if not (0 <= s.c <= s.p) or b_next < 0 or s.b < 0:
        raise InvalidStateError(f"invalid state {s} (b_next={b_next})")
    if a == Action.CHPT:
        nxt = MdpState(s.p, s.p, b_next) if failure else MdpState(s.p + 1, s.p, b_next)
    elif failure:
        nxt = MdpState(s.c, s.c, b_next)
    else:
        nxt = MdpState(s.p + 1, s.c, b_next)
    return nxt


def immediate_cost(s: MdpState, a: Action, failure: bool, t_cp: float, N: int) -> float:
    """Cost in cycles at CPI 1; callers scale the rollback part by CPI"""
    if a == Action.CHPT:
        return t_cp
    if failure:
        return (s.p - s.c) * N
    return 0


def state_count(S: int, B: int) -> int:
    return S * S * B


def state_index(s: MdpState, S: int, B: int) -> int:
    """(p*S + c)*B + b; the full S x S rectangle is indexed"""
    if not (0 <= s.p < S and 0 <= s.c < S and 0 <= s.b < B):
        raise InvalidStateError(f"invalid state {s} for S={S}, B={B}")
    return (s.p * S + s.c) * B + s.b


def state_of_index(index: int, S: int, B: int) -> MdpState:
    if not 0 <= index < state_count(S, B):
        raise InvalidStateError(f"invalid state index {index} for S={S}, B={B}")
    pc, b = divmod(index, B)
    p, c = divmod(pc, S)
    return MdpState(p, c, b)


def reachable_states(S: int, B: int) -> Iterator[MdpState]:
    """All states with c <= p, in index order"""
    for p in range(S):
        for c in range(p + 1):
            for b in range(B):
                yield MdpState(p, c, b)


def reachable_count(S: int, B: int) -> int:
    return S * (S + 1) // 2 * B
