"""Checkpoint-scheduling Markov decision process."""

from src.ckpt.mdp.core import (
    MdpState,
    next_state,
    immediate_cost,
    state_index,
    state_of_index,
    state_count,
    reachable_states,
    reachable_count,
)

__all__ = [
    "MdpState",
    "next_state",
    "immediate_cost",
    "state_index",
    "state_of_index",
    "state_count",
    "reachable_states",
    "reachable_count",
]
