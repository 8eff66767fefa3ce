"""Unit tests for the checkpoint-scheduling MDP"""
import itertools

import pytest

from src.ckpt.errors import InvalidStateError
from src.ckpt.mdp.core import (
    MdpState,
    immediate_cost,
    next_state,
    reachable_count,
    reachable_states,
    state_count,
    state_index,
    state_of_index,
)
from src.models.actions import Action

T_CP = 164
N = 500


class TestTransitions:
    """Test the deterministic (p, c) transition and its immediate cost"""

    @pytest.mark.parametrize(
        "action, failure, expected, cost",
        [
            (Action.PROC, False, (11, 4), 0),
            (Action.PROC, True, (4, 4), 3000),
            (Action.CHPT, False, (11, 10), T_CP),
            (Action.CHPT, True, (10, 10), T_CP),
        ],
    )
    def test_mid_interval(self, action, failure, expected, cost):
        s = MdpState(10, 4, 2)
        nxt = next_state(s, action, failure, 7)
        assert (nxt.p, nxt.c, nxt.b) == (*expected, 7)
        assert immediate_cost(s, action, failure, T_CP, N) == cost

    @pytest.mark.parametrize(
        "action, failure, expected, cost",
        [
            (Action.PROC, False, (1, 0), 0),
            (Action.PROC, True, (0, 0), 0),
            (Action.CHPT, False, (1, 0), T_CP),
            (Action.CHPT, True, (0, 0), T_CP),
        ],
    )
    def test_at_start(self, action, failure, expected, cost):
        s = MdpState(0, 0, 0)
        nxt = next_state(s, action, failure, 3)
        assert (nxt.p, nxt.c) == expected
        assert immediate_cost(s, action, failure, T_CP, N) == cost

    def test_exhaustive_small_space(self):
        """c never exceeds p and never moves backwards past a checkpoint"""
        S, B = 10, 5
        for s in reachable_states(S, B):
            if s.p == S - 1:
                continue
            for a, failure, b_next in itertools.product(Action, (False, True), range(B)):
                nxt = next_state(s, a, failure, b_next)
                assert nxt.is_valid(S, B)
                assert nxt.c >= (s.p if a == Action.CHPT else s.c)
                if a == Action.PROC and failure:
                    assert (nxt.p, nxt.c) == (s.c, s.c)
                    assert immediate_cost(s, a, failure, T_CP, N) == (s.p - s.c) * N
                elif a == Action.CHPT:
                    assert immediate_cost(s, a, failure, T_CP, N) == T_CP
                else:
                    assert nxt.p == s.p + 1
                    assert immediate_cost(s, a, failure, T_CP, N) == 0

    def test_invalid_state(self):
        with pytest.raises(InvalidStateError):
            next_state(MdpState(2, 3, 0), Action.PROC, False, 0)


class TestStateIndex:
    """Test dense state indexing"""

    def test_origin(self):
        assert state_index(MdpState(0, 0, 0), 100, 20) == 0

    def test_battery_fastest(self):
        assert state_index(MdpState(0, 0, 1), 100, 20) == 1

    def test_last_state(self):
        assert state_index(MdpState(99, 99, 19), 100, 20) == 199_999

    def test_count(self):
        assert state_count(100, 20) == 200_000
        assert reachable_count(100, 20) == 5050 * 20

    def test_bijection(self):
        S, B = 6, 3
        for i in range(state_count(S, B)):
            assert state_index(state_of_index(i, S, B), S, B) == i

    def test_reachable_in_index_order(self):
        indices = [state_index(s, 5, 2) for s in reachable_states(5, 2)]
        assert indices == sorted(indices)
        assert len(indices) == reachable_count(5, 2)

    def test_out_of_range(self):
        with pytest.raises(InvalidStateError):
            state_index(MdpState(100, 0, 0), 100, 20)
        with pytest.raises(InvalidStateError):
            state_of_index(200_000, 100, 20)

    def test_validate(self):
        assert MdpState(3, 2, 1).validate(5, 2) == MdpState(3, 2, 1)
        with pytest.raises(InvalidStateError, match="invalid state"):
            MdpState(3, 4, 1).validate(5, 2)
