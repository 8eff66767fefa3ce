"""Unit tests for the online checkpointing policies"""
import numpy as np
import pytest

from src.ckpt.errors import ConfigError, DimensionMismatchError, NoForwardProgressError
from src.ckpt.learning.action_bits import ActionBitTable
from src.ckpt.mdp.core import MdpState, state_index
from src.ckpt.policies.base import DecisionContext, PolicyDecision
from src.ckpt.policies.conservative import (
    ConservativeConfig,
    ConservativePolicy,
    conservative_decide,
    conservative_thresholds,
)
from src.ckpt.policies.factory import PolicyFactory
from src.ckpt.policies.periodic import PeriodicConfig, PeriodicPolicy, periodic_decide
from src.ckpt.policies.qlearn import QLearningPolicy, q_decide
from src.ckpt.system.costs import checkpoint_cost_for_bytes, restore_cost_for_bytes
from src.ckpt.system.params import ProgramSpec, SystemParams, cipher_preset
from src.models.actions import DecisionKind

SYS = SystemParams()
PROG = ProgramSpec()


def table_with(S, B, *checkpoint_states):
    bits = np.zeros(S * S * B, dtype=bool)
    for s in checkpoint_states:
        bits[state_index(s, S, B)] = True
    return ActionBitTable(S, B, bits)


def context(state=MdpState(0, 0, 0), insts=0, energy=1000.0, projected=None):
    return DecisionContext(
        state=state,
        insts_since_cp=insts,
        battery_energy_nj=energy,
        projected_energy_nj=energy if projected is None else projected,
    )


class TestQLearningPolicy:
    """Test the table-driven policy"""

    def test_mandatory_checkpoint(self):
        table = table_with(5, 2)
        assert q_decide(table, MdpState(4, 1, 0)).kind == DecisionKind.CHECKPOINT

    def test_bit_clear_proceeds(self):
        table = table_with(5, 2)
        assert q_decide(table, MdpState(2, 1, 0)).kind == DecisionKind.PROCEED

    def test_bit_set_checkpoints(self):
        table = table_with(5, 2, MdpState(2, 1, 0))
        assert q_decide(table, MdpState(2, 1, 0)).kind == DecisionKind.CHECKPOINT
        assert q_decide(table, MdpState(2, 1, 1)).kind == DecisionKind.PROCEED

    def test_state_outside_table(self):
        with pytest.raises(DimensionMismatchError):
            q_decide(table_with(5, 2), MdpState(2, 1, 2))

    def test_table_must_match_system(self):
        with pytest.raises(DimensionMismatchError):
            QLearningPolicy(table_with(5, 2), SYS)

    def test_lookup_energy(self):
        policy = QLearningPolicy(table_with(100, 20), SYS)
        assert policy.lookup_energy_nj(SYS) == pytest.approx(0.06516)


class TestPeriodicPolicy:
    """Test the instruction-counter policy"""

    def test_below_threshold(self):
        assert periodic_decide(999, PeriodicConfig(1000)).kind == DecisionKind.PROCEED

    def test_at_threshold(self):
        assert periodic_decide(1000, PeriodicConfig(1000)).kind == DecisionKind.CHECKPOINT

    def test_threshold_one(self):
        policy = PeriodicPolicy(PeriodicConfig(1))
        assert policy.decide(context(insts=500)).takes_checkpoint
        assert not policy.decide(context(insts=0)).takes_checkpoint

    def test_invalid_threshold(self):
        with pytest.raises(ConfigError):
            PeriodicConfig(threshold_insts=0)


class TestConservativePolicy:
    """Test the dual-threshold policy"""

    cfg = ConservativeConfig(low_threshold=500.0, high_threshold=800.0, wake_level=8)

    def test_below_low_checkpoints_and_powers_off(self):
        decision = conservative_decide(499.9, True, self.cfg)
        assert decision.kind == DecisionKind.POWER_OFF
        assert decision.checkpoint_first
        assert decision.wake_level == 8

    def test_resume_at_high(self):
        assert conservative_decide(800.0, False, self.cfg).kind == DecisionKind.PROCEED

    def test_stay_off_below_high(self):
        decision = conservative_decide(799.0, False, self.cfg)
        assert decision.kind == DecisionKind.POWER_OFF
        assert not decision.checkpoint_first

    def test_far_above_low(self):
        assert conservative_decide(1900.0, True, self.cfg).kind == DecisionKind.PROCEED

    def test_decides_on_projected_energy(self):
        policy = ConservativePolicy(self.cfg)
        decision = policy.decide(context(energy=1900.0, projected=100.0, insts=500))
        assert decision.kind == DecisionKind.POWER_OFF
        assert decision.checkpoint_first

    def test_nothing_to_commit_skips_checkpoint(self):
        policy = ConservativePolicy(self.cfg)
        decision = policy.decide(context(energy=100.0, insts=0))
        assert decision.kind == DecisionKind.POWER_OFF
        assert not decision.checkpoint_first

    def test_thresholds_use_full_cache(self):
        cfg = conservative_thresholds(SYS, PROG)
        assert cfg.low_threshold == pytest.approx(checkpoint_cost_for_bytes(SYS, 8324).energy_nj)
        assert cfg.high_threshold - cfg.low_threshold == pytest.approx(
            restore_cost_for_bytes(SYS, 8324).energy_nj
        )

    def test_wake_level_clamped_to_capacity(self):
        """High threshold exceeds the default battery, so the top level stands in"""
        cfg = conservative_thresholds(SYS, PROG)
        assert cfg.high_threshold > SYS.battery_capacity_nj
        assert cfg.wake_level == SYS.battery_levels - 1

    def test_cipher_raises_thresholds(self):
        plain = conservative_thresholds(SystemParams(cipher=cipher_preset("none")))
        prince = conservative_thresholds(SYS)
        assert prince.low_threshold > plain.low_threshold
        assert prince.high_threshold > plain.high_threshold

    def test_infeasible_with_aes(self):
        sys = SystemParams(cipher=cipher_preset("aes"))
        policy = ConservativePolicy(conservative_thresholds(sys))
        with pytest.raises(NoForwardProgressError):
            policy.check_feasible(sys, PROG)

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            ConservativeConfig(low_threshold=100.0, high_threshold=50.0)


class TestPolicyFactory:
    """Test policy construction by name"""

    def test_create_each(self):
        table = table_with(100, 20)
        assert PolicyFactory.create("qlearn", SYS, PROG, table=table).name == "qlearn"
        assert PolicyFactory.create("periodic", SYS, PROG).name == "periodic"
        assert PolicyFactory.create("conservative", SYS, PROG).name == "conservative"

    def test_periodic_config_passed(self):
        policy = PolicyFactory.create("periodic", SYS, periodic=PeriodicConfig(1500))
        assert policy.cfg.threshold_insts == 1500

    def test_unknown_policy(self):
        with pytest.raises(ConfigError, match="unknown policy"):
            PolicyFactory.create("greedy", SYS)

    def test_qlearn_needs_table(self):
        with pytest.raises(ConfigError):
            PolicyFactory.create("qlearn", SYS)

    def test_power_off_level_validated(self):
        with pytest.raises(ValueError):
            PolicyDecision.power_off_until(-1)
