from typing import Optional, Union

from src.ckpt.errors import ConfigError
from src.ckpt.learning.action_bits import ActionBitTable
from src.ckpt.policies.base import OnlinePolicy
from src.ckpt.policies.conservative import ConservativeConfig, ConservativePolicy, conservative_thresholds
from src.ckpt.policies.periodic import PeriodicConfig, PeriodicPolicy
from src.ckpt.policies.qlearn import QLearningPolicy
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.models.actions import PolicyName


class PolicyFactory:
    """Factory for creating online policies"""

    @staticmethod
    def create(
        name: Union[str, PolicyName],
        sys: SystemParams,
        prog: Optional[ProgramSpec] = None,
        table: Optional[ActionBitTable] = None,
        periodic: Optional[PeriodicConfig] = None,
        conservative: Optional[ConservativeConfig] = None,
    ) -> OnlinePolicy:
        """
        Create a policy instance

        Args:
            name: Policy name
            sys: System parameters the policy runs against
            prog: Program (conservative thresholds use the system's worst case)
            table: Action-bit table, required for qlearn
            periodic: Periodic policy settings (defaults if omitted)
            conservative: Explicit thresholds (derived from `sys` if omitted)

        Returns:
            Initialized OnlinePolicy
        """
        try:
            name = PolicyName(name)
        except ValueError:
            raise ConfigError([f"policy: unknown policy '{name}'"], "policy")

        if name == PolicyName.QLEARN:
            if table is None:
                raise ConfigError(["policy: qlearn needs an action-bit table (--table)"], "policy")
            return QLearningPolicy(table, sys)

        elif name == PolicyName.PERIODIC:
            return PeriodicPolicy(periodic or PeriodicConfig())

        else:
            return ConservativePolicy(conservative or conservative_thresholds(sys, prog))
