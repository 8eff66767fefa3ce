"""Exact solution of small checkpointing MDPs with an explicit battery model"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from src.ckpt.learning.environment import CheckpointEnvironment, LevelOutcomes, StepOutcome
from src.ckpt.mdp.core import MdpState
from src.models.actions import Action

# outcome axis of the transition arrays
OK, FAILURE, ABORTED = 0, 1, 2


class TabularEnvironment(CheckpointEnvironment):
    """
    Battery dynamics given as explicit distributions.

    `proc[b, k, b2]` and `chpt[b, k, b2]` are the probabilities of outcome
    k (OK, FAILURE, ABORTED) ending at battery level b2 when the action is
    taken at level b. Outcomes do not depend on (p, c). The mandatory
    checkpoint that closes a super-interval never aborts.
    """

    def __init__(self, proc: np.ndarray, chpt: np.ndarray, initial: np.ndarray):
        proc = np.asarray(proc, dtype=np.float64)
        chpt = np.asarray(chpt, dtype=np.float64)
        initial = np.asarray(initial, dtype=np.float64)
        B = initial.shape[0]
        for name, arr in (("proc", proc), ("chpt", chpt)):
            if arr.shape != (B, 3, B):
                raise ValueError(f"{name} must have shape {(B, 3, B)}, got {arr.shape}")
            if np.any(arr < 0) or not np.allclose(arr.sum(axis=(1, 2)), 1.0, atol=1e-9):
                raise ValueError(f"{name} rows must be probability distributions")
        if np.any(proc[:, ABORTED, :] > 0):
            raise ValueError("proc cannot abort")
        if np.any(initial < 0) or not np.isclose(initial.sum(), 1.0, atol=1e-9):
            raise ValueError("initial must be a probability distribution")
        self.tables = {Action.PROC: proc, Action.CHPT: chpt}
        self.initial = initial
        self._flat = {a: t.reshape(B, 3 * B) for a, t in self.tables.items()}
        self._cum = {a: np.cumsum(f, axis=1) / f.sum(axis=1, keepdims=True) for a, f in self._flat.items()}

    @property
    def battery_levels(self) -> int:
        return self.initial.shape[0]

    def reset(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.battery_levels, p=self.initial))

    def step(self, state: MdpState, action: Action, rng: np.random.Generator) -> StepOutcome:
        B = self.battery_levels
        k, b_next = divmod(int(rng.choice(3 * B, p=self._flat[action][state.b])), B)
        return StepOutcome(k != OK, k == ABORTED, b_next)

    def level_outcomes(self, action: Action, rng: np.random.Generator, closing: bool = False) -> LevelOutcomes:
        """Inverse-CDF draw with one shared uniform across all levels"""
        cum = self._cum[Action.PROC if closing else action]
        # keeps the draw below every row's final cumulative value
        pick = np.argmax(cum > rng.random() * (1 - 1e-12), axis=1)
        k, b_next = np.divmod(pick, self.battery_levels)
        return LevelOutcomes(k != OK, k == ABORTED, b_next)

    @classmethod
    def deterministic(cls, proc_next, chpt_next, initial: np.ndarray) -> "TabularEnvironment":
        """
        Build from functions b -> (outcome, b_next), one per action.
        """
        B = len(initial)
        proc = np.zeros((B, 3, B))
        chpt = np.zeros((B, 3, B))
        for b in range(B):
            k, nb = proc_next(b)
            proc[b, k, nb] = 1.0
            k, nb = chpt_next(b)
            chpt[b, k, nb] = 1.0
        return cls(proc, chpt, initial)


@dataclass
class ExactSolution:
    """Optimal Q-values shaped (S, S, B, 2) and greedy checkpoint bits shaped (S, S, B)"""
    q: np.ndarray
    bits: np.ndarray
    iterations: int
    residual: float

    def action(self, s: MdpState) -> Action:
        return Action.CHPT if self.bits[s.p, s.c, s.b] else Action.PROC


def solve_exact(
    env: TabularEnvironment,
    S: int,
    t_cp: float,
    N: int,
    cpi: float = 1.0,
    tol: float = 1e-9,
    max_iter: Optional[int] = None,
) -> ExactSolution:
    """
    Undiscounted value iteration; a committed mandatory checkpoint is terminal.

    At p = S-1 the last interval runs and the mandatory checkpoint follows,
    so both action columns hold the same value. Entries with c > p stay 0.
    """
    B = env.battery_levels
    P = {a: env.tables[a] for a in (Action.PROC, Action.CHPT)}
    q = np.zeros((S, S, B, 2))
    V = np.zeros((S, S, B))
    max_iter = max_iter or 100_000

    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        residual = 0.0
        for p in range(S):
            for c in range(p + 1):
                rollback = (p - c) * N * cpi
                if p == S - 1:
                    T = P[Action.PROC]
                    total = T[:, OK, :].sum(axis=1) * t_cp + T[:, FAILURE, :].sum(axis=1) * rollback
                    total += T[:, FAILURE, :] @ V[c, c]
                    residual = max(residual, float(np.max(np.abs(total - q[p, c, :, Action.PROC]))))
                    q[p, c] = total[:, None]
                    V[p, c] = total
                    continue
                # outcome -> (cost, next (p, c))
                plans = {
                    Action.PROC: (
                        (0.0, (p + 1, c)),
                        (rollback, (c, c)),
                        (rollback, (c, c)),
                    ),
                    Action.CHPT: (
                        (t_cp, (p + 1, p)),
                        (t_cp, (p, p)),
                        (t_cp + rollback, (c, c)),
                    ),
                }
                for a, outcomes in plans.items():
                    T = P[a]
                    total = np.zeros(B)
                    for k, (cost, (np_, nc)) in enumerate(outcomes):
                        total += T[:, k, :].sum(axis=1) * cost + T[:, k, :] @ V[np_, nc]
                    residual = max(residual, float(np.max(np.abs(total - q[p, c, :, a]))))
                    q[p, c, :, a] = total
                V[p, c] = q[p, c].min(axis=1)
        if residual < tol:
            break
    else:
        logger.warning(f"Value iteration stopped after {max_iter} sweeps (residual {residual:.3g})")

    bits = q[..., Action.CHPT] < q[..., Action.PROC]
    logger.debug(f"Value iteration converged in {it} sweeps")
    return ExactSolution(q=q, bits=bits, iterations=it, residual=residual)
