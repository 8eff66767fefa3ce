"""Offline Q-learning over simulated super-interval episodes"""
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.ckpt.energy.markov import TransitionModel
from src.ckpt.learning.environment import (
    CheckpointEnvironment,
    LevelOutcomes,
    SimulatedEnvironment,
    TrainingTrace,
)
from src.ckpt.learning.qtable import QTable, choose_action
from src.ckpt.mdp.core import MdpState, immediate_cost, next_state, reachable_count
from src.ckpt.system.costs import checkpoint_cost
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.ckpt.validation import build_strict, raise_if
from src.models.actions import Action

EPSILON_SCHEDULES = ("linear", "exponential")


@dataclass(frozen=True)
class TrainConfig:
    """Q-learning hyperparameters and the synthetic training trace"""
    gamma: float = 1.0
    epsilon_start: float = 0.9
    epsilon_end: float = 0.1
    epsilon_decay: str = "linear"
    episodes: int = 5_000
    seed: int = 0
    trace_samples: int = 200_000
    sample_period_s: float = 0.005
    warmup_intervals: int = 0
    max_steps_per_episode: int = 0  # 0 means 50 * S
    tail_fraction: float = 0.05
    shared_updates: bool = True

    def __post_init__(self):
        problems = []
        if not 0 < self.gamma <= 1:
            problems.append("gamma: must be in (0, 1]")
        if not 0 < self.epsilon_end <= self.epsilon_start < 1:
            problems.append("epsilon: need 0 < epsilon_end <= epsilon_start < 1")
        if self.epsilon_decay not in EPSILON_SCHEDULES:
            problems.append(f"epsilon_decay: must be one of {', '.join(EPSILON_SCHEDULES)}")
        if self.episodes < 0:
            problems.append("episodes: must be >= 0")
        if self.trace_samples < 2:
            problems.append("trace_samples: must be >= 2")
        if not self.sample_period_s > 0:
            problems.append("sample_period_s: must be > 0")
        if self.warmup_intervals < 0:
            problems.append("warmup_intervals: must be >= 0")
        if self.max_steps_per_episode < 0:
            problems.append("max_steps_per_episode: must be >= 0")
        if not 0 < self.tail_fraction <= 1:
            problems.append("tail_fraction: must be in (0, 1]")
        raise_if(problems, "train")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        return build_strict(cls, data, "train")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def epsilon(self, episode: int) -> float:
        """Exploration rate for a 0-based episode number"""
        if self.episodes <= 1:
            return self.epsilon_start
        frac = episode / (self.episodes - 1)
        if self.epsilon_decay == "exponential":
            return self.epsilon_start * (self.epsilon_end / self.epsilon_start) ** frac
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


@dataclass
class TrainingReport:
    """Telemetry of one training run"""
    episodes: int
    episode_costs: np.ndarray
    epsilons: np.ndarray
    coverage_pct: float
    unvisited_states: int
    max_delta_tail: float
    total_steps: int
    truncated_episodes: int = 0

    @property
    def final_epsilon(self) -> float:
        return float(self.epsilons[-1]) if len(self.epsilons) else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "episodes": self.episodes,
            "final_epsilon": self.final_epsilon,
            "coverage_pct": self.coverage_pct,
            "unvisited_states": self.unvisited_states,
            "max_delta_tail": self.max_delta_tail,
            "total_steps": self.total_steps,
            "truncated_episodes": self.truncated_episodes,
            "mean_episode_cost": float(self.episode_costs.mean()) if self.episodes else 0.0,
        }

    def print_summary(self, title: str = "TRAINING REPORT") -> None:
        print(f"\n{'='*70}")
        print(f"🧠 {title}")
        print(f"{'='*70}")
        print(f"  Episodes:           {self.episodes}")
        print(f"  Steps:              {self.total_steps}")
        print(f"  Final epsilon:      {self.final_epsilon:.3f}")
        print(f"  Visit coverage:     {self.coverage_pct:.2f}% ({self.unvisited_states} reachable states unvisited)")
        print(f"  Max |dQ| (tail):    {self.max_delta_tail:.4g}")
        if self.episodes:
            tail = max(1, self.episodes // 20)
            print(f"  Mean cost (tail):   {self.episode_costs[-tail:].mean():.1f} cycles")
        if self.truncated_episodes:
            print(f"  Truncated:          {self.truncated_episodes} episodes hit the step limit")
        print(f"{'='*70}\n")


def step_cost(
    s: MdpState,
    a: Action,
    failure: bool,
    aborted: bool,
    t_cp: float,
    N: int,
    cpi: float,
    closing: bool = False,
) -> Tuple[float, Optional[MdpState]]:
    """
    Cost in cycles and the (p, c) successor of one environment step.

    A closing step runs the last interval and the mandatory checkpoint;
    its successor is None once the checkpoint commits.
    """
    if closing:
        if not failure:
            return t_cp, None
        if aborted:
            return t_cp + (s.p + 1 - s.c) * N * cpi, MdpState(s.c, s.c, 0)
        return (s.p - s.c) * N * cpi, MdpState(s.c, s.c, 0)
    if aborted:
        return t_cp + (s.p - s.c) * N * cpi, MdpState(s.c, s.c, 0)
    cost = immediate_cost(s, a, failure, t_cp, N)
    if a == Action.PROC and failure:
        cost *= cpi
    return cost, next_state(s, a, failure, 0)


def shared_update(
    q: QTable,
    p: int,
    a: Action,
    outcomes: LevelOutcomes,
    t_cp: float,
    N: int,
    cpi: float,
    gamma: float = 1.0,
    closing: bool = False,
) -> float:
    """
    Apply one sampled step to every (c, b) of progress row p; returns max |delta Q|.

    Battery outcomes do not depend on (p, c), so the sample is valid for
    each checkpoint counter c <= p. `outcomes` holds the same draw seen
    from every battery level. A closing step updates both actions.
    """
    S, B = q.S, q.B
    values = q.values.reshape(S, S, B, 2)
    visits = q.visits.reshape(S, S, B, 2)
    c = np.arange(p + 1)[:, None]
    b_next = outcomes.b_next[None, :]
    failure = outcomes.failure[None, :]
    aborted = outcomes.aborted[None, :]
    rollback = (p - c) * N * cpi
    restart = gamma * values[c, c, b_next].min(axis=-1)

    if closing:
        lost = np.where(aborted, t_cp + rollback + N * cpi, rollback)
        target = np.where(failure, lost + restart, t_cp)
        actions = (Action.PROC, Action.CHPT)
    elif a == Action.PROC:
        onward = gamma * values[p + 1, c, b_next].min(axis=-1)
        target = np.where(failure, rollback + restart, onward)
        actions = (a,)
    else:
        committed = gamma * values[p + 1, p, outcomes.b_next].min(axis=-1)[None, :]
        retry = gamma * values[p, p, outcomes.b_next].min(axis=-1)[None, :]
        target = t_cp + np.where(aborted, rollback + restart, np.where(failure, retry, committed))
        actions = (a,)

    delta = 0.0
    for act in actions:
        n = visits[p, :p + 1, :, act]
        n += 1
        old = values[p, :p + 1, :, act]
        step = (target - old) / n
        old += step
        delta = max(delta, float(np.abs(step).max()))
    return delta


def train(
    sys: SystemParams,
    prog: ProgramSpec,
    env: Union[TransitionModel, CheckpointEnvironment],
    cfg: TrainConfig,
    verbose: bool = False,
) -> Tuple[QTable, TrainingReport]:
    """
    Learn Q-values for the scheduling MDP of `sys`.

    `env` is either a harvesting model (a seeded synthetic training trace
    is generated from it) or a ready-made environment. An episode ends
    when the mandatory checkpoint after the last interval commits.
    """
    S, B, N = sys.super_interval, sys.battery_levels, sys.interval_insts
    if isinstance(env, TransitionModel):
        trace = TrainingTrace(env, cfg.trace_samples, cfg.sample_period_s, cfg.warmup_intervals)
        env = SimulatedEnvironment(sys, prog, trace, seed=cfg.seed)
    if env.battery_levels != B:
        raise ValueError(f"environment has {env.battery_levels} battery levels, system has {B}")

    t_cp = float(checkpoint_cost(sys, prog).latency_cycles)
    max_steps = cfg.max_steps_per_episode or 50 * S
    tail_start = cfg.episodes - max(1, math.ceil(cfg.tail_fraction * cfg.episodes))
    rng = np.random.default_rng(cfg.seed)
    q = QTable(S=S, B=B, episodes=cfg.episodes, seed=cfg.seed, gamma=cfg.gamma)

    costs = np.zeros(cfg.episodes)
    epsilons = np.zeros(cfg.episodes)
    max_delta_tail = 0.0
    total_steps = 0
    truncated = 0
    log_every = max(1, cfg.episodes // 10)

    logger.info(
        f"Training {cfg.episodes} episodes (S={S}, B={B}, seed={cfg.seed}, "
        f"shared updates {'on' if cfg.shared_updates else 'off'})"
    )
    for episode in range(cfg.episodes):
        eps = cfg.epsilon(episode)
        epsilons[episode] = eps
        s = MdpState(0, 0, env.reset(rng))
        total = 0.0
        for _ in range(max_steps):
            closing = s.p == S - 1
            a = choose_action(q, s, eps, rng)
            if cfg.shared_updates:
                outcomes = env.level_outcomes(a, rng, closing=closing)
                delta = shared_update(q, s.p, a, outcomes, t_cp, N, sys.cpi, cfg.gamma, closing)
            outcome = env.close(s, rng) if closing else env.step(s, a, rng)
            cost, nxt = step_cost(s, a, outcome.failure, outcome.aborted, t_cp, N, sys.cpi, closing)
            if nxt is not None:
                nxt = MdpState(nxt.p, nxt.c, outcome.b_next)
            if not cfg.shared_updates:
                delta = max(q.update(s, act, cost, nxt, cfg.gamma) for act in (Action if closing else (a,)))
            if episode >= tail_start and delta > max_delta_tail:
                max_delta_tail = delta
            total += cost
            total_steps += 1
            if nxt is None:
                break
            s = nxt
        else:
            truncated += 1
        costs[episode] = total
        if verbose and (episode + 1) % log_every == 0:
            recent = costs[max(0, episode + 1 - log_every):episode + 1].mean()
            logger.info(f"  episode {episode + 1}/{cfg.episodes}: eps={eps:.3f}, mean cost {recent:.1f}")

    reachable = reachable_count(S, B)
    visited = _visited_reachable(q)
    report = TrainingReport(
        episodes=cfg.episodes,
        episode_costs=costs,
        epsilons=epsilons,
        coverage_pct=100.0 * visited / reachable,
        unvisited_states=reachable - visited,
        max_delta_tail=max_delta_tail,
        total_steps=total_steps,
        truncated_episodes=truncated,
    )
    if truncated:
        logger.warning(f"{truncated} episodes stopped at the {max_steps}-step limit")
    logger.info(f"Training done: coverage {report.coverage_pct:.2f}%, max |dQ| tail {max_delta_tail:.4g}")
    return q, report


def _visited_reachable(q: QTable) -> int:
    mask = q.visited_states().reshape(q.S, q.S, q.B)
    p, c = np.meshgrid(np.arange(q.S), np.arange(q.S), indexing="ij")
    return int(mask[c <= p].sum())


def q_profile(q: QTable, p: int, c: int) -> pd.DataFrame:
    """Q-values of both actions across battery levels for one (PrC, CC) pair"""
    rows = []
    for b in range(q.B):
        s = MdpState(p, c, b).validate(q.S, q.B)
        q_chpt = q.q(s, Action.CHPT)
        q_proc = q.q(s, Action.PROC)
        rows.append({
            "prc": p,
            "cc": c,
            "battery_level": b,
            "q_chpt": q_chpt,
            "q_proc": q_proc,
            "preferred": "chpt" if q_chpt < q_proc else "proc",
        })
    return pd.DataFrame(rows, columns=["prc", "cc", "battery_level", "q_chpt", "q_proc", "preferred"])


def _chpt_mask(q: QTable, p: int, c: int) -> np.ndarray:
    base = (p * q.S + c) * q.B
    block = q.values[base:base + q.B]
    return block[:, Action.CHPT] < block[:, Action.PROC]


def crossing_level(q: QTable, p: int, c: int) -> int:
    """Highest battery level at which checkpointing is preferred, -1 if none"""
    MdpState(p, c, 0).validate(q.S, q.B)
    levels = np.flatnonzero(_chpt_mask(q, p, c))
    return int(levels[-1]) if levels.size else -1


def threshold_violations(q: QTable, pairs: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """(p, c) pairs whose checkpoint-preferred levels are not a contiguous low region"""
    bad = []
    for p, c in pairs:
        mask = _chpt_mask(q, p, c)
        top = crossing_level(q, p, c)
        if top >= 0 and not mask[: top + 1].all():
            bad.append((p, c))
    return bad
