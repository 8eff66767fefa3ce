"""Tabular Q-values over (state, action) with visit counts"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from loguru import logger

from src.ckpt.errors import DimensionMismatchError
from src.ckpt.mdp.core import MdpState, state_count, state_index
from src.models.actions import Action

PathLike = Union[str, Path]


@dataclass(eq=False)
class QTable:
    """
    Dense Q-values, one row per state index, column = Action value.

    Values start at 0 and visit counts only ever increase.
    """
    S: int
    B: int
    values: Optional[np.ndarray] = None
    visits: Optional[np.ndarray] = None
    episodes: int = 0
    seed: Optional[int] = None
    gamma: float = 1.0

    def __post_init__(self):
        shape = (state_count(self.S, self.B), len(Action))
        if self.values is None:
            self.values = np.zeros(shape, dtype=np.float64)
        if self.visits is None:
            self.visits = np.zeros(shape, dtype=np.uint32)
        if self.values.shape != shape or self.visits.shape != shape:
            raise DimensionMismatchError(
                f"Q-table arrays must have shape {shape}, got "
                f"{self.values.shape} and {self.visits.shape}"
            )

    def index(self, s: MdpState) -> int:
        return state_index(s, self.S, self.B)

    def q(self, s: MdpState, a: Action) -> float:
        return float(self.values[self.index(s), a])

    def min_q(self, s: MdpState) -> float:
        row = self.values[self.index(s)]
        return float(min(row[0], row[1]))

    def greedy(self, s: MdpState) -> Action:
        """Smaller Q wins; ties go to proc"""
        row = self.values[self.index(s)]
        return Action.CHPT if row[Action.CHPT] < row[Action.PROC] else Action.PROC

    def update(
        self,
        s: MdpState,
        a: Action,
        cost: float,
        s_next: Optional[MdpState],
        gamma: float = 1.0,
    ) -> float:
        """
        One Q-learning step with alpha = 1/n(s, a); returns |delta Q|.

        `s_next=None` marks a terminal transition (min Q of next = 0).
        """
        i = self.index(s)
        self.visits[i, a] += 1
        alpha = 1.0 / float(self.visits[i, a])
        future = 0.0 if s_next is None else self.min_q(s_next)
        old = self.values[i, a]
        new = old + alpha * (cost + gamma * future - old)
        self.values[i, a] = new
        return abs(new - old)

    def visited_states(self) -> np.ndarray:
        """Boolean mask over state indices with any action visited"""
        return self.visits.sum(axis=1) > 0


def q_update(
    q: QTable,
    s: MdpState,
    a: Action,
    cost: float,
    s_next: Optional[MdpState],
    gamma: float = 1.0,
) -> QTable:
    q.update(s, a, cost, s_next, gamma)
    return q


def choose_action(q: QTable, s: MdpState, epsilon: float, rng: np.random.Generator) -> Action:
    """Epsilon-greedy: uniform random action with probability epsilon"""
    if rng.random() < epsilon:
        return Action(int(rng.integers(len(Action))))
    return q.greedy(s)


def _sidecars(stem: Path):
    return stem.with_name(stem.name + ".values.bin"), stem.with_name(stem.name + ".visits.bin")


def _stem(path: PathLike) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix == ".json" else path


def qtable_header_path(path: PathLike) -> Path:
    """`qtable`, `qtable.json` -> `qtable.json`"""
    stem = _stem(path)
    return stem.with_name(stem.name + ".json")


def save_qtable(q: QTable, path: PathLike) -> Path:
    """
    Write `<stem>.json` plus little-endian sidecars.

    values: float64, (state, action) order with action fastest.
    visits: uint32, same order.
    """
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    values_path, visits_path = _sidecars(stem)
    values_path.write_bytes(q.values.astype("<f8").tobytes())
    visits_path.write_bytes(q.visits.astype("<u4").tobytes())
    header = {
        "S": q.S,
        "B": q.B,
        "episodes": q.episodes,
        "seed": q.seed,
        "gamma": q.gamma,
        "values_file": values_path.name,
        "visits_file": visits_path.name,
    }
    header_path = qtable_header_path(stem)
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Saved Q-table ({q.S}x{q.S}x{q.B}) to {header_path}")
    return header_path


def load_qtable(path: PathLike) -> QTable:
    stem = _stem(path)
    header_path = qtable_header_path(stem)
    header = json.loads(header_path.read_text(encoding="utf-8"))
    S, B = int(header["S"]), int(header["B"])
    shape = (state_count(S, B), len(Action))
    values_path = header_path.with_name(header.get("values_file", _sidecars(stem)[0].name))
    visits_path = header_path.with_name(header.get("visits_file", _sidecars(stem)[1].name))
    values = np.frombuffer(values_path.read_bytes(), dtype="<f8")
    visits = np.frombuffer(visits_path.read_bytes(), dtype="<u4")
    if values.size != shape[0] * shape[1] or visits.size != values.size:
        raise DimensionMismatchError(
            f"Q-table sidecars hold {values.size}/{visits.size} entries, expected {shape[0] * shape[1]}"
        )
    return QTable(
        S=S,
        B=B,
        values=values.astype(np.float64).reshape(shape),
        visits=visits.astype(np.uint32).reshape(shape),
        episodes=int(header.get("episodes", 0)),
        seed=header.get("seed"),
        gamma=float(header.get("gamma", 1.0)),
    )
