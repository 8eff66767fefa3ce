"""Result files: JSON summaries and CSV tables"""
import json
from pathlib import Path
from typing import Any, Sequence, Union

import pandas as pd
from loguru import logger

from src.ckpt.simulation.simulator import Event, SimResult

PathLike = Union[str, Path]
EVENT_COLUMNS = ["time_s", "kind", "prc", "cc", "battery_nj"]


def events_frame(events: Sequence[Event]) -> pd.DataFrame:
    rows = [(e.time_s, e.kind.value, e.prc, e.cc, e.battery_nj) for e in events]
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """Stable CSV: header always present, '\\n' line endings, 12 significant digits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_events_csv(events: Sequence[Event], path: PathLike) -> Path:
    return write_csv(events_frame(events), path)


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_result_json(result: SimResult, path: PathLike) -> Path:
    return write_json(result.summary(), path)
