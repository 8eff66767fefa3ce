"""Trace CSV and transition-model JSON files"""
import json
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from loguru import logger

from src.ckpt.energy.markov import TransitionModel
from src.ckpt.energy.trace import PowerLevelSet, PowerTrace
from src.ckpt.errors import TraceFormatError

TRACE_COLUMNS = ["time_s", "power_mw"]
UNIFORMITY_TOLERANCE = 0.01

PathLike = Union[str, Path]


def read_trace_csv(path: PathLike) -> PowerTrace:
    """Load a `time_s,power_mw` trace and check that sampling is uniform"""
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise TraceFormatError("empty trace")

    if list(df.columns) != TRACE_COLUMNS:
        raise TraceFormatError(
            f"expected header {','.join(TRACE_COLUMNS)}, got {','.join(map(str, df.columns))}",
            row=1,
        )
    if df.empty:
        raise TraceFormatError("empty trace")

    values = {}
    for column in TRACE_COLUMNS:
        parsed = pd.to_numeric(df[column], errors="coerce")
        bad = np.flatnonzero(parsed.isna().to_numpy())
        if bad.size:
            # +2: one for the header, one for 1-based line numbers
            raise TraceFormatError("not a number", row=int(bad[0]) + 2, field=column)
        values[column] = parsed.to_numpy(dtype=np.float64)

    negative = np.flatnonzero(values["power_mw"] < 0)
    if negative.size:
        raise TraceFormatError("negative power", row=int(negative[0]) + 2, field="power_mw")

    times = values["time_s"]
    if times.size < 2:
        raise TraceFormatError("need at least 2 rows to infer the sample period")
    steps = np.diff(times)
    period = float(np.median(steps))
    if period <= 0:
        raise TraceFormatError("time_s must be increasing", field="time_s")
    off = np.flatnonzero(np.abs(steps - period) > UNIFORMITY_TOLERANCE * period)
    if off.size:
        raise TraceFormatError(
            f"non-uniform sampling (median step {period:g} s)", row=int(off[0]) + 3, field="time_s"
        )

    logger.debug(f"Loaded {times.size} samples from {path} (period {period:g} s)")
    return PowerTrace(sample_period=period, samples=values["power_mw"])


def write_trace_csv(trace: PowerTrace, path: PathLike) -> None:
    df = pd.DataFrame({
        "time_s": np.arange(len(trace)) * trace.sample_period,
        "power_mw": trace.samples,
    })
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")


def model_to_dict(model: TransitionModel) -> dict:
    return {
        "levels_mw": model.levels.levels.tolist(),
        "counts": model.counts.tolist(),
        "probs": model.probs.tolist(),
    }


def model_from_dict(data: dict) -> TransitionModel:
    for key in ("levels_mw", "counts", "probs"):
        if key not in data:
            raise TraceFormatError("missing field", field=key)
    try:
        levels = PowerLevelSet(levels=np.array(data["levels_mw"], dtype=np.float64))
    except (TypeError, ValueError) as e:
        raise TraceFormatError(str(e), field="levels_mw") from e
    try:
        return TransitionModel(
            levels=levels,
            counts=np.array(data["counts"], dtype=np.int64),
            probs=np.array(data["probs"], dtype=np.float64),
        )
    except (TypeError, ValueError) as e:
        field = "probs" if "probs" in str(e) else "counts"
        raise TraceFormatError(str(e), field=field) from e


def read_model_json(path: PathLike) -> TransitionModel:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"invalid JSON: {e.msg}", row=e.lineno) from e
    if not isinstance(data, dict):
        raise TraceFormatError("model file must contain a JSON object")
    return model_from_dict(data)


def write_model_json(model: TransitionModel, path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(model), f, indent=2)
        f.write("\n")
