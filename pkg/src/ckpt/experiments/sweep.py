"""Sensitivity sweeps of the Q-learning policy over B, S or the cipher"""
import asyncio
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
from loguru import logger

from src.ckpt.config import ExperimentConfig
from src.ckpt.energy.markov import TransitionModel
from src.ckpt.errors import ConfigError
from src.ckpt.experiments.manifest import ExperimentManifest
from src.ckpt.experiments.pipeline import train_table
from src.ckpt.policies.qlearn import QLearningPolicy
from src.ckpt.simulation.export import write_csv
from src.ckpt.simulation.simulator import RunConfig, run
from src.ckpt.system.params import SystemParams, cipher_preset
from src.models.events import CipherName

SWEEP_COLUMNS = ["param", "value", "mean_normalized_runtime", "relative_speedup"]
SWEEP_PARAMS = ("B", "S", "cipher")
SWEEP_FILE = "sweep.csv"


def parse_values(param: str, text: str) -> List[str]:
    values = [v.strip() for v in text.split(",") if v.strip()]
    problems = []
    if param not in SWEEP_PARAMS:
        problems.append(f"param: must be one of {', '.join(SWEEP_PARAMS)}")
    if not values:
        problems.append("values: at least one value is required")
    for v in values:
        if param in ("B", "S"):
            if not v.isdigit() or int(v) < 2:
                problems.append(f"values: {param} must be an integer >= 2, got '{v}'")
        elif param == "cipher" and v not in {c.value for c in CipherName}:
            problems.append(f"values: unknown cipher '{v}'")
    if problems:
        raise ConfigError(problems, "sweep")
    return values


def system_for(base: SystemParams, param: str, value: str) -> SystemParams:
    if param == "B":
        return replace(base, battery_levels=int(value))
    if param == "S":
        return replace(base, super_interval=int(value))
    return replace(base, cipher=cipher_preset(value))


def _mean_runtime(config: ExperimentConfig, model: TransitionModel, run_cfg: RunConfig, n_seeds: int) -> float:
    """Retrain for this system, then evaluate qlearn on every program and seed"""
    _, report, table = train_table(config, model)
    runtimes = []
    for prog in config.programs:
        policy = QLearningPolicy(table, config.system)
        for i in range(n_seeds):
            result = run(prog, policy, config.system, replace(run_cfg, seed=run_cfg.seed + i))
            runtimes.append(result.normalized_runtime)
    return sum(runtimes) / len(runtimes)


async def run_sweep(
    config: ExperimentConfig,
    param: str,
    values: Sequence[str],
    model: TransitionModel,
    n_seeds: int,
    out_dir: Optional[Union[str, Path]] = None,
    model_path: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """
    Mean normalized runtime per value and speedup relative to the first value.

    Training uses config.train.seed; evaluation seeds start at config.run.seed.
    """
    run_cfg = replace(config.run, trace_source=model, record_events=False)
    semaphore = asyncio.Semaphore(config.environment.batch_size)

    async def one(value: str) -> float:
        cfg = config.with_system(system_for(config.system, param, value))
        async with semaphore:
            logger.info(f"Sweep {param}={value}: training and evaluating {n_seeds} seeds")
            return await asyncio.to_thread(_mean_runtime, cfg, model, run_cfg, n_seeds)

    means = await asyncio.gather(*(one(v) for v in values))
    first = means[0]
    frame = pd.DataFrame(
        [
            {"param": param, "value": v, "mean_normalized_runtime": m, "relative_speedup": first / m}
            for v, m in zip(values, means)
        ],
        columns=SWEEP_COLUMNS,
    )

    if out_dir is not None:
        out = Path(out_dir)
        manifest = ExperimentManifest(
            command=f"sweep {param}",
            config={**config.to_dict(), "sweep": {"param": param, "values": list(values)}},
            seeds=list(range(run_cfg.seed, run_cfg.seed + n_seeds)),
        )
        manifest.add_input(model_path)
        manifest.add_output(write_csv(frame, out / SWEEP_FILE), base=out)
        manifest.write(out)

    print_sweep(frame)
    return frame


def print_sweep(frame: pd.DataFrame) -> None:
    print(f"\n{'='*70}")
    print(f"📈 SENSITIVITY SWEEP")
    print(f"{'='*70}")
    for row in frame.itertuples(index=False):
        print(f"  {row.param}={row.value:<8} runtime {row.mean_normalized_runtime:6.3f}x  "
              f"speedup {row.relative_speedup:.3f}")
    print(f"{'='*70}\n")
