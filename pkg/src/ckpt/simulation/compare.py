"""Paired multi-seed comparison of policies"""
import asyncio
from dataclasses import replace
from typing import List, Optional, Sequence

import pandas as pd
from loguru import logger

from src.ckpt.policies.base import OnlinePolicy
from src.ckpt.simulation.simulator import RunConfig, SimResult, run
from src.ckpt.system.params import ProgramSpec, SystemParams

RESULT_COLUMNS = [
    "benchmark",
    "policy",
    "seed",
    "normalized_runtime",
    "exec_time_s",
    "n_cps",
    "n_rollbacks",
    "rollback_cost_s",
    "off_time_s",
]


async def run_many(
    prog: ProgramSpec,
    sys: SystemParams,
    policies: Sequence[OnlinePolicy],
    run_cfg: RunConfig,
    n_seeds: int,
    batch_size: int = 1,
    verbose: bool = False,
) -> List[SimResult]:
    """
    Run every (policy, seed) pair concurrently.

    Seeds are run_cfg.seed, run_cfg.seed + 1, ...; every policy sees the
    same traces. Results come back sorted by (policy, seed).
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds}")
    if batch_size < 1:
        logger.warning(f"Invalid batch_size {batch_size}, using 1")
        batch_size = 1

    semaphore = asyncio.Semaphore(batch_size)
    jobs = [(policy, run_cfg.seed + i) for policy in policies for i in range(n_seeds)]
    total = len(jobs)
    completed = 0

    async def run_one(policy: OnlinePolicy, seed: int) -> SimResult:
        nonlocal completed
        async with semaphore:
            result = await asyncio.to_thread(run, prog, policy, sys, replace(run_cfg, seed=seed))
            completed += 1
            if verbose:
                logger.info(f"Progress: {completed}/{total} ({policy.name}, seed {seed})")
            return result

    results = await asyncio.gather(*(run_one(policy, seed) for policy, seed in jobs))
    return sorted(results, key=lambda r: (r.policy, r.seed))


def results_frame(results: Sequence[SimResult]) -> pd.DataFrame:
    rows = [
        {
            "benchmark": r.program,
            "policy": r.policy,
            "seed": r.seed,
            "normalized_runtime": r.normalized_runtime,
            "exec_time_s": r.exec_time_s,
            "n_cps": r.n_checkpoints,
            "n_rollbacks": r.n_rollbacks,
            "rollback_cost_s": r.rollback_cost_s,
            "off_time_s": r.off_time_s,
        }
        for r in results
    ]
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return frame.sort_values(["benchmark", "policy", "seed"], kind="stable").reset_index(drop=True)


async def compare(
    prog: ProgramSpec,
    sys: SystemParams,
    policies: Sequence[OnlinePolicy],
    run_cfg: RunConfig,
    n_seeds: int,
    batch_size: int = 1,
) -> pd.DataFrame:
    """Per-seed comparison table, one row per (policy, seed)"""
    results = await run_many(prog, sys, policies, run_cfg, n_seeds, batch_size)
    return results_frame(results)


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Per-policy means of the comparison table"""
    return (
        frame.groupby(["benchmark", "policy"], sort=True)
        .agg(
            mean_normalized_runtime=("normalized_runtime", "mean"),
            mean_cps=("n_cps", "mean"),
            mean_rollbacks=("n_rollbacks", "mean"),
            mean_rollback_cost_s=("rollback_cost_s", "mean"),
            mean_off_time_s=("off_time_s", "mean"),
            seeds=("seed", "count"),
        )
        .reset_index()
    )


def print_comparison(frame: pd.DataFrame, title: Optional[str] = None) -> None:
    summary = summarize(frame)
    print(f"\n{'='*70}")
    print(f"📊 POLICY COMPARISON{f' ({title})' if title else ''}")
    print(f"{'='*70}")
    for row in summary.itertuples(index=False):
        print(f"  {row.benchmark:<10} {row.policy:<13} "
              f"runtime {row.mean_normalized_runtime:6.3f}x  "
              f"CPs {row.mean_cps:8.1f}  RBs {row.mean_rollbacks:7.1f}  "
              f"RB cost {row.mean_rollback_cost_s:.4f}s  ({row.seeds} seeds)")
    print(f"{'='*70}\n")
