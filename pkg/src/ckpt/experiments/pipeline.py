"""Command implementations behind the ckpt CLI"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import pandas as pd
from loguru import logger

from src.ckpt.config import ExperimentConfig
from src.ckpt.energy.markov import TransitionModel, default_transition_model, fit_transitions, generate_trace
from src.ckpt.energy.trace import PowerLevelSet, PowerTrace, quantize_trace, scale_trace
from src.ckpt.energy.trace_io import read_model_json, read_trace_csv, write_model_json, write_trace_csv
from src.ckpt.errors import ConfigError
from src.ckpt.experiments.manifest import ExperimentManifest
from src.ckpt.learning.action_bits import ActionBitTable, extract_action_bits, read_action_bits, write_action_bits
from src.ckpt.learning.qtable import QTable, load_qtable, qtable_header_path, save_qtable
from src.ckpt.learning.trainer import TrainingReport, q_profile, train
from src.ckpt.policies.factory import PolicyFactory
from src.ckpt.simulation.compare import print_comparison, results_frame, run_many
from src.ckpt.simulation.export import write_csv, write_events_csv, write_json, write_result_json
from src.ckpt.simulation.simulator import RunConfig, SimResult
from src.ckpt.system.params import ProgramSpec
from src.models.actions import PolicyName

PathLike = Union[str, Path]

TABLE_FILE = "action_bits.abt"
QTABLE_STEM = "qtable"
REPORT_FILE = "training_report.json"
RESULTS_FILE = "results.csv"
RUNS_DIR = "runs"


def _beside(path: Path) -> Path:
    return path.with_name(path.stem + ".manifest.json")


def _trace_manifest(command: str, output: Path, inputs: Sequence[Optional[PathLike]], **params) -> None:
    manifest = ExperimentManifest(command=command, config=params)
    for path in inputs:
        manifest.add_input(path)
    manifest.add_output(output)
    write_json(manifest.to_dict(), _beside(output))


# ---------------------------------------------------------------- trace

def trace_quantize(input_csv: PathLike, levels: PowerLevelSet, output: PathLike) -> PowerTrace:
    quantized = quantize_trace(read_trace_csv(input_csv), levels)
    write_trace_csv(quantized, output)
    _trace_manifest("trace quantize", Path(output), [input_csv], levels_mw=levels.levels.tolist())
    logger.info(f"Quantized {len(quantized)} samples onto {len(levels)} levels -> {output}")
    return quantized


def trace_fit(input_csv: PathLike, levels: PowerLevelSet, output: PathLike) -> TransitionModel:
    """Quantize (a no-op for quantized input) and count level transitions"""
    trace = quantize_trace(read_trace_csv(input_csv), levels)
    model = fit_transitions(trace, levels)
    write_model_json(model, output)
    _trace_manifest("trace fit", Path(output), [input_csv], levels_mw=levels.levels.tolist())
    logger.info(f"Fitted {model.n_levels}-level transition model from {len(trace)} samples -> {output}")
    return model


def trace_gen(
    model_path: Optional[PathLike],
    n_samples: int,
    seed: int,
    sample_period: float,
    output: PathLike,
    initial_level_index: int = 0,
) -> PowerTrace:
    model = read_model_json(model_path) if model_path else default_transition_model()
    trace = generate_trace(model, n_samples, sample_period, seed, initial_level_index)
    write_trace_csv(trace, output)
    _trace_manifest(
        "trace gen", Path(output), [model_path],
        n_samples=n_samples, seed=seed, sample_period=sample_period, initial_level_index=initial_level_index,
    )
    logger.info(f"Generated {n_samples} samples (seed {seed}) -> {output}")
    return trace


def trace_scale(input_csv: PathLike, target_mean_power: float, output: PathLike) -> PowerTrace:
    trace = scale_trace(read_trace_csv(input_csv), target_mean_power)
    write_trace_csv(trace, output)
    _trace_manifest("trace scale", Path(output), [input_csv], target_mean_power_mw=target_mean_power)
    return trace


# ---------------------------------------------------------------- train

@dataclass
class TrainArtifacts:
    table: ActionBitTable
    qtable: QTable
    report: TrainingReport
    table_path: Path
    qtable_path: Path


def load_model(model_path: Optional[PathLike]) -> TransitionModel:
    if model_path is None:
        logger.info("No harvesting model given; using the bundled default model")
        return default_transition_model()
    return read_model_json(model_path)


def train_table(
    config: ExperimentConfig,
    model: TransitionModel,
    program: Optional[ProgramSpec] = None,
    verbose: bool = False,
) -> Tuple[QTable, TrainingReport, ActionBitTable]:
    prog = program or config.programs[0]
    q, report = train(config.system, prog, model, config.train, verbose=verbose)
    return q, report, extract_action_bits(q)


def cmd_train(
    config: ExperimentConfig,
    out_dir: PathLike,
    model_path: Optional[PathLike] = None,
    verbose: bool = False,
) -> TrainArtifacts:
    """Train, then write the action-bit table, Q-table, report and manifest"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    q, report, table = train_table(config, load_model(model_path), verbose=verbose)

    table_path = write_action_bits(table, out / TABLE_FILE)
    qtable_path = save_qtable(q, out / QTABLE_STEM)
    report_path = write_json(report.to_dict(), out / REPORT_FILE)
    report.print_summary()

    manifest = ExperimentManifest(command="train", config=config.to_dict(), seeds=[config.train.seed])
    manifest.add_input(model_path)
    for path in (table_path, qtable_path, report_path):
        manifest.add_output(path, base=out)
    manifest.write(out)
    return TrainArtifacts(table, q, report, table_path, qtable_path)


# ---------------------------------------------------------------- eval

def load_source(trace_path: Optional[PathLike], model_path: Optional[PathLike]) -> Union[PowerTrace, TransitionModel, None]:
    if trace_path and model_path:
        raise ConfigError(["give either a trace or a model, not both"], "eval")
    if trace_path:
        return read_trace_csv(trace_path)
    if model_path:
        return read_model_json(model_path)
    return None


def build_policies(
    config: ExperimentConfig,
    prog: ProgramSpec,
    names: Sequence[str],
    table: Optional[ActionBitTable],
):
    return [
        PolicyFactory.create(
            name,
            config.system,
            prog,
            table=table,
            periodic=config.periodic,
            conservative=config.conservative,
        )
        for name in names
    ]


async def evaluate(
    config: ExperimentConfig,
    run_cfg: RunConfig,
    names: Sequence[str],
    table: Optional[ActionBitTable],
    n_seeds: int,
    verbose: bool = False,
) -> List[SimResult]:
    """Run every configured program under every policy for n_seeds paired seeds"""
    results: List[SimResult] = []
    for prog in config.programs:
        policies = build_policies(config, prog, names, table)
        results.extend(await run_many(
            prog, config.system, policies, run_cfg, n_seeds,
            batch_size=config.environment.batch_size, verbose=verbose,
        ))
    return results


async def cmd_eval(
    config: ExperimentConfig,
    out_dir: PathLike,
    n_seeds: int,
    table_path: Optional[PathLike] = None,
    trace_path: Optional[PathLike] = None,
    model_path: Optional[PathLike] = None,
    policies: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    events: bool = False,
    verbose: bool = False,
) -> pd.DataFrame:
    """Results CSV with one row per (benchmark, policy, seed), a JSON summary per run, plus manifest"""
    names = list(policies or config.policy)
    table = None
    if PolicyName.QLEARN.value in names:
        if table_path is None:
            raise ConfigError(["qlearn needs an action-bit table; pass --table"], "eval")
        table = read_action_bits(table_path)

    run_cfg = RunConfig(
        seed=config.run.seed if seed is None else seed,
        trace_source=load_source(trace_path, model_path),
        max_sim_time_s=config.run.max_sim_time_s,
        initial_battery_fraction=config.run.initial_battery_fraction,
        sample_period_s=config.run.sample_period_s,
        scale_to_target=config.run.scale_to_target,
        record_events=events,
    )
    seeds = list(range(run_cfg.seed, run_cfg.seed + n_seeds))
    if config.train.seed in seeds and not isinstance(run_cfg.trace_source, PowerTrace):
        logger.warning(f"Evaluation seeds include the training seed {config.train.seed}")

    results = await evaluate(config, run_cfg, names, table, n_seeds, verbose=verbose)
    frame = results_frame(results)

    out = Path(out_dir)
    manifest = ExperimentManifest(command="eval", config=config.to_dict(), seeds=seeds)
    for path in (table_path, trace_path, model_path):
        manifest.add_input(path)
    manifest.add_output(write_csv(frame, out / RESULTS_FILE), base=out)
    for r in results:
        key = f"{r.program}/{r.policy}/{r.seed}"
        manifest.trace_digests[key] = r.trace_digest
        stem = f"{r.program}_{r.policy}_{r.seed}"
        manifest.add_output(write_result_json(r, out / RUNS_DIR / f"{stem}.json"), base=out)
        if events:
            path = write_events_csv(r.events, out / "events" / f"{stem}.csv")
            manifest.add_output(path, base=out)
    manifest.write(out)

    print_comparison(frame)
    return frame


# ---------------------------------------------------------------- qprofile

def parse_pairs(text: str) -> List[Tuple[int, int]]:
    """'10:9,10:4' -> [(10, 9), (10, 4)]"""
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            p, c = (int(x) for x in item.split(":"))
        except ValueError:
            raise ConfigError([f"pairs: expected PRC:CC, got '{item}'"], "qprofile")
        pairs.append((p, c))
    if not pairs:
        raise ConfigError(["pairs: at least one PRC:CC pair is required"], "qprofile")
    return pairs


def cmd_qprofile(qtable_path: PathLike, pairs: Sequence[Tuple[int, int]], output: PathLike) -> pd.DataFrame:
    """Q-values per battery level for each (PrC, CC) pair"""
    q = load_qtable(qtable_path)
    frame = pd.concat([q_profile(q, p, c) for p, c in pairs], ignore_index=True)
    output = write_csv(frame, output)
    manifest = ExperimentManifest(
        command="qprofile",
        config={"pairs": [list(pc) for pc in pairs], "S": q.S, "B": q.B},
        seeds=[q.seed] if q.seed is not None else [],
    )
    manifest.add_input(qtable_header_path(qtable_path))
    manifest.add_output(output)
    write_json(manifest.to_dict(), _beside(output))
    return frame
