"""
Q-learning checkpoint scheduling for secure intermittent processors

Examples:
  python ckpt.py trace fit --levels 0,5,10,15,20,25 data/traces/rf.csv -o results/model.json
  python ckpt.py trace gen results/model.json -n 1000 --seed 7 -o results/synthetic.csv
  python ckpt.py train --config config.example.json --model results/model.json --out results/train
  python ckpt.py eval --config config.example.json --table results/train/action_bits.abt --seeds 5
  python ckpt.py sweep --param B --values 5,20,80 --seeds 3
  python ckpt.py qprofile results/train/qtable.json --pairs 10:9,10:4 -o results/qprofile.csv
"""
import argparse
import asyncio
import sys
import traceback
from dataclasses import replace
from typing import List, Optional

from loguru import logger

from src.ckpt.config import ExperimentConfig
from src.ckpt.energy.trace import PowerLevelSet
from src.ckpt.errors import ConfigError, NoForwardProgressError, TraceFormatError
from src.ckpt.experiments import pipeline
from src.ckpt.experiments.sweep import parse_values, run_sweep
from src.models.actions import PolicyName

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_NO_PROGRESS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Checkpoint scheduling simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # trace
    trace_parser = subparsers.add_parser("trace", help="Prepare power traces")
    trace_sub = trace_parser.add_subparsers(dest="trace_command", help="Trace operation")

    quantize = trace_sub.add_parser("quantize", help="Snap samples to power levels")
    quantize.add_argument("input", help="Trace CSV (time_s,power_mw)")
    quantize.add_argument("-o", "--output", required=True, help="Output trace CSV")
    quantize.add_argument("--levels", default=None, help="Comma-separated levels in mW (default: 0,5,...,25)")

    fit = trace_sub.add_parser("fit", help="Fit a Markov transition model")
    fit.add_argument("input", help="Trace CSV (time_s,power_mw)")
    fit.add_argument("-o", "--output", required=True, help="Output model JSON")
    fit.add_argument("--levels", default=None, help="Comma-separated levels in mW (default: 0,5,...,25)")

    gen = trace_sub.add_parser("gen", help="Generate a synthetic trace from a model")
    gen.add_argument("model", nargs="?", default=None, help="Model JSON (default: bundled model)")
    gen.add_argument("-n", "--samples", type=int, required=True, help="Number of samples")
    gen.add_argument("--seed", type=int, default=0, help="Random seed")
    gen.add_argument("--period", type=float, default=0.005, help="Sample period in seconds")
    gen.add_argument("--initial-level", type=int, default=0, help="Index of the first level")
    gen.add_argument("-o", "--output", required=True, help="Output trace CSV")

    scale = trace_sub.add_parser("scale", help="Scale a trace to a target mean power")
    scale.add_argument("input", help="Trace CSV (time_s,power_mw)")
    scale.add_argument("--target", type=float, default=0.6, help="Target mean power in mW")
    scale.add_argument("-o", "--output", required=True, help="Output trace CSV")

    # train
    train_parser = subparsers.add_parser("train", help="Train the Q-table and write the action-bit table")
    train_parser.add_argument("--config", default=None, help="Experiment config JSON")
    train_parser.add_argument("--model", default=None, help="Harvesting model JSON (default: bundled model)")
    train_parser.add_argument("--out", default=None, help="Output directory (default: <output_dir>/train)")
    train_parser.add_argument("--episodes", type=int, default=None, help="Override train.episodes")
    train_parser.add_argument("--seed", type=int, default=None, help="Override train.seed")

    # eval
    eval_parser = subparsers.add_parser("eval", help="Compare policies over paired seeds")
    eval_parser.add_argument("--config", default=None, help="Experiment config JSON")
    eval_parser.add_argument("--table", default=None, help="Action-bit table (required for qlearn)")
    source = eval_parser.add_mutually_exclusive_group()
    source.add_argument("--trace", default=None, help="Fixed trace CSV")
    source.add_argument("--model", default=None, help="Harvesting model JSON")
    eval_parser.add_argument(
        "--policy",
        action="append",
        choices=[p.value for p in PolicyName],
        default=None,
        help="Policy to run (repeatable; default: config policy list)",
    )
    eval_parser.add_argument("--seeds", type=int, default=5, help="Number of paired seeds")
    eval_parser.add_argument("--seed", type=int, default=None, help="First evaluation seed")
    eval_parser.add_argument("--out", default=None, help="Output directory (default: <output_dir>/eval)")
    eval_parser.add_argument("--events", action="store_true", help="Write per-run event CSVs")

    # sweep
    sweep_parser = subparsers.add_parser("sweep", help="Retrain and evaluate across parameter values")
    sweep_parser.add_argument("--param", required=True, choices=["B", "S", "cipher"], help="Parameter to sweep")
    sweep_parser.add_argument("--values", required=True, help="Comma-separated values")
    sweep_parser.add_argument("--config", default=None, help="Experiment config JSON")
    sweep_parser.add_argument("--model", default=None, help="Harvesting model JSON (default: bundled model)")
    sweep_parser.add_argument("--seeds", type=int, default=3, help="Evaluation seeds per value")
    sweep_parser.add_argument("--episodes", type=int, default=None, help="Override train.episodes")
    sweep_parser.add_argument("--out", default=None, help="Output directory (default: <output_dir>/sweep_<param>)")

    # qprofile
    qprofile_parser = subparsers.add_parser("qprofile", help="Export Q-values across battery levels")
    qprofile_parser.add_argument("qtable", help="Q-table header JSON")
    qprofile_parser.add_argument("--pairs", required=True, help="PRC:CC pairs, e.g. 10:9,10:4")
    qprofile_parser.add_argument("-o", "--output", required=True, help="Output CSV")

    return parser


def configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level)


def _levels(text: Optional[str]) -> PowerLevelSet:
    if not text:
        return PowerLevelSet.default()
    try:
        return PowerLevelSet.parse(text)
    except ValueError as e:
        raise ConfigError([f"levels: {e}"], "trace")


def _with_train_overrides(config: ExperimentConfig, episodes: Optional[int], seed: Optional[int]) -> ExperimentConfig:
    changes = {}
    if episodes is not None:
        changes["episodes"] = episodes
    if seed is not None:
        changes["seed"] = seed
    return replace(config, train=replace(config.train, **changes)) if changes else config


async def dispatch(args: argparse.Namespace, config: ExperimentConfig) -> int:
    output_dir = config.environment.output_dir

    if args.command == "trace":
        if args.trace_command == "quantize":
            pipeline.trace_quantize(args.input, _levels(args.levels), args.output)
        elif args.trace_command == "fit":
            pipeline.trace_fit(args.input, _levels(args.levels), args.output)
        elif args.trace_command == "gen":
            pipeline.trace_gen(args.model, args.samples, args.seed, args.period, args.output, args.initial_level)
        elif args.trace_command == "scale":
            pipeline.trace_scale(args.input, args.target, args.output)
        else:
            logger.error("Missing trace operation (quantize, fit, gen or scale)")
            return EXIT_USAGE
        return EXIT_OK

    elif args.command == "train":
        config = _with_train_overrides(config, args.episodes, args.seed)
        pipeline.cmd_train(config, args.out or f"{output_dir}/train", args.model, verbose=args.verbose)
        return EXIT_OK

    elif args.command == "eval":
        if args.seeds < 1:
            logger.error("--seeds must be >= 1")
            return EXIT_USAGE
        await pipeline.cmd_eval(
            config,
            args.out or f"{output_dir}/eval",
            n_seeds=args.seeds,
            table_path=args.table,
            trace_path=args.trace,
            model_path=args.model,
            policies=args.policy,
            seed=args.seed,
            events=args.events,
            verbose=args.verbose,
        )
        return EXIT_OK

    elif args.command == "sweep":
        values = parse_values(args.param, args.values)
        config = _with_train_overrides(config, args.episodes, None)
        await run_sweep(
            config,
            args.param,
            values,
            pipeline.load_model(args.model),
            args.seeds,
            out_dir=args.out or f"{output_dir}/sweep_{args.param}",
            model_path=args.model,
        )
        return EXIT_OK

    elif args.command == "qprofile":
        pipeline.cmd_qprofile(args.qtable, pipeline.parse_pairs(args.pairs), args.output)
        return EXIT_OK

    logger.error("No command given; see --help")
    return EXIT_USAGE


async def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        config = ExperimentConfig.load(getattr(args, "config", None))
        configure_logging("DEBUG" if args.verbose else config.environment.log_level)
        return await dispatch(args, config)
    except (ConfigError, TraceFormatError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except NoForwardProgressError as e:
        logger.error(str(e))
        return EXIT_NO_PROGRESS
    except FileNotFoundError as e:
        logger.error(f"File not found: {e.filename}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Command failed: {e}")
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
