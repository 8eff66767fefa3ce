"""Experiment configuration: JSON file plus environment overrides"""
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from dotenv import load_dotenv

from src.ckpt.errors import ConfigError
from src.ckpt.learning.trainer import TrainConfig
from src.ckpt.policies.conservative import ConservativeConfig
from src.ckpt.policies.periodic import PeriodicConfig
from src.ckpt.simulation.simulator import RunConfig
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.ckpt.validation import build_strict
from src.models.actions import PolicyName

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class EnvironmentConfig:
    """Process-level settings; CKPT_* environment variables win over the file"""
    log_level: str = "INFO"
    output_dir: str = "results"
    batch_size: int = 4

    def __post_init__(self):
        problems = []
        if self.log_level.upper() not in LOG_LEVELS:
            problems.append(f"log_level: must be one of {', '.join(LOG_LEVELS)}")
        if self.batch_size < 1:
            problems.append("batch_size: must be >= 1")
        if problems:
            raise ConfigError(problems, "environment")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnvironmentConfig":
        return build_strict(cls, data, "environment")


def _default_programs() -> Tuple[ProgramSpec, ...]:
    return (ProgramSpec(),)


def _all_policies() -> Tuple[str, ...]:
    return tuple(p.value for p in PolicyName)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a train/eval/sweep command needs"""
    system: SystemParams = field(default_factory=SystemParams)
    programs: Tuple[ProgramSpec, ...] = field(default_factory=_default_programs)
    train: TrainConfig = field(default_factory=TrainConfig)
    policy: Tuple[str, ...] = field(default_factory=_all_policies)
    periodic: PeriodicConfig = field(default_factory=PeriodicConfig)
    conservative: Optional[ConservativeConfig] = None
    run: RunConfig = field(default_factory=RunConfig)
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build from a JSON object; every problem in every section is
        reported together.
        """
        if not isinstance(data, dict):
            raise ConfigError(["expected a JSON object"])
        parsers = {
            "system": SystemParams.from_dict,
            "programs": _parse_programs,
            "train": TrainConfig.from_dict,
            "policy": _parse_policies,
            "periodic": PeriodicConfig.from_dict,
            "conservative": _parse_conservative,
            "run": RunConfig.from_dict,
            "environment": EnvironmentConfig.from_dict,
        }
        problems = [f"unknown key '{key}'" for key in data if key not in parsers]
        kwargs = {}
        for key, parse in parsers.items():
            if key not in data:
                continue
            try:
                kwargs[key] = parse(data[key])
            except ConfigError as e:
                problems.extend(f"{key}.{p}" for p in e.problems)
        if problems:
            raise ConfigError(problems)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError([f"line {e.lineno}: {e.msg}"], str(path))
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "ExperimentConfig":
        """File (if any), then CKPT_* overrides"""
        config = cls.from_file(path) if path else cls()
        return config.from_env()

    def from_env(self) -> "ExperimentConfig":
        """Apply CKPT_LOG_LEVEL, CKPT_OUTPUT_DIR and CKPT_BATCH_SIZE"""
        load_dotenv()
        env = self.environment
        batch_size = os.getenv("CKPT_BATCH_SIZE")
        try:
            batch = int(batch_size) if batch_size else env.batch_size
        except ValueError:
            raise ConfigError([f"CKPT_BATCH_SIZE: expected integer, got {batch_size!r}"], "environment")
        updated = EnvironmentConfig(
            log_level=os.getenv("CKPT_LOG_LEVEL", env.log_level).upper(),
            output_dir=os.getenv("CKPT_OUTPUT_DIR", env.output_dir),
            batch_size=batch,
        )
        return replace(self, environment=updated)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system.to_dict(),
            "programs": [p.to_dict() for p in self.programs],
            "train": self.train.to_dict(),
            "policy": list(self.policy),
            "periodic": self.periodic.to_dict(),
            "conservative": self.conservative.to_dict() if self.conservative else None,
            "run": self.run.to_dict(),
            "environment": asdict(self.environment),
        }

    def with_system(self, system: SystemParams) -> "ExperimentConfig":
        return replace(self, system=system)


def _parse_programs(data: Any) -> Tuple[ProgramSpec, ...]:
    items = data if isinstance(data, list) else [data]
    if not items:
        raise ConfigError(["at least one program is required"], "programs")
    programs, problems = [], []
    for i, item in enumerate(items):
        try:
            programs.append(ProgramSpec.from_dict(item))
        except ConfigError as e:
            problems.extend(f"[{i}].{p}" for p in e.problems)
    if problems:
        raise ConfigError(problems, "programs")
    return tuple(programs)


def _parse_policies(data: Any) -> Tuple[str, ...]:
    names: List[str] = data if isinstance(data, list) else [data]
    known = {p.value for p in PolicyName}
    bad = [f"unknown policy '{n}'" for n in names if n not in known]
    if bad or not names:
        raise ConfigError(bad or ["at least one policy is required"], "policy")
    return tuple(names)


def _parse_conservative(data: Any) -> Optional[ConservativeConfig]:
    return None if data is None else ConservativeConfig.from_dict(data)
