"""Reproducibility manifest written next to every command's outputs"""
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.ckpt import __version__
from src.ckpt.simulation.export import write_json

PathLike = Union[str, Path]
MANIFEST_NAME = "manifest.json"


def file_digest(path: PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ExperimentManifest:
    """
    Config snapshot, seeds, input digests and output paths of one command.

    No timestamps are recorded so reruns produce identical manifests.
    """
    command: str
    config: Dict[str, Any]
    seeds: List[int] = field(default_factory=list)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    trace_digests: Dict[str, str] = field(default_factory=dict)
    tool_version: str = __version__

    def add_input(self, path: Optional[PathLike]) -> None:
        if path is not None:
            self.inputs[str(path)] = file_digest(path)

    def add_output(self, path: PathLike, base: Optional[Path] = None) -> None:
        path = Path(path)
        key = str(path.relative_to(base)) if base and path.is_relative_to(base) else str(path)
        self.outputs[key] = file_digest(path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "config": self.config,
            "seeds": list(self.seeds),
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "trace_digests": dict(sorted(self.trace_digests.items())),
        }

    def write(self, out_dir: PathLike) -> Path:
        return write_json(self.to_dict(), Path(out_dir) / MANIFEST_NAME)
