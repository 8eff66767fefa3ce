"""Physical constants of the secure intermittent processor"""
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

from src.ckpt.errors import ConfigError
from src.ckpt.validation import build_strict, raise_if
from src.models.events import CipherName


@dataclass(frozen=True)
class CipherConfig:
    """Checkpoint cipher cost model (decrypt assumed to cost the same as encrypt)"""
    name: str = CipherName.PRINCE.value
    encrypt_energy_per_block: float = 1.6  # nJ per 8-byte block
    extra_latency_cycles: int = 82

    def __post_init__(self):
        problems = []
        if self.name not in {c.value for c in CipherName}:
            problems.append(f"name: unknown cipher '{self.name}'")
        if self.encrypt_energy_per_block < 0:
            problems.append("encrypt_energy_per_block: must be >= 0")
        if self.extra_latency_cycles < 0:
            problems.append("extra_latency_cycles: must be >= 0")
        raise_if(problems, "cipher")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CipherConfig":
        """Build from JSON; a bare string selects a preset"""
        if isinstance(data, str):
            return cipher_preset(data)
        return build_strict(cls, data, "cipher")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_CIPHER_PRESETS = {
    CipherName.NONE: (0.0, 0),
    CipherName.PRINCE: (1.6, 82),
    CipherName.AES: (9.8, 82),
}


def cipher_preset(name: str) -> CipherConfig:
    try:
        key = CipherName(name)
    except ValueError:
        raise ConfigError([f"name: unknown cipher '{name}'"], "cipher")
    energy, latency = _CIPHER_PRESETS[key]
    return CipherConfig(name=key.value, encrypt_energy_per_block=energy, extra_latency_cycles=latency)


@dataclass(frozen=True)
class SystemParams:
    """
    Processor, memory and battery constants.

    Units follow the field names: nJ per instruction, pJ per 4-byte NVM word,
    battery capacity in uJ. Internal cost functions work in nJ.
    """
    proc_energy_per_inst: float = 6.3
    nvm_read_energy_per_word: float = 65.16
    nvm_write_energy_per_word: float = 71.78
    battery_capacity: float = 2.0
    battery_levels: int = 20
    clock_hz: float = 1e5
    cpi: float = 1.0
    interval_insts: int = 500
    super_interval: int = 100
    rf_bytes: int = 128
    pc_bytes: int = 4
    cache_line_bytes: int = 32
    base_cp_latency_cycles: int = 82
    cipher: CipherConfig = field(default_factory=CipherConfig)
    data_cache_bytes: int = 8192
    nvm_log_energy_per_interval: float = 0.0
    target_mean_power_mw: float = 0.6

    def __post_init__(self):
        raise_if(self._problems(), "system")

    def _problems(self) -> List[str]:
        problems = []
        for name in (
            "proc_energy_per_inst",
            "nvm_read_energy_per_word",
            "nvm_write_energy_per_word",
            "battery_capacity",
            "clock_hz",
            "cpi",
            "target_mean_power_mw",
        ):
            if not getattr(self, name) > 0:
                problems.append(f"{name}: must be > 0")
        for name in ("interval_insts", "rf_bytes", "pc_bytes", "cache_line_bytes"):
            if getattr(self, name) < 1:
                problems.append(f"{name}: must be >= 1")
        if self.battery_levels < 2:
            problems.append("battery_levels: must be >= 2")
        if self.super_interval < 2:
            problems.append("super_interval: must be >= 2")
        if self.base_cp_latency_cycles < 0:
            problems.append("base_cp_latency_cycles: must be >= 0")
        if self.data_cache_bytes < self.cache_line_bytes:
            problems.append("data_cache_bytes: must hold at least one cache line")
        if self.nvm_log_energy_per_interval < 0:
            problems.append("nvm_log_energy_per_interval: must be >= 0")
        if not isinstance(self.cipher, CipherConfig):
            problems.append("cipher: expected a cipher config")
        return problems

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SystemParams":
        return build_strict(cls, data, "system", nested={"cipher": CipherConfig.from_dict})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def battery_capacity_nj(self) -> float:
        return self.battery_capacity * 1000.0

    @property
    def battery_quantum(self) -> Fraction:
        """Energy per battery level; quantum * B equals capacity exactly"""
        return Fraction(str(self.battery_capacity)) * 1000 / self.battery_levels

    @property
    def nvm_read_nj(self) -> float:
        return self.nvm_read_energy_per_word / 1000.0

    @property
    def nvm_write_nj(self) -> float:
        return self.nvm_write_energy_per_word / 1000.0

    @property
    def interval_duration_s(self) -> float:
        return self.interval_insts * self.cpi / self.clock_hz

    @property
    def state_count(self) -> int:
        return self.super_interval * self.super_interval * self.battery_levels


@dataclass(frozen=True)
class ProgramSpec:
    """Workload: total length and average dirty cache lines at a checkpoint"""
    name: str = "program"
    total_insts: int = 50_000
    dirty_lines_per_cp: float = 6.0

    def __post_init__(self):
        problems = []
        if not self.name:
            problems.append("name: must not be empty")
        if self.total_insts < 1:
            problems.append("total_insts: must be >= 1")
        if self.dirty_lines_per_cp < 0:
            problems.append("dirty_lines_per_cp: must be >= 0")
        raise_if(problems, "program")

    @classmethod
    def from_dict(cls, data: Any) -> "ProgramSpec":
        """Build from JSON; a bare string selects a benchmark preset"""
        if isinstance(data, str):
            return program_preset(data)
        return build_strict(cls, data, "program")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# Periodic checkpoint counts (x1000 instructions) of the evaluated benchmarks
PROGRAM_PRESETS: Dict[str, ProgramSpec] = {
    spec.name: spec
    for spec in (
        ProgramSpec("dfadd", 12_000, 6.0),
        ProgramSpec("mips", 69_000, 6.0),
        ProgramSpec("adpcm", 237_000, 6.0),
        ProgramSpec("gsm", 26_000, 6.0),
        ProgramSpec("motion", 58_000, 6.0),
        ProgramSpec("aes", 69_000, 6.0),
        ProgramSpec("fft", 17_000, 6.0),
    )
}


def program_preset(name: str) -> ProgramSpec:
    if name not in PROGRAM_PRESETS:
        known = ", ".join(sorted(PROGRAM_PRESETS))
        raise ConfigError([f"unknown benchmark '{name}' (known: {known})"], "program")
    return PROGRAM_PRESETS[name]
