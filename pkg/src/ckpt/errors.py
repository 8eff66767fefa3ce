"""Exception types shared across the toolkit"""
from typing import List, Optional


class CkptError(Exception):
    """Base class for toolkit errors"""


class ConfigError(CkptError, ValueError):
    """Configuration failed validation; `problems` lists every bad field"""

    def __init__(self, problems: List[str], source: str = "config"):
        self.problems = list(problems)
        self.source = source
        joined = "; ".join(self.problems)
        super().__init__(f"invalid {source}: {joined}")


class TraceFormatError(CkptError, ValueError):
    """Malformed trace or model file"""

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        self.row = row
        self.field = field
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class InvalidStateError(CkptError, ValueError):
    """MDP state outside its valid range"""


class DimensionMismatchError(CkptError, ValueError):
    """Table dimensions do not match the system parameters"""


class NoForwardProgressError(CkptError, RuntimeError):
    """Simulation exceeded its watchdog without finishing the program"""
