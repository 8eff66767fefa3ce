"""Strict dict-to-dataclass construction for JSON configs"""
from dataclasses import fields
from typing import Any, Callable, Dict, Optional, Tuple, Type, TypeVar, Union, get_args, get_origin

from src.ckpt.errors import ConfigError

T = TypeVar("T")


def _coerce(value: Any, annotation: Any) -> Tuple[Any, Optional[str]]:
    """Return (value, None) if `value` fits `annotation`, else (None, reason)"""
    if get_origin(annotation) is Union:
        args = [a for a in get_args(annotation) if a is not type(None)]
        if value is None:
            return None, None
        annotation = args[0] if len(args) == 1 else annotation
    if annotation is bool:
        return (value, None) if isinstance(value, bool) else (None, f"expected boolean, got {value!r}")
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value), None
            return None, f"expected integer, got {value!r}"
        return value, None
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None, f"expected number, got {value!r}"
        return float(value), None
    if annotation is str:
        return (value, None) if isinstance(value, str) else (None, f"expected string, got {value!r}")
    return value, None


def build_strict(
    cls: Type[T],
    data: Any,
    source: str,
    nested: Optional[Dict[str, Callable[[Any], Any]]] = None,
) -> T:
    """
    Build `cls` from a JSON object, rejecting unknown keys.

    Every problem found (unknown keys, wrong types, failed invariants) is
    collected into a single ConfigError.
    """
    if not isinstance(data, dict):
        raise ConfigError([f"expected a JSON object, got {type(data).__name__}"], source)
    nested = nested or {}
    known = {f.name: f for f in fields(cls)}
    problems = [f"unknown key '{key}'" for key in data if key not in known]

    kwargs: Dict[str, Any] = {}
    for name, value in data.items():
        if name not in known:
            continue
        if name in nested:
            try:
                kwargs[name] = nested[name](value)
            except ConfigError as e:
                problems.extend(f"{name}.{p}" for p in e.problems)
            continue
        coerced, error = _coerce(value, known[name].type)
        if error:
            problems.append(f"{name}: {error}")
        else:
            kwargs[name] = coerced

    instance = None
    try:
        instance = cls(**kwargs)
    except ConfigError as e:
        problems.extend(e.problems)
    except TypeError as e:
        problems.append(str(e))
    if problems:
        raise ConfigError(problems, source)
    return instance


def raise_if(problems: list, source: str) -> None:
    if problems:
        raise ConfigError(problems, source)
