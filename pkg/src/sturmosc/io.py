"""JSON input validation and deterministic JSON output."""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources

import jsonschema

from .errors import ValidationError
from .jacobi import JacobiOperator
from .prufer import Potential


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("sturmosc").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(data, schema_name: str) -> None:
    try:
        jsonschema.validate(data, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{schema_name} schema violation at {where}: {exc.message}") from None


def read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def load_jacobi(path: str) -> JacobiOperator:
    data = read_json(path)
    validate(data, "jacobi")
    return JacobiOperator.from_dict(data)


def load_potential(path: str) -> Potential:
    data = read_json(path)
    validate(data, "potential")
    return Potential.from_dict(data)


def parse_pair(text: str, what: str = "pair") -> tuple[float, float]:
    """Parse ``"x,y"`` into two finite floats.  Plain decimal literals only."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"{what} must look like 'x,y', got {text!r}")
    try:
        x, y = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{what} must be two decimal numbers, got {text!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"{what} components must be finite")
    return x, y


def parse_complex(text: str) -> complex:
    re, im = parse_pair(text, "complex energy")
    return complex(re, im)


def parse_real(text: str, what: str = "value") -> float:
    try:
        v = float(text)
    except ValueError:
        raise ValidationError(f"{what} must be a decimal number, got {text!r}") from None
    if not math.isfinite(v):
        raise ValidationError(f"{what} must be finite")
    return v


def complex_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def dumps(obj) -> str:
    """Serialize with insertion-ordered keys and floats as ``%.17g``."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj}")
        text = "%.17g" % obj
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return dumps(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")
