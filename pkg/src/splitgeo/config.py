"""Flat ``key = value`` run configurations with a strict per-command schema.

Lines are ``dotted.key = value``; ``#`` starts a comment.  Vectors are
whitespace or comma separated numbers, point lists separate points by ``;``.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from .errors import ParseError, ValidationError

COMMANDS = (
    "metric-info",
    "integrate",
    "verify-closed-form",
    "find-integrals",
    "liouville-check",
    "maxwell-gate",
)
POTENTIAL_KINDS = ("constant", "linear", "tanh-cubic", "builtin")
FAMILIES = ("HyperbolicTanh", "HyperbolicLinear", "EllipticTanh", "EllipticLinear")
TOL_RANGE = (1e-14, 1e-2)
TOL_RANGE_TEXT = ("1e-14", "1e-2")


# --------------------------------------------------------------------------- value parsers


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _floats(n: Optional[int] = None, allowed: Tuple[int, ...] = ()):
    def parse(text):
        vals = tuple(_float(t) for t in text.replace(",", " ").split())
        ok = (len(vals) == n) if n is not None else (not allowed or len(vals) in allowed)
        if not ok:
            want = n if n is not None else " or ".join(map(str, allowed))
            raise ValueError(f"expected {want} numbers, got {len(vals)}")
        return vals

    return parse


def _points(dim: int):
    row = _floats(dim)

    def parse(text):
        pts = tuple(row(chunk) for chunk in text.split(";") if chunk.strip())
        if not pts:
            raise ValueError("expected at least one point")
        return pts

    return parse


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


# --------------------------------------------------------------------------- range checks


def _tolerance(name):
    lo, hi = TOL_RANGE
    lo_text, hi_text = TOL_RANGE_TEXT

    def check(v):
        if v > hi:
            return f"{name} tolerance above {hi_text}"
        if v < lo:
            return f"{name} tolerance below {lo_text}"
        return None

    return check


def _positive(v):
    return None if v > 0 else "must be positive"


def _non_negative(v):
    return None if v >= 0 else "must be non-negative"


def _at_least(k):
    return lambda v: None if v >= k else f"must be at least {k}"


def _sign(v):
    return None if v in (-1, 1) else "must be +1 or -1"


def _rect(v):
    return None if v[0] < v[1] and v[2] < v[3] else "needs xmin < xmax and ymin < ymax"


def _span(v):
    return None if v[0] != v[1] else "span must not be degenerate"


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any = None
    check: Optional[Callable[[Any], Optional[str]]] = None
    required: bool = False


def _potential_keys(name):
    p = f"metric.{name}."
    keys = {p + "kind": Key(_choice(*POTENTIAL_KINDS), "constant"), p + "value": Key(_float, 0.0)}
    for c in "ABCDEF":
        keys[p + c] = Key(_float, 0.0)
    if name == "beta":
        keys[p + "projection"] = Key(_choice("re", "im", "complex"), "re")
    return keys


METRIC_KEYS = {
    "metric.lambda": Key(_float, 1.0),
    **_potential_keys("alpha"),
    **_potential_keys("beta"),
}
COMMON_KEYS = {
    "command": Key(_choice(*COMMANDS), required=True),
    "output.dir": Key(str),
    "output.report": Key(str),
}
TOL_KEYS = {
    "tol": Key(_float),
    "tol.rel": Key(_float, 1e-10, _tolerance("rel")),
    "tol.abs": Key(_float, 1e-12, _tolerance("abs")),
}

SCHEMAS: Dict[str, Dict[str, Key]] = {
    "metric-info": {**METRIC_KEYS, "points": Key(_points(4), required=True)},
    "integrate": {
        **METRIC_KEYS,
        **TOL_KEYS,
        "initial.x": Key(_floats(4), required=True),
        "initial.v": Key(_floats(4), required=True),
        "span": Key(_floats(2), (0.0, 1.0), _span),
        "samples": Key(_int, 0, _non_negative),
        "output.csv": Key(str, "trajectory.csv"),
    },
    "verify-closed-form": {
        **TOL_KEYS,
        "family": Key(_choice(*FAMILIES), required=True),
        "potential": Key(_floats(allowed=(3, 6)), required=True),
        "initial.x": Key(_floats(2), required=True),
        "initial.v": Key(_floats(2), required=True),
        "span": Key(_floats(2), (0.0, 1.0), _span),
        "samples": Key(_int, 21, _at_least(2)),
        "threshold": Key(_float, 1e-8, _positive),
    },
    "find-integrals": {
        **METRIC_KEYS,
        "block": Key(_choice("hyperbolic", "elliptic"), required=True),
        "degree": Key(_int, required=True, check=_non_negative),
        "basis.degree": Key(_int, 3, _non_negative),
        "basis.tanh": Key(_floats(2)),
        "basis.tanh_powers": Key(_int, 3, _at_least(1)),
        "grid.rect": Key(_floats(4), required=True, check=_rect),
        "grid.n": Key(_int, 7, _at_least(2)),
        "grid.jitter": Key(_float, 0.01, _non_negative),
        "grid.seed": Key(_int, 0),
        "svd_tol": Key(_float, 1e-10, _positive),
        "exponent_sign": Key(_int, 1, _sign),
        "expect": Key(_choice("any", "candidate", "none"), "any"),
    },
    "liouville-check": {
        **METRIC_KEYS,
        "points": Key(_points(4), required=True),
        "coefficient": Key(_float),
        "elliptic_sign": Key(_int, -1, _sign),
        "threshold": Key(_float, 1e-10, _positive),
    },
    "maxwell-gate": {
        **METRIC_KEYS,
        "maxwell.k": Key(_float, 1.0),
        "maxwell.c": Key(_float, 1.0, _positive),
        "maxwell.lambda": Key(_float, 0.0),
        "maxwell.J": Key(_float, 0.0),
        "maxwell.I1": Key(_float, 0.0),
        "maxwell.k2_factor": Key(_int, 1, lambda v: None if v in (1, 2) else "must be 1 or 2"),
        "points": Key(_points(4)),
    },
}
for _schema in SCHEMAS.values():
    _schema.update(COMMON_KEYS)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: every schema key is present (defaults filled)."""

    command: str
    values: Mapping[str, Any]
    given: Tuple[str, ...] = field(default=())

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def echo(self) -> Dict[str, Any]:
        """Inputs as a plain, key-sorted mapping (for reports)."""
        return {k: self.values[k] for k in sorted(self.values)}


def _lex(text: str):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(f"line {lineno}: missing key")
        if key in entries:
            raise ParseError(f"line {lineno}: duplicate key '{key}' (first on line {entries[key][1]})")
        entries[key] = (value, lineno)
    return entries


def parse_config(text: str) -> RunConfig:
    """Parse and validate; errors name the offending key and line."""
    entries = _lex(text)
    if "command" not in entries:
        raise ParseError("missing required key 'command'")
    cmd_text, cmd_line = entries["command"]
    if cmd_text not in COMMANDS:
        raise ParseError(
            f"line {cmd_line}: unknown command {cmd_text!r} (expected one of {', '.join(COMMANDS)})"
        )
    schema = SCHEMAS[cmd_text]

    values: Dict[str, Any] = {}
    for key, (text_value, lineno) in entries.items():
        if key not in schema:
            hint = difflib.get_close_matches(key, schema, n=1)
            extra = f"; did you mean '{hint[0]}'?" if hint else ""
            raise ParseError(f"line {lineno}: unknown key '{key}' for command '{cmd_text}'{extra}")
        spec = schema[key]
        try:
            v = spec.parse(text_value)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: key '{key}': {exc}") from None
        values[key] = v

    # the shorthand ``tol`` sets both tolerances unless they are given explicitly
    if "tol" in values:
        tol = values.pop("tol")
        lineno = entries["tol"][1]
        values.setdefault("tol.rel", tol)
        values.setdefault("tol.abs", tol)
        entries.setdefault("tol.rel", (None, lineno))
        entries.setdefault("tol.abs", (None, lineno))

    for key, spec in schema.items():
        if key == "tol":
            continue
        if key in values:
            if spec.check is not None:
                problem = spec.check(values[key])
                if problem:
                    raise ValidationError(f"line {entries[key][1]}: key '{key}': {problem}")
        elif spec.required:
            raise ParseError(f"missing required key '{key}' for command '{cmd_text}'")
        else:
            values[key] = spec.default

    _cross_checks(cmd_text, values, entries)
    return RunConfig(cmd_text, values, tuple(k for k in entries if k != "tol"))


def _cross_checks(cmd, values, entries):
    def fail(key, msg):
        line = entries.get(key, (None, None))[1]
        where = f"line {line}: " if line else ""
        raise ValidationError(f"{where}key '{key}': {msg}")

    for name in ("alpha", "beta"):
        kind = values.get(f"metric.{name}.kind")
        if kind == "builtin" and not values["metric.lambda"] > 0:
            fail("metric.lambda", "built-in Liouville potentials need lambda > 0")
    if cmd == "verify-closed-form":
        n = 3 if values["family"].endswith("Linear") else 6
        if len(values["potential"]) != n:
            fail("potential", f"{values['family']} needs {n} constants")
