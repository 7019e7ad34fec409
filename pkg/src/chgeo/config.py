"""Scenario configuration: a flat YAML mapping of scalar keys.

Example::

    scenario: equivalence
    initial_data: sine 0.1 1
    n: 256
    T: 0.5
    dt: 5.0e-4

``initial_data`` is a sum of terms separated by ``+``:

    zero
    constant C
    sine A K            A sin(2 pi K x)
    peakon C X0 [EPS]   mollified peakon, EPS defaults to 2/n

Unknown keys are errors. Every error names exactly one key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
import yaml

from .errors import ConfigError, GridError
from .grid import Field, PeriodicGrid
from .peakon import PeakonSpec, peakon_field

SCENARIOS = ("eulerian-run", "geodesic-run", "equivalence", "least-action", "peakon", "breaking", "invariants")
TERM_ARITY = {"zero": (0, 0), "constant": (1, 1), "sine": (2, 2), "peakon": (2, 3)}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    initial_data: tuple  # ((kind, (params...)), ...)
    n: int = 256
    dt: float | None = None
    T: float = 1.0
    seed: int = 0
    output_path: str | None = None
    record_every: int = 10
    snapshot_every: int = 0
    slope_threshold: float = 1.0e3
    flatten_threshold: float = 1.0e-6
    dealias: bool = False
    rhs: str = "nonlocal"
    ensemble_size: int = 100
    amplitude: float = 1.0e-2
    mode_count: int = 4
    envelope: str = "sine"

    @property
    def output(self) -> str:
        return self.output_path or f"{self.scenario}.ndjson"

    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.n)

    def initial_field(self) -> Field:
        return build_initial_field(self.initial_data, self.grid())


KEYS = tuple(f.name for f in fields(ScenarioConfig))
REQUIRED = ("scenario", "initial_data")


def parse_initial_data(text) -> tuple:
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("initial_data must be a non-empty string", key="initial_data")
    terms = []
    for raw in text.split("+"):
        words = raw.split()
        if not words:
            raise ConfigError(f"empty term in initial_data {text!r}", key="initial_data")
        kind, args = words[0].lower(), words[1:]
        if kind not in TERM_ARITY:
            raise ConfigError(
                f"unknown initial_data term {kind!r}; expected one of {sorted(TERM_ARITY)}",
                key="initial_data",
            )
        lo, hi = TERM_ARITY[kind]
        if not lo <= len(args) <= hi:
            raise ConfigError(f"term {kind!r} takes {lo}..{hi} numbers, got {len(args)}", key="initial_data")
        try:
            params = tuple(float(a) for a in args)
        except ValueError:
            raise ConfigError(f"non-numeric parameter in term {raw.strip()!r}", key="initial_data") from None
        if not all(math.isfinite(p) for p in params):
            raise ConfigError(f"non-finite parameter in term {raw.strip()!r}", key="initial_data")
        if kind == "peakon":
            c, x0 = params[:2]
            if c == 0 or not 0 <= x0 < 1 or (len(params) == 3 and params[2] < 0):
                raise ConfigError(f"invalid peakon term {raw.strip()!r}", key="initial_data")
        terms.append((kind, params))
    return tuple(terms)


def format_initial_data(terms) -> str:
    return " + ".join(" ".join([kind, *(repr(p) for p in params)]) for kind, params in terms)


def build_initial_field(terms, grid: PeriodicGrid) -> Field:
    x = grid.nodes
    u = np.zeros(grid.n)
    for kind, params in terms:
        if kind == "constant":
            u += params[0]
        elif kind == "sine":
            u += params[0] * np.sin(2.0 * np.pi * params[1] * x)
        elif kind == "peakon":
            eps = params[2] if len(params) == 3 else 2.0 / grid.n
            u += peakon_field(PeakonSpec(params[0], params[1], eps), grid).values
    return Field(grid, u)


def _number(key, value, kind):
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}", key=key)
    try:
        if kind is int:
            out = int(value) if not isinstance(value, float) or value.is_integer() else None
            if out is None or (isinstance(value, str) and str(out) != value.strip()):
                raise ValueError
            return out
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, got {value!r}", key=key) from None
    if not math.isfinite(out):
        raise ConfigError(f"{key} must be finite", key=key)
    return out


def _validate(mapping: dict) -> ScenarioConfig:
    for key in mapping:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
    for key in REQUIRED:
        if mapping.get(key) is None:
            raise ConfigError(f"missing required key {key!r}", key=key)

    values = {}
    scenario = mapping["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {scenario!r}", key="scenario")
    values["scenario"] = scenario
    values["initial_data"] = (
        mapping["initial_data"] if isinstance(mapping["initial_data"], tuple) else parse_initial_data(mapping["initial_data"])
    )

    positive_int = ("n", "record_every", "ensemble_size", "mode_count")
    nonneg_int = ("seed", "snapshot_every")
    positive_float = ("T", "slope_threshold", "flatten_threshold")
    for key in positive_int + nonneg_int:
        if mapping.get(key) is not None:
            v = _number(key, mapping[key], int)
            if v < (1 if key in positive_int else 0):
                raise ConfigError(f"{key} must be {'positive' if key in positive_int else 'nonnegative'}", key=key)
            values[key] = v
    for key in positive_float:
        if mapping.get(key) is not None:
            v = _number(key, mapping[key], float)
            if not v > 0:
                raise ConfigError(f"{key} must be positive", key=key)
            values[key] = v
    if mapping.get("amplitude") is not None:
        v = _number("amplitude", mapping["amplitude"], float)
        if v < 0:
            raise ConfigError("amplitude must be nonnegative", key="amplitude")
        values["amplitude"] = v
    if "n" in values:
        try:
            PeriodicGrid(values["n"])
        except GridError as exc:
            raise ConfigError(str(exc), key="n") from None
    T = values.get("T", 1.0)
    if mapping.get("dt") is not None:
        dt = _number("dt", mapping["dt"], float)
        if not 0 < dt <= T:
            raise ConfigError(f"dt must satisfy 0 < dt <= T (T={T})", key="dt")
        values["dt"] = dt
    if mapping.get("dealias") is not None:
        if not isinstance(mapping["dealias"], bool):
            raise ConfigError("dealias must be true or false", key="dealias")
        values["dealias"] = mapping["dealias"]
    for key, allowed in (("rhs", ("nonlocal", "local")), ("envelope", ("sine", "quadratic"))):
        if mapping.get(key) is not None:
            if mapping[key] not in allowed:
                raise ConfigError(f"{key} must be one of {allowed}", key=key)
            values[key] = mapping[key]
    if mapping.get("output_path") is not None:
        if not isinstance(mapping["output_path"], str) or not mapping["output_path"]:
            raise ConfigError("output_path must be a non-empty string", key="output_path")
        values["output_path"] = mapping["output_path"]
    return ScenarioConfig(**values)


def _key_lines(text):
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a config document; fills defaults."""
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"malformed config (line {line}): {exc}", line=line) from None
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a mapping of keys to values")
    lines = _key_lines(text)
    try:
        return _validate({str(k): v for k, v in mapping.items()})
    except ConfigError as exc:
        exc.line = lines.get(exc.key)
        if exc.line is not None:
            exc.args = (f"line {exc.line}: {exc.args[0]}",)
        raise


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for key in KEYS:
        value = getattr(cfg, key)
        out[key] = format_initial_data(value) if key == "initial_data" else value
    return out


def config_from_dict(mapping: dict) -> ScenarioConfig:
    return _validate(dict(mapping))


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    for key, value in config_to_dict(cfg).items():
        if value is None:
            text = "null"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        elif isinstance(value, int):
            text = str(value)
        else:
            text = yaml.safe_dump(value, default_style='"').strip()
        lines.append(f"{key}: {text}")
    return "\n".join(lines) + "\n"
