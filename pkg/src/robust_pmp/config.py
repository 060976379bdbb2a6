"""Run configuration: flat JSON files and the built-in presets."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Union

from .errors import ConfigError, ParseError, UnknownKey, UnknownPreset
from .nlsolve import SolverConfig
from .spacecraft import GUESSES, ProblemParams

EMIT_CHOICES = frozenset({"trajectory", "covectors", "certificates"})

# JSON key -> ProblemParams attribute
PARAM_KEYS = {("lambda" if f.name == "lam" else f.name): f.name for f in fields(ProblemParams)}
SOLVER_KEYS = {f.name: f.name for f in fields(SolverConfig)}
RUN_KEYS = ("name", "guess", "output_path", "emit")
ALL_KEYS = frozenset(RUN_KEYS) | PARAM_KEYS.keys() | SOLVER_KEYS.keys()


@dataclass(frozen=True)
class RunConfig:
    name: str = "run"
    params: ProblemParams = field(default_factory=ProblemParams)
    guess: Union[str, tuple] = "zero"
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_path: str = "."
    emit: frozenset = EMIT_CHOICES

    def __post_init__(self):
        if isinstance(self.guess, str):
            if self.guess not in GUESSES:
                raise ConfigError(f"unknown guess generator {self.guess!r}")
        elif len(self.guess) != self.params.N:
            raise ConfigError(f"explicit guess has length {len(self.guess)}, expected {self.params.N}")
        unknown = set(self.emit) - EMIT_CHOICES
        if unknown:
            raise ConfigError(f"unknown emit entries {sorted(unknown)}")
        if not re.fullmatch(r"[A-Za-z0-9_.\-]+", self.name):
            raise ConfigError(f"run name {self.name!r} is not a safe file stem")


_TABLE = {
    # name: (psi, v0, theta0, guess)
    "S7minus": (0.3, 0.3, 0.3, "zero"),
    "S3": (0.2, 0.1, math.pi / 2, "zero"),
    "S16": (0.2, -0.1, math.pi / 2, "zero"),
    "S17": (0.3, -0.1, 4 * math.pi / 3, "zero"),
    "UW4": (0.3, -0.1, 4 * math.pi / 3, "drift"),
    # no attitude penalty: reduces to the linear-quadratic game
    "LQ": (0.0, 0.3, 0.0, "zero"),
}
TABLE_PRESETS = ("S7minus", "S3", "S16", "S17", "UW4")
PRESETS = tuple(_TABLE)


def preset(name: str) -> RunConfig:
    try:
        psi, v0, theta0, guess = _TABLE[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return RunConfig(name=name, params=ProblemParams(psi=psi, v0=v0, theta0=theta0), guess=guess)


def _encode_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_dict(cfg: RunConfig) -> dict:
    out = {"name": cfg.name}
    for key, attr in PARAM_KEYS.items():
        out[key] = _encode_float(getattr(cfg.params, attr))
    out["guess"] = cfg.guess if isinstance(cfg.guess, str) else list(cfg.guess)
    for key in SOLVER_KEYS:
        out[key] = getattr(cfg.solver, key)
    out["output_path"] = cfg.output_path
    out["emit"] = sorted(cfg.emit)
    return out


def _key_line(text: str, key: str):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _number(value, key, line, integer=False):
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity", "-inf", "-infinity"):
        value = float(value.strip().lower().replace("infinity", "inf"))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", line=line, field=key)
    if integer:
        if int(value) != value:
            raise ParseError(f"expected an integer, got {value!r}", line=line, field=key)
        return int(value)
    return float(value)


def _reject_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ParseError("duplicate key", field=k)
        seen[k] = v
    return seen


def from_json(text: str, default_name: str = "run") -> RunConfig:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    except ParseError as exc:
        raise ParseError("duplicate key", line=_key_line(text, exc.field), field=exc.field) from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object", line=1)
    for key in raw:
        if key not in ALL_KEYS:
            raise UnknownKey(key)

    params, solver = {}, {}
    for key, value in raw.items():
        line = _key_line(text, key)
        if key in PARAM_KEYS:
            params[PARAM_KEYS[key]] = _number(value, key, line, integer=(key == "N"))
        elif key in SOLVER_KEYS:
            solver[key] = _number(value, key, line, integer=(key == "max_iters"))

    def text_field(key, default):
        value = raw.get(key, default)
        if not isinstance(value, str):
            raise ParseError(f"expected a string, got {value!r}", line=_key_line(text, key), field=key)
        return value

    guess = raw.get("guess", "zero")
    if not isinstance(guess, str):
        if not isinstance(guess, list):
            raise ParseError("guess must be a generator name or a list of numbers",
                             line=_key_line(text, "guess"), field="guess")
        guess = tuple(_number(x, "guess", _key_line(text, "guess")) for x in guess)
    emit = raw.get("emit", sorted(EMIT_CHOICES))
    if not isinstance(emit, list) or not all(isinstance(e, str) for e in emit):
        raise ParseError("emit must be a list of strings", line=_key_line(text, "emit"), field="emit")

    try:
        return RunConfig(
            name=text_field("name", default_name),
            params=ProblemParams(**params),
            guess=guess,
            solver=SolverConfig(**solver),
            output_path=text_field("output_path", "."),
            emit=frozenset(emit),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_config(source: Union[str, Path]) -> RunConfig:
    """A preset name, or the path of a flat JSON config file."""
    source = str(source)
    if source in _TABLE:
        return preset(source)
    path = Path(source)
    if path.suffix.lower() != ".json" and not path.exists():
        raise UnknownPreset(f"unknown preset {source!r}; available: {', '.join(PRESETS)}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return from_json(text, default_name=path.stem)


def save_config(cfg: RunConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(to_dict(cfg), indent=2) + "\n")


def with_guess(cfg: RunConfig, guess: str) -> RunConfig:
    return replace(cfg, guess=guess)
