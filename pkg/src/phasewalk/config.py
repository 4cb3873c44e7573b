"""Experiment configuration: JSON schema, defaults and validation.

A config file is a JSON object with these top-level keys (all optional
except ``engine``)::

    {
      "engine": "ideal" | "cqed" | "classical",
      "fock_dim": 64,
      "walk":     {"delta_theta": 0.3, "steps": 25, "alpha": 3.0,
                   "coin": [[0.7071067811865476, 0.0], [0.0, 0.7071067811865476]]},
      "cqed":     {"omega_c": 0.5, "omega_q": 0.7, "g": 0.01, "omega_d": null,
                   "epsilon": 0.01, "coin_angle": 0.7853981633974483,
                   "allow_nondispersive": false, "compensate": false},
      "analysis": {"grid": null, "fit_window": [2, 10, 2]},
      "sweep":    null | {"parameter": "epsilon", "values": [0.01, 0.012]},
      "output":   {"dir": "results"}
    }

Complex numbers (``alpha``, coin amplitudes) are a real number or a
``[re, im]`` pair.  A run manifest (``{"manifest_version": 1, "config":
{...}, ...}``) is also accepted and its ``config`` object is used.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .cqed_walk import CqedParams, ConfigurationError
from .ideal_walk import BALANCED_COIN, IdealWalkConfig

ENGINES = ("ideal", "cqed", "classical")
SWEEP_EPSILONS = (0.01, 0.012, 0.015, 0.018)


class ConfigError(ValueError):
    """Config file could not be parsed or failed validation."""


@dataclass(frozen=True)
class WalkSection:
    delta_theta: float = 0.3
    steps: int = 25
    alpha: complex = 3.0
    coin: tuple[complex, complex] = BALANCED_COIN


@dataclass(frozen=True)
class CqedSection:
    omega_c: float = 0.5
    omega_q: float = 0.7
    g: float = 0.01
    omega_d: float | None = None
    epsilon: float = 0.01
    coin_angle: float = math.pi / 4
    allow_nondispersive: bool = False
    compensate: bool = False


@dataclass(frozen=True)
class AnalysisSection:
    grid: int | None = None
    fit_window: tuple[int, int, int] = (2, 10, 2)


@dataclass(frozen=True)
class SweepSection:
    parameter: str = "epsilon"
    values: tuple[float, ...] = SWEEP_EPSILONS


@dataclass(frozen=True)
class OutputSection:
    dir: str = "results"


SWEEPABLE = {
    "epsilon": "cqed",
    "g": "cqed",
    "omega_c": "cqed",
    "omega_q": "cqed",
    "omega_d": "cqed",
    "coin_angle": "cqed",
    "delta_theta": "walk",
    "alpha": "walk",
}


@dataclass(frozen=True)
class ExperimentConfig:
    engine: str = "ideal"
    fock_dim: int = 64
    walk: WalkSection = field(default_factory=WalkSection)
    cqed: CqedSection = field(default_factory=CqedSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    sweep: SweepSection | None = None
    output: OutputSection = field(default_factory=OutputSection)

    @property
    def grid(self) -> int:
        return self.analysis.grid or self.fock_dim

    def ideal_config(self) -> IdealWalkConfig:
        w = self.walk
        return IdealWalkConfig(w.delta_theta, w.steps, self.fock_dim, w.alpha, None, w.coin)

    def cqed_params(self) -> CqedParams:
        c = self.cqed
        return CqedParams(
            omega_c=c.omega_c,
            omega_q=c.omega_q,
            g=c.g,
            omega_d=c.omega_d,
            epsilon=c.epsilon,
            fock_dim=self.fock_dim,
            allow_nondispersive=c.allow_nondispersive,
        )

    def with_value(self, parameter: str, value) -> "ExperimentConfig":
        """Copy with one sweepable parameter set, and the sweep removed."""
        section = SWEEPABLE[parameter]
        new_section = replace(getattr(self, section), **{parameter: value})
        return validate(replace(self, **{section: new_section, "sweep": None}))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["walk"]["alpha"] = _complex_out(self.walk.alpha)
        d["walk"]["coin"] = [_complex_out(c) for c in self.walk.coin]
        d["analysis"]["fit_window"] = list(self.analysis.fit_window)
        if self.sweep is not None:
            d["sweep"]["values"] = [
                _complex_out(v) if isinstance(v, complex) else v for v in self.sweep.values
            ]
        return d


def _complex_out(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _complex_in(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im], got {value!r}")


def _number(value, where: str, integer: bool = False, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true/false, got {value!r}")
    return value


def _check_keys(data: dict, allowed, where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(repr(k) for k in unknown)}")


def _section(cls, data, where: str, converters: dict):
    if data is None:
        return cls()
    names = [f.name for f in fields(cls)]
    _check_keys(data, names, where)
    kwargs = {k: converters[k](v, f"{where}.{k}") for k, v in data.items()}
    return cls(**kwargs)


def _coin(value, where):
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{where}: expected two amplitudes, got {value!r}")
    return tuple(_complex_in(v, f"{where}[{i}]") for i, v in enumerate(value))


def _window(value, where):
    if isinstance(value, str):
        return parse_window(value)
    if not isinstance(value, list) or len(value) not in (2, 3):
        raise ConfigError(f"{where}: expected [start, stop] or [start, stop, stride], got {value!r}")
    w = [_number(v, where, integer=True) for v in value]
    return tuple(w) if len(w) == 3 else (w[0], w[1], 1)


def parse_window(text: str) -> tuple[int, int, int]:
    """Parse ``a..b`` or ``a..b:stride`` (inclusive)."""
    try:
        span, _, stride = text.partition(":")
        a, b = span.split("..")
        return int(a), int(b), int(stride) if stride else 1
    except ValueError:
        raise ConfigError(f"fit window {text!r} is not of the form a..b or a..b:stride") from None


def _sweep(data, where):
    if data is None:
        return None
    _check_keys(data, ["parameter", "values"], where)
    param = data.get("parameter", "epsilon")
    if param not in SWEEPABLE:
        raise ConfigError(f"{where}.parameter: cannot sweep {param!r}; choose from {sorted(SWEEPABLE)}")
    values = data.get("values", list(SWEEP_EPSILONS))
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{where}.values: expected a non-empty list")
    conv = _complex_in if param == "alpha" else _number
    return SweepSection(param, tuple(conv(v, f"{where}.values[{i}]") for i, v in enumerate(values)))


WALK_CONVERTERS = {
    "delta_theta": _number,
    "steps": lambda v, w: _number(v, w, integer=True),
    "alpha": _complex_in,
    "coin": _coin,
}
CQED_CONVERTERS = {
    "omega_c": _number,
    "omega_q": _number,
    "g": _number,
    "omega_d": lambda v, w: _number(v, w, allow_none=True),
    "epsilon": _number,
    "coin_angle": _number,
    "allow_nondispersive": _bool,
    "compensate": _bool,
}
ANALYSIS_CONVERTERS = {
    "grid": lambda v, w: _number(v, w, integer=True, allow_none=True),
    "fit_window": _window,
}


def from_dict(data: dict) -> ExperimentConfig:
    if isinstance(data, dict) and "manifest_version" in data:
        data = data.get("config")
    _check_keys(data, [f.name for f in fields(ExperimentConfig)], "config")
    engine = data.get("engine", "ideal")
    if engine not in ENGINES:
        raise ConfigError(f"config.engine: expected one of {ENGINES}, got {engine!r}")
    cfg = ExperimentConfig(
        engine=engine,
        fock_dim=_number(data.get("fock_dim", 64), "config.fock_dim", integer=True),
        walk=_section(WalkSection, data.get("walk"), "walk", WALK_CONVERTERS),
        cqed=_section(CqedSection, data.get("cqed"), "cqed", CQED_CONVERTERS),
        analysis=_section(AnalysisSection, data.get("analysis"), "analysis", ANALYSIS_CONVERTERS),
        sweep=_sweep(data.get("sweep"), "sweep"),
        output=_section(OutputSection, data.get("output"), "output", {"dir": lambda v, w: str(v)}),
    )
    return validate(cfg)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Re-check every cross-field constraint of the engines."""
    w = cfg.walk
    if cfg.fock_dim < 2:
        raise ConfigError(f"config.fock_dim: need >= 2, got {cfg.fock_dim}")
    if cfg.analysis.grid is not None and cfg.analysis.grid < 1:
        raise ConfigError(f"analysis.grid: need >= 1, got {cfg.analysis.grid}")
    start, stop, stride = cfg.analysis.fit_window
    if start < 1 or stop < start or stride < 1:
        raise ConfigError(f"analysis.fit_window: invalid window {cfg.analysis.fit_window}")
    try:
        IdealWalkConfig(w.delta_theta, w.steps, cfg.fock_dim, w.alpha, None, w.coin)
    except ValueError as exc:
        raise ConfigError(f"walk: {exc}") from None
    if cfg.engine == "cqed":
        try:
            p = cfg.cqed_params()
            p.omega2  # raises when omega_d == omega_c
        except ConfigurationError as exc:
            raise ConfigError(f"cqed: {exc}") from None
        if cfg.cqed.epsilon <= 0:
            raise ConfigError("cqed.epsilon: the coin pulse needs epsilon > 0")
        if p.chi <= 0:
            raise ConfigError("cqed: need omega_q > omega_c and g > 0 so that chi > 0")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return from_dict(data)
