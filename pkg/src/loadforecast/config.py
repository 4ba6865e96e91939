"""Experiment configuration and its flat ``key=value`` text format.

One key per line, nested sections addressed by dotted prefixes::

    models=elm,pso_elm,ipso_elm,vmd_ipso_elm
    run_count=30
    pso.population=30
    vmd.mode_count=7
    synthetic.components=60.0:96.0:0.0;15.0:16.0:1.0

Blank lines and ``#`` comments are ignored. Floats are written with
``repr`` so a dump/parse round trip is exact.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

from .elm import ElmConfig
from .partition import HistogramSpec
from .pso import ChaosConfig
from .vmd import VmdConfig


class ConfigError(ValueError):
    pass


class ModelKind(str, enum.Enum):
    ELM = "elm"
    PSO_ELM = "pso_elm"
    IPSO_ELM = "ipso_elm"
    VMD_IPSO_ELM = "vmd_ipso_elm"


@dataclass(frozen=True)
class SyntheticSpec:
    """Trend + sinusoids + Gaussian noise; components are ``(amplitude, period, phase)``."""

    length: int = 1096
    base_level: float = 200.0
    trend_slope: float = 0.01
    components: tuple[tuple[float, float, float], ...] = ((60.0, 96.0, 0.0), (15.0, 16.0, 1.0))
    noise_std: float = 2.0
    seed: int = 2019

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        if any(len(c) != 3 for c in comps):
            raise ConfigError("each synthetic component needs (amplitude, period, phase)")
        if any(c[1] <= 0 for c in comps):
            raise ConfigError("component periods must be positive")
        if self.length < 2:
            raise ConfigError("synthetic length must be >= 2")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        object.__setattr__(self, "components", comps)

    def lower_bound(self) -> float:
        """Smallest value the series can take up to a 6-sigma noise excursion."""
        trend_low = min(0.0, self.trend_slope * (self.length - 1))
        return self.base_level + trend_low - sum(abs(a) for a, _, _ in self.components) - 6 * self.noise_std


@dataclass(frozen=True)
class SearchConfig:
    """Swarm settings for the ELM parameter search; bounds come from :class:`ElmConfig`."""

    population: int = 30
    iterations: int = 100
    cognitive: float = 1.5
    social: float = 1.5
    inertia: float = 0.8
    velocity_clamp_fraction: float = 0.5
    validation_fraction: float = 0.2

    def __post_init__(self):
        if self.population < 2 or self.iterations < 1:
            raise ConfigError("population must be >= 2 and iterations >= 1")
        if not 0 < self.velocity_clamp_fraction <= 1:
            raise ConfigError("velocity_clamp_fraction must lie in (0, 1]")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[ModelKind, ...] = tuple(ModelKind)
    data_source: str = "synthetic"
    data_column: int = -1
    lag_count: int = 7
    train_fraction: float = 0.75
    run_count: int = 30
    base_seed: int = 0
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    elm: ElmConfig = field(default_factory=ElmConfig)
    pso: SearchConfig = field(default_factory=SearchConfig)
    chaos: ChaosConfig = field(default_factory=ChaosConfig)
    vmd: VmdConfig = field(default_factory=VmdConfig)
    histogram: HistogramSpec = field(default_factory=HistogramSpec)

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(ModelKind(m) for m in self.models))
        if not self.models:
            raise ConfigError("at least one model is required")
        if self.run_count < 1:
            raise ConfigError("run_count must be >= 1")
        if self.lag_count < 1:
            raise ConfigError("lag_count must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS = ("synthetic", "elm", "pso", "chaos", "vmd", "histogram")


def _fmt_pair(v):
    return f"{v[0]!r},{v[1]!r}"


def _parse_pair(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _fmt_components(comps):
    return ";".join(":".join(repr(v) for v in c) for c in comps)


def _parse_components(text):
    if not text.strip():
        return ()
    return tuple(tuple(float(v) for v in part.split(":")) for part in text.split(";"))


# (section, field) -> (format, parse); everything else is handled by value type
_SPECIAL = {
    ("", "models"): (lambda v: ",".join(m.value for m in v), lambda s: tuple(p.strip() for p in s.split(",") if p.strip())),
    ("elm", "weight_range"): (_fmt_pair, _parse_pair),
    ("elm", "bias_range"): (_fmt_pair, _parse_pair),
    ("synthetic", "components"): (_fmt_components, _parse_components),
    ("histogram", "bin_count"): (lambda v: "auto" if v is None else str(v), lambda s: None if s == "auto" else int(s)),
    ("histogram", "value_range"): (lambda v: "data" if v is None else _fmt_pair(v), lambda s: None if s == "data" else _parse_pair(s)),
}


def _fmt_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(default, text: str):
    if isinstance(default, enum.Enum):
        return type(default)(text)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def to_flat(config: ExperimentConfig) -> dict[str, str]:
    flat = {}
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                fmt = _SPECIAL.get((f.name, sub.name), (_fmt_value, None))[0]
                flat[f"{f.name}.{sub.name}"] = fmt(getattr(value, sub.name))
        else:
            fmt = _SPECIAL.get(("", f.name), (_fmt_value, None))[0]
            flat[f.name] = fmt(value)
    return flat


def from_flat(flat: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply ``flat`` overrides on top of ``base`` (defaults when omitted)."""
    base = base or ExperimentConfig()
    top: dict[str, object] = {}
    nested: dict[str, dict[str, object]] = {s: {} for s in _SECTIONS}
    known_top = {f.name for f in dataclasses.fields(base)} - set(_SECTIONS)
    for key, text in flat.items():
        text = text.strip()
        section, _, name = key.rpartition(".")
        try:
            if section:
                if section not in nested:
                    raise ConfigError(f"unknown config section {section!r} in key {key!r}")
                current = getattr(base, section)
                if name not in {f.name for f in dataclasses.fields(current)}:
                    raise ConfigError(f"unknown config key {key!r}")
                parse = _SPECIAL.get((section, name), (None, None))[1]
                nested[section][name] = parse(text) if parse else _parse_value(getattr(current, name), text)
            else:
                if name not in known_top:
                    raise ConfigError(f"unknown config key {key!r}")
                parse = _SPECIAL.get(("", name), (None, None))[1]
                top[name] = parse(text) if parse else _parse_value(getattr(base, name), text)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from exc
    try:
        for section, changes in nested.items():
            if changes:
                top[section] = dataclasses.replace(getattr(base, section), **changes)
        return dataclasses.replace(base, **top)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_lines(text: str) -> dict[str, str]:
    flat = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        flat[key.strip()] = value.strip()
    return flat


def dumps(config: ExperimentConfig) -> str:
    return "".join(f"{k}={v}\n" for k, v in to_flat(config).items())


def loads(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return from_flat(parse_lines(text), base)
