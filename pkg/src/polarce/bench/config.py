"""Experiment configuration and the key-value config file format.

Config files are plain text, one ``key = value`` per line, ``#`` starts a
comment.  Keys are :class:`ExperimentConfig` field names; tuple-valued keys
take comma-separated values::

    num_antennas = 256
    distance_range = 5, 10
    methods = p_somp, p_sigw
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..array_channel import ArrayGeometry, FrequencyGrid, rayleigh_distance
from ..polar_dictionary import DictionaryConfig

METHODS = ("genie_ls", "ls", "sw_omp", "ss_sigw", "p_somp", "p_sigw", "p_somp_uniform")

SWEEPS = ("distance", "snr", "pilots", "beta", "iterations", "sampling")

DEFAULT_METHODS = {
    "distance": ("genie_ls", "ls", "sw_omp", "ss_sigw", "p_somp", "p_sigw"),
    "snr": ("genie_ls", "sw_omp", "ss_sigw", "p_somp", "p_sigw"),
    "pilots": ("genie_ls", "sw_omp", "ss_sigw", "p_somp", "p_sigw"),
    "beta": ("p_somp", "p_sigw"),
    "iterations": ("p_sigw",),
    "sampling": ("p_somp", "p_somp_uniform"),
}

HALF_SQRT3 = math.sqrt(3) / 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one Monte-Carlo campaign.

    The defaults are the desk-scale profile: the full-scale settings with ``N = 64``,
    ``M = 32`` and all ranges shrunk by ``(64/256)^2`` so the near-field
    structure (number of distance rings, ratio to the Rayleigh distance) is
    the same as at full scale.  :meth:`paper_scale` restores ``N = 256``.
    """

    num_antennas: int = 64
    num_rf: int = 4
    carrier_frequency: float = 100e9
    bandwidth: float = 100e6
    num_subcarriers: int = 32
    rho_min: float = 3.0 / 16
    num_paths: int = 6
    beta: float = 1.2
    num_iter: int = 10
    num_detect: int = 12
    pilot_length: int = 8
    snr_db: float = 10.0
    angle_range: tuple[float, float] = (-HALF_SQRT3, HALF_SQRT3)
    distance_range: tuple[float, float] = (5.0 / 16, 10.0 / 16)
    uniform_rings: int = 6
    uniform_rho_max: float | None = None
    sweep: str = "distance"
    values: tuple[float, ...] | None = None
    trials: int = 50
    methods: tuple[str, ...] = ()
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ConfigError(f"unknown sweep {self.sweep!r}; choose from {SWEEPS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; known: {METHODS}")
        if self.num_antennas < 2 or self.num_rf < 1 or self.pilot_length < 1:
            raise ConfigError("array / combiner sizes must be positive")
        if self.num_detect < 1 or self.num_paths < 1:
            raise ConfigError("path counts must be positive")

    @classmethod
    def paper_scale(cls, **overrides) -> "ExperimentConfig":
        base = dict(num_antennas=256, num_subcarriers=256, rho_min=3.0, pilot_length=32,
                    distance_range=(5.0, 10.0), trials=200)
        base.update(overrides)
        return cls(**base)

    @property
    def range_scale(self) -> float:
        """Ratio of this array's Rayleigh distance to the 256-element one."""
        return (self.num_antennas / 256) ** 2

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry.from_frequency(self.num_antennas, self.carrier_frequency)

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.num_subcarriers, self.bandwidth, self.carrier_frequency)

    @property
    def dictionary_config(self) -> DictionaryConfig:
        return DictionaryConfig(self.geometry, self.beta, self.rho_min)

    @property
    def noise_var(self) -> float:
        return 10 ** (-self.snr_db / 10)

    @property
    def rho_max(self) -> float:
        if self.uniform_rho_max is not None:
            return self.uniform_rho_max
        return rayleigh_distance(self.geometry)

    def resolved_methods(self) -> tuple[str, ...]:
        return self.methods or DEFAULT_METHODS[self.sweep]

    def resolved_values(self) -> tuple[float, ...]:
        if self.values is not None:
            return tuple(self.values)
        s = self.range_scale
        if self.sweep in ("distance", "sampling"):
            return tuple(float(v) for v in np.geomspace(3.0, 120.0, 13) * s)
        if self.sweep == "snr":
            return (0.0, 5.0, 10.0, 15.0, 20.0)
        if self.sweep == "pilots":
            scale = self.num_antennas / 256
            return tuple(float(max(3, round(p * scale))) for p in (8, 16, 24, 32, 48, 64))
        if self.sweep == "beta":
            return (0.8, 1.0, 1.2, 1.6, 2.0, 2.4)
        return (0.0, 10.0, 20.0)

    def at(self, value: float) -> "ExperimentConfig":
        """The configuration of one sweep point."""
        if self.sweep in ("distance", "sampling"):
            return dataclasses.replace(self, distance_range=(float(value), float(value)))
        if self.sweep in ("snr", "iterations"):
            return dataclasses.replace(self, snr_db=float(value))
        if self.sweep == "pilots":
            if float(value) != int(value):
                raise ConfigError(f"pilot length must be an integer, got {value}")
            return dataclasses.replace(self, pilot_length=int(value))
        return dataclasses.replace(self, beta=float(value))


_TUPLE_FIELDS = {"angle_range", "distance_range", "values", "methods"}


def _convert(name: str, raw: str, ftype):
    raw = raw.strip()
    try:
        if name == "values" and raw.lower() == "none":
            return None
        if name in _TUPLE_FIELDS:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if name == "methods":
                return tuple(parts)
            return tuple(float(p) for p in parts)
        if name == "uniform_rho_max":
            return None if raw.lower() in ("", "none") else float(raw)
        if name == "sweep":
            return raw
        if ftype in ("int", int):
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, raw, known[key])
    return out


def load_config(path: str | Path | None = None, *, paper_scale: bool = False,
                **overrides) -> ExperimentConfig:
    try:
        values = parse_config_text(Path(path).read_text()) if path else {}
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.paper_scale(**values) if paper_scale else ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"
