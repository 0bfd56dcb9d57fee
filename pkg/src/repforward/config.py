"""Run configuration: flat ``key = value`` files merged with command-line flags."""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .dynamics import METHODS
from .game import GameParams
from .manet import SimConfig, TopologyConfig

_SECTION = "run"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    lam: List[float] = field(default_factory=lambda: [3.0])
    delta_r: List[float] = field(default_factory=lambda: [3.0])
    delta_g: List[Optional[float]] = field(default_factory=lambda: [None])
    delta_b: List[float] = field(default_factory=lambda: [1.0])
    p0: List[float] = field(default_factory=lambda: [0.3, 0.7])
    dt: float = 0.01
    horizon: float = 50.0
    method: str = "rk4"
    nodes: int = 50
    area: Tuple[float, float] = (1000.0, 1000.0)
    tx_range: float = 150.0
    packets: int = 10
    epochs: int = 200
    rounds: int = 10
    seed: int = 0
    mode: str = "both"
    out: Path = Path("out")
    grid_steps: int = 1000
    random_sets: int = 5
    p_points: int = 101
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    max_cells: int = 10000
    keep_reputation: bool = False
    repair: bool = True

    @property
    def modes(self) -> List[str]:
        return ["constrained", "baseline"] if self.mode == "both" else [self.mode]

    def params(self) -> GameParams:
        """The single parameter set for non-sweep commands."""
        for name in ("lam", "delta_r", "delta_g", "delta_b"):
            if len(getattr(self, name)) != 1:
                raise ConfigError(f"{_KEY_NAMES.get(name, name)}: expected one value, got {getattr(self, name)}")
        return _make_params(self.lam[0], self.delta_r[0], self.delta_b[0], self.delta_g[0])

    def topology(self, seed: Optional[int] = None) -> TopologyConfig:
        return TopologyConfig(self.nodes, self.area[0], self.area[1], self.tx_range,
                              self.seed if seed is None else seed)

    def sim(self, mode: str, p0: float) -> SimConfig:
        return SimConfig(
            packets_per_node=self.packets, epochs=self.epochs, rounds_per_epoch=self.rounds,
            strategy_mode=mode, p0=p0, dt=self.dt, horizon=self.horizon, method=self.method,
            keep_reputation_on_flip=self.keep_reputation, repair_reputation=self.repair,
        )

    def validate(self) -> "RunConfig":
        for name in ("lam", "delta_r", "delta_b", "p0"):
            if not getattr(self, name):
                raise ConfigError(f"{_KEY_NAMES.get(name, name)}: empty value list")
        for lam in self.lam:
            for dr in self.delta_r:
                for db in self.delta_b:
                    for dg in self.delta_g:
                        _make_params(lam, dr, db, dg)
        for p0 in self.p0:
            if not 0 <= p0 <= 1:
                raise ConfigError(f"p0: {p0} is outside [0, 1]")
        if self.dt <= 0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if self.horizon < self.dt:
            raise ConfigError(f"horizon: must be at least dt, got {self.horizon}")
        if self.method not in METHODS:
            raise ConfigError(f"method: expected one of {METHODS}, got {self.method!r}")
        if self.mode not in ("constrained", "baseline", "both"):
            raise ConfigError(f"mode: expected constrained, baseline or both, got {self.mode!r}")
        for name in ("packets", "epochs", "rounds", "random_sets", "workers", "max_cells"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be positive")
        if self.grid_steps < 2:
            raise ConfigError("grid_steps: must be >= 2")
        if self.p_points < 2:
            raise ConfigError("p_points: must be >= 2")
        try:
            self.topology()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


def _make_params(lam, dr, db, dg) -> GameParams:
    try:
        return GameParams(lam, dr, db, dg)
    except ValueError as exc:
        raise ConfigError(f"game parameters: {exc}") from None


_KEY_NAMES = {"lam": "lambda", "tx_range": "range"}
_FILE_KEYS = {_KEY_NAMES.get(f.name, f.name): f.name for f in fields(RunConfig)}


def _floats(text: str) -> List[float]:
    return [float(v) for v in re.split(r"[,\s]+", text.strip()) if v]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_area(text: str) -> Tuple[float, float]:
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*[xX]\s*([0-9.eE+-]+)\s*", text)
    if not m:
        raise ValueError(f"expected WIDTHxHEIGHT, got {text!r}")
    return float(m.group(1)), float(m.group(2))


_CONVERTERS = {
    "lam": _floats, "delta_r": _floats, "delta_b": _floats, "p0": _floats,
    "delta_g": _floats,
    "dt": float, "horizon": float, "tx_range": float,
    "method": str.strip, "mode": str.strip,
    "nodes": int, "packets": int, "epochs": int, "rounds": int, "seed": int,
    "grid_steps": int, "random_sets": int, "p_points": int, "workers": int, "max_cells": int,
    "area": parse_area, "out": lambda s: Path(s.strip()),
    "keep_reputation": _bool, "repair": _bool,
}


def read_config_file(path: Path) -> Dict[str, object]:
    """Parse a flat key/value file into RunConfig field values.

    Accepts ``key = value`` or ``key: value`` lines and ``#`` comments.
    """
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=str(path))
    except configparser.ParsingError as exc:
        lines = ", ".join(f"line {ln - 1}: {raw.strip()}" for ln, raw in exc.errors)
        raise ConfigError(f"{path}: cannot parse {lines}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if len(parser.sections()) > 1:
        raise ConfigError(f"{path}: sections are not supported; use flat key = value lines")

    values: Dict[str, object] = {}
    for key, raw in parser.items(_SECTION):
        lineno = _line_of(text, key)
        name = _FILE_KEYS.get(key.replace("-", "_"))
        if name is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[name] = _CONVERTERS[name](raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: key {key!r}: {exc}") from None
    return values


def _line_of(text: str, key: str) -> int:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for k, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return k
    return 0


def build_config(file_values: Dict[str, object], flag_values: Dict[str, object]) -> RunConfig:
    """Defaults, then file values, then flags (flags win)."""
    cfg = RunConfig()
    for source in (file_values, flag_values):
        for name, value in source.items():
            if value is None:
                continue
            setattr(cfg, name, value)
    return cfg.validate()
