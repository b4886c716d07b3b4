"""Flat ``key=value`` run configuration.

Lines starting with ``#`` and blank lines are ignored.  Geometry values:

    euclidean
    elliptic:<path to whitespace-separated positive weights>
    hyperbolic
    product:<kind>=<size>,<kind>=<size>,...   (elliptic blocks: elliptic=<w1;w2;...>)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import Geometry
from .errors import ConfigError
from .training import TrainConfig

DEFAULTS = {
    "model.d": "8",
    "model.kappa": "1",
    "model.k0": "4",
    "model.geometry": "euclidean",
    "train.gamma": "0.5",
    "train.alpha": "1.0",
    "train.lr": "0.01",
    "train.batch": "256",
    "train.negatives": "16",
    "train.epochs": "100",
    "train.patience": "10",
    "train.seed": "0",
    "diag.energy": "0.99",
}
PATH_KEYS = ("data.train", "data.valid", "data.test")
KEYS = frozenset(PATH_KEYS) | frozenset(DEFAULTS)

_TRAIN_FIELDS = {
    "model.d": ("d", int), "model.kappa": ("kappa", int), "model.k0": ("k0", int),
    "train.gamma": ("gamma", float), "train.alpha": ("alpha", float), "train.lr": ("lr", float),
    "train.batch": ("batch_size", int), "train.negatives": ("negatives_per_positive", int),
    "train.epochs": ("max_epochs", int), "train.patience": ("patience", int),
    "train.seed": ("seed", int),
}


@dataclass
class RunConfig:
    train_path: Path
    valid_path: Path
    test_path: Path
    train: TrainConfig
    energy: float = 0.99
    raw: dict = field(default_factory=dict)


def _read_weights(path: Path) -> np.ndarray:
    try:
        return np.array(path.read_text(encoding="utf-8").split(), dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: weights must be numbers ({exc})") from exc


def parse_geometry(value: str, d: int, base: Path | None = None) -> Geometry:
    kind, _, arg = value.strip().partition(":")
    try:
        if kind == "euclidean" and not arg:
            g = Geometry.euclidean(d)
        elif kind == "hyperbolic" and not arg:
            g = Geometry.hyperbolic(d)
        elif kind == "elliptic" and arg:
            p = Path(arg)
            if base is not None and not p.is_absolute():
                p = base / p
            if not p.exists():
                raise ConfigError(f"geometry weight file not found: {p}")
            g = Geometry.elliptic(_read_weights(p))
        elif kind == "product" and arg:
            blocks = []
            for part in arg.split(","):
                bk, _, bv = part.strip().partition("=")
                if bk == "elliptic":
                    blocks.append(Geometry.elliptic(np.array(bv.split(";"), dtype=np.float64)))
                elif bk == "euclidean":
                    blocks.append(Geometry.euclidean(int(bv)))
                elif bk == "hyperbolic":
                    blocks.append(Geometry.hyperbolic(int(bv)))
                else:
                    raise ConfigError(f"unknown product block {part!r}")
            g = Geometry.product(blocks)
        else:
            raise ConfigError(f"unrecognised geometry {value!r}")
    except ValueError as exc:
        raise ConfigError(f"invalid geometry {value!r}: {exc}") from exc
    if g.d != d:
        raise ConfigError(f"geometry has dimension {g.d} but model.d = {d}")
    return g


def parse_config_text(text: str, base: Path | None = None) -> RunConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    missing = [k for k in PATH_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    paths = []
    for k in PATH_KEYS:
        p = Path(raw[k])
        if base is not None and not p.is_absolute():
            p = base / p
        if not p.exists():
            raise ConfigError(f"{k}: file not found: {p}")
        paths.append(p)
    vals = {**DEFAULTS, **raw}
    kw = {}
    for key, (name, conv) in _TRAIN_FIELDS.items():
        try:
            kw[name] = conv(vals[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {vals[key]!r}") from exc
    kw["geometry"] = parse_geometry(vals["model.geometry"], kw["d"], base)
    try:
        energy = float(vals["diag.energy"])
        if not 0 < energy < 1:
            raise ValueError("diag.energy must lie strictly between 0 and 1")
        tc = TrainConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(*paths, train=tc, energy=energy, raw=raw)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), base=path.parent)


__all__ = ["RunConfig", "load_config", "parse_config_text", "parse_geometry", "KEYS", "DEFAULTS"]
