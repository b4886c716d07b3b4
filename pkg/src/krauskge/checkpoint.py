"""Binary checkpoint format.

All integers are little-endian int64 and all reals little-endian float64.

    magic      b"KRAUSKGE1"
    header     d, kappa, k0, geometry code, n_entities, n_relations, seed
               w (d reals), n_blocks, then (code, d) per block
    entities   per entity: id, k_e, d*k_e reals (row-major factor)
    relations  per relation: id, then each block's free skew entries
    footer     byte length, UTF-8 JSON {"config": ..., "history": [...], "meta": ...}
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .channels import Geometry
from .errors import CheckpointError
from .training import ModelParams, TrainConfig

MAGIC = b"KRAUSKGE1"
GEOMETRY_CODES = {"euclidean": 0, "elliptic": 1, "hyperbolic": 2, "product": 3}
_KINDS = {v: k for k, v in GEOMETRY_CODES.items()}
_I8 = struct.Struct("<q")


@dataclass
class Checkpoint:
    params: ModelParams
    history: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def config_echo(config: TrainConfig) -> dict:
    out = {}
    for f in fields(config):
        if f.name == "geometry":
            continue
        v = getattr(config, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def _ints(buf, *vals):
    for v in vals:
        buf.write(_I8.pack(int(v)))


def _reals(buf, arr):
    buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _geometry_blocks(g: Geometry):
    return list(g.blocks) if g.kind == "product" else [g]


def dumps(params: ModelParams, history=(), meta=None) -> bytes:
    cfg = params.config
    g = cfg.geometry
    buf = io.BytesIO()
    buf.write(MAGIC)
    _ints(buf, cfg.d, cfg.kappa, cfg.k0, GEOMETRY_CODES[g.kind],
          params.n_entities, params.n_relations, cfg.seed)
    _reals(buf, g.w)
    blocks = _geometry_blocks(g)
    _ints(buf, len(blocks))
    for b in blocks:
        _ints(buf, GEOMETRY_CODES[b.kind], b.d)
    for e in range(params.n_entities):
        k = int(params.ranks[e])
        _ints(buf, e, k)
        _reals(buf, params.factors[e, :, :k])
    for r in range(params.n_relations):
        _ints(buf, r)
        for s in params.skews:
            _reals(buf, s[r])
    records = [m.record() if hasattr(m, "record") else dict(m) for m in history]
    footer = json.dumps({"config": config_echo(cfg), "history": records, "meta": meta or {}},
                        sort_keys=True, allow_nan=True).encode("utf-8")
    _ints(buf, len(footer))
    buf.write(footer)
    return buf.getvalue()


def save_checkpoint(path, params: ModelParams, history=(), meta=None) -> Path:
    path = Path(path)
    path.write_bytes(dumps(params, history, meta))
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("checkpoint truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def ints(self, n: int = 1):
        vals = struct.unpack(f"<{n}q", self.take(8 * n))
        return vals[0] if n == 1 else vals

    def reals(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)


def loads(data: bytes) -> Checkpoint:
    rd = _Reader(data)
    if rd.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic: not a krauskge checkpoint")
    d, kappa, k0, code, n_ent, n_rel, seed = rd.ints(7)
    if code not in _KINDS or d < 1 or kappa < 1 or n_ent < 0 or n_rel < 0:
        raise CheckpointError("corrupt checkpoint header")
    w = rd.reals(d)
    n_blocks = rd.ints()
    specs = [rd.ints(2) for _ in range(n_blocks)]
    if sum(bd for _, bd in specs) != d:
        raise CheckpointError("geometry block sizes do not sum to d")
    try:
        parts, start = [], 0
        for bcode, bd in specs:
            parts.append(Geometry(_KINDS[bcode], w[start:start + bd]))
            start += bd
        geom = Geometry.product(parts) if _KINDS[code] == "product" else parts[0]
    except (ValueError, KeyError) as exc:
        raise CheckpointError(f"invalid geometry in checkpoint: {exc}") from exc

    ranks = np.zeros(n_ent, dtype=np.int64)
    mats = []
    for e in range(n_ent):
        eid, k = rd.ints(2)
        if eid != e or not 1 <= k <= d:
            raise CheckpointError(f"entity record {e} inconsistent with header")
        ranks[e] = k
        mats.append(rd.reals(d * k).reshape(d, k))
    kmax = int(ranks.max()) if n_ent else 1
    factors = np.zeros((n_ent, d, kmax))
    for e, L in enumerate(mats):
        factors[e, :, :ranks[e]] = L
    sizes = [(kappa * bd) * (kappa * bd - 1) // 2 for _, bd in specs]
    skews = [np.zeros((n_rel, m)) for m in sizes]
    for r in range(n_rel):
        if rd.ints() != r:
            raise CheckpointError(f"relation record {r} inconsistent with header")
        for s, m in zip(skews, sizes):
            s[r] = rd.reals(m)
    n_footer = rd.ints()
    try:
        footer = json.loads(rd.take(n_footer).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint footer: {exc}") from exc
    if rd.pos != len(data):
        raise CheckpointError("trailing bytes after checkpoint footer")

    echo = dict(footer.get("config", {}))
    echo.update(d=d, kappa=kappa, k0=k0, seed=seed, geometry=geom)
    known = {f.name for f in fields(TrainConfig)}
    cfg = TrainConfig(**{k: v for k, v in echo.items() if k in known})
    return Checkpoint(ModelParams(cfg, factors, ranks, skews),
                      footer.get("history", []), footer.get("meta", {}))


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return loads(data)


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    """Bitwise equality of all parameter arrays."""
    if not np.array_equal(a.ranks, b.ranks) or len(a.skews) != len(b.skews):
        return False
    same = [a.factors.tobytes() == b.factors.tobytes()] if a.factors.shape == b.factors.shape else [False]
    same += [x.shape == y.shape and x.tobytes() == y.tobytes() for x, y in zip(a.skews, b.skews)]
    return all(same) and a.config.geometry == b.config.geometry


__all__ = ["MAGIC", "Checkpoint", "dumps", "loads", "save_checkpoint", "load_checkpoint",
           "params_equal", "config_echo"]
