"""Channel algebra over real density matrices.

A relation acts on an entity's density matrix through a Kraus channel
``rho -> sum_i K_i rho K_i^T``.  Channels are complete when
``sum_i K_i^T diag(w) K_i = diag(w)`` for the weighting vector ``w`` of
their geometry; ``w = 1`` is the ordinary trace-preserving case.

Choi convention: block ``(a, b)`` of the ``d^2 x d^2`` Choi matrix holds
the channel applied to the matrix unit ``E_ab``.  A Kraus operator ``K``
corresponds to the vector ``vec(K^T)``, i.e. the columns of ``K`` stacked
one after another (``K.T.ravel()`` in numpy's row-major order).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyChannel,
    GeometryMismatch,
    IncompleteChannel,
    KappaOverflow,
    NotPSD,
    UnsupportedGeometry,
    ZeroFactor,
    ZeroMatrix,
)

KINDS = ("euclidean", "elliptic", "hyperbolic", "product")
DEFAULT_KAPPA_CAP = 4096


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Geometry:
    """Quadratic inner product ``<x, y>_w = sum_i w_i x_i y_i``.

    Product geometries keep their component geometries in ``blocks``; the
    blocks occupy contiguous coordinate ranges in order.
    """

    kind: str
    w: np.ndarray
    blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w).ravel())
        w = self.w
        if self.kind not in KINDS:
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if w.size == 0 or np.any(w == 0):
            raise ValueError("weighting vector must be nonempty with no zero entry")
        if self.kind == "euclidean" and not np.all(w == 1.0):
            raise ValueError("euclidean geometry requires w = 1")
        if self.kind == "elliptic" and np.any(w <= 0):
            raise ValueError("elliptic geometry requires w > 0")
        if self.kind == "hyperbolic":
            expected = np.ones_like(w)
            expected[0] = -1.0
            if not np.array_equal(w, expected):
                raise ValueError("hyperbolic geometry requires w = (-1, 1, ..., 1)")
        if self.kind == "product":
            if not self.blocks:
                raise ValueError("product geometry needs at least one block")
            for b in self.blocks:
                if b.kind == "product":
                    raise ValueError("nested product geometries are not supported")
            joined = np.concatenate([b.w for b in self.blocks])
            if not np.array_equal(joined, w):
                raise ValueError("product weights must concatenate the block weights")
        elif self.blocks:
            raise ValueError("only product geometries carry blocks")

    @classmethod
    def euclidean(cls, d: int) -> "Geometry":
        return cls("euclidean", np.ones(d))

    @classmethod
    def elliptic(cls, w) -> "Geometry":
        return cls("elliptic", w)

    @classmethod
    def hyperbolic(cls, d: int) -> "Geometry":
        w = np.ones(d)
        w[0] = -1.0
        return cls("hyperbolic", w)

    @classmethod
    def product(cls, blocks: Sequence["Geometry"]) -> "Geometry":
        blocks = tuple(blocks)
        return cls("product", np.concatenate([b.w for b in blocks]), blocks)

    @property
    def d(self) -> int:
        return int(self.w.size)

    @property
    def W(self) -> np.ndarray:
        return np.diag(self.w)

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "euclidean"

    def block_slices(self) -> list[tuple["Geometry", slice]]:
        """Component geometries with their coordinate ranges (self for non-products)."""
        if self.kind != "product":
            return [(self, slice(0, self.d))]
        out, start = [], 0
        for b in self.blocks:
            out.append((b, slice(start, start + b.d)))
            start += b.d
        return out

    def __eq__(self, other):
        if not isinstance(other, Geometry):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.w, other.w)
            and len(self.blocks) == len(other.blocks)
            and all(a == b for a, b in zip(self.blocks, other.blocks))
        )

    def __hash__(self):
        return hash((self.kind, self.w.tobytes()))

    def __repr__(self):
        if self.kind == "product":
            return f"Geometry(product, blocks={list(self.blocks)})"
        return f"Geometry({self.kind}, d={self.d})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Symmetric PSD matrix with trace in (0, 1]."""

    mat: np.ndarray

    def __post_init__(self):
        m = _frozen(self.mat)
        object.__setattr__(self, "mat", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not symmetric")
        if np.linalg.eigvalsh(m)[0] < -1e-10:
            raise NotPSD("density matrix has a negative eigenvalue")
        tr = np.trace(m)
        if not 0.0 < tr <= 1.0 + 1e-10:
            raise ValueError(f"density matrix trace {tr} outside (0, 1]")

    @classmethod
    def _wrap(cls, mat: np.ndarray) -> "DensityMatrix":
        # Internal results whose validity follows from construction
        # (e.g. outputs of indefinite-metric channels, whose plain trace is
        # not bounded by one).
        obj = object.__new__(cls)
        object.__setattr__(obj, "mat", _frozen(mat))
        return obj

    @property
    def d(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.mat))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    ops: np.ndarray
    geometry: Geometry = None
    relation_id: object = None

    def __post_init__(self):
        ops = _frozen(self.ops)
        if ops.ndim == 2:
            ops = _frozen(ops[None])
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise EmptyChannel("a channel needs at least one d x d operator")
        if ops.shape[1] != ops.shape[2]:
            raise DimensionMismatch(f"Kraus operators must be square, got {ops.shape[1:]}")
        object.__setattr__(self, "ops", ops)
        if self.geometry is None:
            object.__setattr__(self, "geometry", Geometry.euclidean(ops.shape[1]))
        elif self.geometry.d != ops.shape[1]:
            raise DimensionMismatch(
                f"geometry dimension {self.geometry.d} != operator dimension {ops.shape[1]}"
            )

    @property
    def kappa(self) -> int:
        return self.ops.shape[0]

    @property
    def d(self) -> int:
        return self.ops.shape[1]

    def __len__(self):
        return self.kappa


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    mat: np.ndarray
    d: int = field(default=None)

    def __post_init__(self):
        m = _frozen(self.mat)
        object.__setattr__(self, "mat", m)
        n = m.shape[0]
        d = int(round(np.sqrt(n))) if self.d is None else int(self.d)
        if m.shape != (d * d, d * d):
            raise DimensionMismatch(f"Choi matrix must be d^2 x d^2, got {m.shape} for d={d}")
        object.__setattr__(self, "d", d)
        scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-10 * scale:
            raise ValueError("Choi matrix is not symmetric")


def identity_channel(d: int, geometry: Geometry | None = None) -> KrausChannel:
    return KrausChannel(np.eye(d)[None], geometry)


def _as_matrix(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.float64)


def act(ops: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_i K_i x K_i^T for any square ``x`` (no validity checks)."""
    return np.einsum("ipq,qr,isr->ps", ops, x, ops, optimize=True)


def density_from_factor(L) -> DensityMatrix:
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 1:
        L = L[:, None]
    norm2 = float(np.sum(L * L))
    if not np.sqrt(norm2) > 1e-30:
        raise ZeroFactor("factor has (near) zero Frobenius norm")
    rho = (L @ L.T) / norm2
    rho = 0.5 * (rho + rho.T)
    return DensityMatrix(rho)


def completeness_residual(ch: KrausChannel) -> float:
    """Frobenius norm of ``sum_i K_i^T diag(w) K_i - diag(w)``."""
    ops = np.asarray(ch.ops)
    if ops.size == 0:
        raise EmptyChannel("channel has no operators")
    w = ch.geometry.w
    total = np.einsum("ipq,p,ipr->qr", ops, w, ops)
    return float(np.linalg.norm(total - np.diag(w)))


def apply_channel(ch: KrausChannel, rho, tol: float = 1e-8) -> DensityMatrix:
    x = _as_matrix(rho)
    if x.shape != (ch.d, ch.d):
        raise DimensionMismatch(f"channel acts on d={ch.d}, density has shape {x.shape}")
    res = completeness_residual(ch)
    if res > tol:
        raise IncompleteChannel(f"completeness residual {res:.3e} exceeds {tol:.1e}")
    out = act(ch.ops, x)
    out = 0.5 * (out + out.T)
    if ch.geometry.is_euclidean:
        return DensityMatrix(out)
    return DensityMatrix._wrap(out)


def _check_pair(a: KrausChannel, b: KrausChannel):
    if a.d != b.d:
        raise DimensionMismatch(f"cannot compose d={a.d} with d={b.d}")
    if a.geometry != b.geometry:
        raise GeometryMismatch(f"cannot compose {a.geometry!r} with {b.geometry!r}")


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Channel for ``second`` after ``first``; operators ``K2_j K1_i`` in (i, j) row-major order."""
    _check_pair(first, second)
    ops = np.einsum("jpq,iqr->ijpr", second.ops, first.ops).reshape(-1, first.d, first.d)
    return KrausChannel(ops, first.geometry)


def compose_path(chain: Sequence[KrausChannel], max_kappa: int = DEFAULT_KAPPA_CAP) -> KrausChannel:
    chain = list(chain)
    if not chain:
        raise EmptyChannel("empty relation path")
    for ch in chain[1:]:
        _check_pair(chain[0], ch)
    total = int(np.prod([ch.kappa for ch in chain], dtype=object))
    if total > max_kappa:
        raise KappaOverflow(f"composed Kraus rank {total} exceeds cap {max_kappa}")
    return reduce(compose, chain)


def _require_euclidean(ch: KrausChannel):
    if not ch.geometry.is_euclidean:
        raise UnsupportedGeometry(
            f"Choi construction is only defined here for euclidean channels, got {ch.geometry.kind}"
        )


def choi_matrix(ch: KrausChannel) -> ChoiMatrix:
    _require_euclidean(ch)
    # rows are vec(K_i^T): the columns of K_i laid end to end
    V = np.transpose(ch.ops, (0, 2, 1)).reshape(ch.kappa, -1)
    C = V.T @ V
    return ChoiMatrix(0.5 * (C + C.T), ch.d)


def _normalize_sign(K: np.ndarray) -> np.ndarray:
    flat = K.ravel()
    idx = int(np.argmax(np.abs(flat)))
    return -K if flat[idx] < 0 else K


def kraus_from_choi(C: ChoiMatrix, rank_tol: float | None = None) -> KrausChannel:
    """Kraus operators from the spectral decomposition of a PSD Choi matrix.

    ``rank_tol`` defaults to ``1e-8`` times the largest eigenvalue.
    """
    if not isinstance(C, ChoiMatrix):
        C = ChoiMatrix(C)
    d = C.d
    lam, vecs = np.linalg.eigh(C.mat)
    if lam[0] < -1e-6:
        raise NotPSD(f"Choi matrix has eigenvalue {lam[0]:.3e}")
    top = max(float(lam[-1]), 0.0)
    cutoff = 1e-8 * top if rank_tol is None else rank_tol
    keep = np.nonzero(lam > cutoff)[0][::-1]
    if keep.size == 0:
        raise ZeroMatrix("Choi matrix has no eigenvalue above the cutoff")
    ops = []
    for k in keep:
        v = np.sqrt(lam[k]) * vecs[:, k]
        ops.append(_normalize_sign(v.reshape(d, d).T))
    return KrausChannel(np.stack(ops))


def singular_values(C) -> np.ndarray:
    m = C.mat if isinstance(C, ChoiMatrix) else np.asarray(C, dtype=np.float64)
    if m.shape[0] == m.shape[1] and np.allclose(m, m.T, rtol=0, atol=1e-12):
        return np.sort(np.abs(np.linalg.eigvalsh(m)))[::-1]
    return np.linalg.svd(m, compute_uv=False)


def effective_rank(C, energy: float = 0.99) -> int:
    """Smallest k whose top-k squared singular values hold ``energy`` of ||C||_F^2."""
    if not 0.0 < energy < 1.0:
        raise ValueError("energy must lie strictly between 0 and 1")
    s2 = singular_values(C) ** 2
    total = float(np.sum(s2))
    if total == 0.0:
        raise ZeroMatrix("Choi matrix is zero")
    cum = np.cumsum(s2)
    k = int(np.searchsorted(cum, energy * total * (1.0 - 1e-12), side="left")) + 1
    return min(k, s2.size)


def spectral_norms(ch: KrausChannel) -> list[float]:
    return [float(np.linalg.norm(K, 2)) for K in ch.ops]


def w_trace(rho, g: Geometry) -> float:
    x = _as_matrix(rho)
    if x.shape != (g.d, g.d):
        raise DimensionMismatch(f"geometry has d={g.d}, matrix has shape {x.shape}")
    return float(np.dot(g.w, np.diag(x)))


def hs_overlap(rho_a, rho_b) -> float:
    a, b = _as_matrix(rho_a), _as_matrix(rho_b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.einsum("ij,ji->", a, b))
