"""Unconstrained parametrisations whose images satisfy the constraints exactly.

Relations: free strictly-lower entries ``B`` -> skew ``A = (B - B^T)/2`` ->
Cayley ``Q = (I + A)^{-1}(I - A)`` -> first ``d`` columns ``U`` -> ``kappa``
stacked ``d x d`` Kraus operators.  Because ``U^T U = I`` the stacked
operators are complete for every value of ``B``.

Entities: a ``d x k_e`` factor ``L`` with entries ``(i, j), j > i`` held at
zero; the density matrix is ``L L^T / Tr[L L^T]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channels import Geometry, KrausChannel
from .errors import (
    KappaMismatch,
    NearSingular,
    NonPositiveWeight,
    ShapeMismatch,
    SolveFailure,
)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass
class SkewParam:
    """Free strictly-lower-triangular entries of an ``n x n`` matrix, row-major."""

    free: np.ndarray
    n: int

    def __post_init__(self):
        self.free = np.asarray(self.free, dtype=np.float64).ravel()
        m = self.n * (self.n - 1) // 2
        if self.free.size != m:
            raise ShapeMismatch(f"n={self.n} needs {m} free entries, got {self.free.size}")

    @classmethod
    def zeros(cls, n: int) -> "SkewParam":
        return cls(np.zeros(n * (n - 1) // 2), n)

    def lower(self) -> np.ndarray:
        B = np.zeros((self.n, self.n))
        B[np.tril_indices(self.n, -1)] = self.free
        return B


def skew_materialize(p: SkewParam) -> np.ndarray:
    B = p.lower()
    return (B - B.T) / 2.0


def skew_adjoint(grad_A: np.ndarray) -> np.ndarray:
    """Pull a gradient w.r.t. ``A`` back to the free entries of ``B``."""
    n = grad_A.shape[0]
    g = (grad_A - grad_A.T) / 2.0
    return g[np.tril_indices(n, -1)]


def lower_mask(d: int, k: int) -> np.ndarray:
    """True on entries (i, j) with j <= i."""
    return np.tri(d, k, dtype=bool)


@dataclass
class EntityParam:
    factor: np.ndarray
    entity_id: object = None

    def __post_init__(self):
        self.factor = np.asarray(self.factor, dtype=np.float64)
        d, k = self.factor.shape
        if not 1 <= k <= d:
            raise ShapeMismatch(f"entity rank {k} outside [1, {d}]")
        if np.any(self.factor[~lower_mask(d, k)] != 0.0):
            raise ValueError("entity factor has nonzero entries above the diagonal band")

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @property
    def d(self) -> int:
        return self.factor.shape[0]


def cayley_solve(A: np.ndarray, d: int, check: bool = True):
    """Return ``U = (I + A)^{-1}(I - A) P`` and the LU factors of ``I + A``."""
    n = A.shape[0]
    if A.shape != (n, n) or n % d:
        raise ShapeMismatch(f"A of shape {A.shape} is not (kappa*d) square for d={d}")
    I = np.eye(n)
    lhs = I + A
    rhs = (I - A)[:, :d]
    lu = scipy.linalg.lu_factor(lhs, check_finite=False)
    U = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
    if check:
        res = np.linalg.norm(lhs @ U - rhs)
        if not res <= 1e-8 * max(1.0, np.linalg.norm(rhs)):
            raise SolveFailure(f"Cayley solve residual {res:.3e}")
    return U, lu


def cayley_stiefel(A: np.ndarray, d: int) -> np.ndarray:
    return cayley_solve(np.asarray(A, dtype=np.float64), d)[0]


def unstack(U: np.ndarray, kappa: int, d: int, geometry: Geometry | None = None,
            relation_id=None) -> KrausChannel:
    U = np.asarray(U, dtype=np.float64)
    if U.shape != (kappa * d, d):
        raise ShapeMismatch(f"expected U of shape {(kappa * d, d)}, got {U.shape}")
    return KrausChannel(U.reshape(kappa, d, d), geometry, relation_id)


def elliptic_channel(base: KrausChannel, g) -> KrausChannel:
    """Move a euclidean-complete channel to a positive weighting via W^{-1/2} K W^{1/2}."""
    w = np.asarray(g.w if isinstance(g, Geometry) else g, dtype=np.float64)
    if np.any(w <= 0):
        raise NonPositiveWeight("elliptic weights must all be positive")
    if w.size != base.d:
        raise ShapeMismatch(f"weights of length {w.size} for d={base.d}")
    s = np.sqrt(w)
    ops = base.ops * s[None, None, :] / s[None, :, None]
    geom = g if isinstance(g, Geometry) else Geometry.elliptic(w)
    return KrausChannel(ops, geom, base.relation_id)


def metric_block(g: Geometry, kappa: int) -> np.ndarray:
    """Diagonal of ``I_kappa (x) diag(w)``."""
    return np.tile(g.w, kappa)


def w_skew(S: np.ndarray, g: Geometry, kappa: int) -> np.ndarray:
    """``A = W_n^{-1} S`` for skew ``S``; satisfies ``A^T W_n = -W_n A``."""
    wn = metric_block(g, kappa)
    return S / wn[:, None]


def lorentz_cayley(A: np.ndarray, g: Geometry, kappa: int, d: int, relation_id=None) -> KrausChannel:
    A = np.asarray(A, dtype=np.float64)
    n = kappa * d
    if A.shape != (n, n) or g.d != d:
        raise ShapeMismatch(f"A of shape {A.shape} for kappa={kappa}, d={d}")
    wn = metric_block(g, kappa)
    WA = wn[:, None] * A
    if np.linalg.norm(WA + WA.T) > 1e-10 * max(1.0, np.linalg.norm(WA)):
        raise ValueError("A is not skew with respect to the block metric")
    cond = np.linalg.cond(np.eye(n) + A)
    if not cond <= 1e12:
        raise NearSingular(f"cond(I + A) = {cond:.3e}")
    U, _ = cayley_solve(A, d)
    return unstack(U, kappa, d, g, relation_id)


def product_channel(blocks) -> KrausChannel:
    """Block-diagonal channel from ``(channel, geometry)`` pairs sharing kappa."""
    blocks = list(blocks)
    if not blocks:
        raise ShapeMismatch("product_channel needs at least one block")
    kappas = {ch.kappa for ch, _ in blocks}
    if len(kappas) != 1:
        raise KappaMismatch(f"blocks disagree on kappa: {sorted(kappas)}")
    for ch, g in blocks:
        if g.d != ch.d:
            raise ShapeMismatch(f"block geometry d={g.d} vs channel d={ch.d}")
    if len(blocks) == 1:
        ch, g = blocks[0]
        return KrausChannel(ch.ops, g, ch.relation_id)
    kappa = kappas.pop()
    d = sum(ch.d for ch, _ in blocks)
    ops = np.zeros((kappa, d, d))
    start = 0
    for ch, _ in blocks:
        stop = start + ch.d
        ops[:, start:stop, start:stop] = ch.ops
        start = stop
    geoms = [g for _, g in blocks]
    if all(g.kind == "euclidean" for g in geoms):
        geom = Geometry.euclidean(d)
    else:
        geom = Geometry.product(geoms)
    return KrausChannel(ops, geom, blocks[0][0].relation_id)


def relation_channel(skews, g: Geometry, kappa: int, relation_id=None) -> KrausChannel:
    """Channel for one relation from its per-block skew parameters."""
    if isinstance(skews, SkewParam):
        skews = [skews]
    parts = g.block_slices()
    if len(skews) != len(parts):
        raise ShapeMismatch(f"{len(parts)} geometry blocks but {len(skews)} skew parameters")
    built = []
    for p, (gb, _) in zip(skews, parts):
        S = skew_materialize(p)
        if gb.kind == "hyperbolic":
            ch = lorentz_cayley(w_skew(S, gb, kappa), gb, kappa, gb.d)
        else:
            ch = unstack(cayley_stiefel(S, gb.d), kappa, gb.d)
            if gb.kind == "elliptic":
                ch = elliptic_channel(ch, gb)
        built.append((ch, gb))
    out = product_channel(built) if len(built) > 1 else KrausChannel(built[0][0].ops, g)
    return KrausChannel(out.ops, g, relation_id)


def adaptive_rank(deg: int, mean_deg: float, k0: int, d: int) -> int:
    if mean_deg <= 0 or k0 < 1:
        raise ValueError("mean degree must be positive and k0 at least 1")
    raw = math.ceil(k0 * deg / mean_deg - 1e-9)
    return int(max(1, min(d, raw)))


def init_entity(d: int, k_e: int, seed, entity_id=None) -> EntityParam:
    if not 1 <= k_e <= d:
        raise ShapeMismatch(f"entity rank {k_e} outside [1, {d}]")
    rng = _rng(seed)
    mask = lower_mask(d, k_e)
    while True:
        L = rng.normal(0.0, math.sqrt(1.0 / d), size=(d, k_e)) * mask
        if np.any(L != 0.0):
            return EntityParam(L, entity_id)


def init_relation(kappa: int, d: int, sigma: float, seed) -> SkewParam:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    n = kappa * d
    rng = _rng(seed)
    return SkewParam(rng.normal(0.0, sigma, size=n * (n - 1) // 2), n)


def cayley_residual(U: np.ndarray) -> float:
    return float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))


__all__ = [
    "SkewParam", "EntityParam", "skew_materialize", "skew_adjoint", "cayley_stiefel",
    "cayley_solve", "unstack", "elliptic_channel", "w_skew", "lorentz_cayley",
    "product_channel", "relation_channel", "adaptive_rank", "init_entity",
    "init_relation", "lower_mask", "metric_block", "cayley_residual",
]
