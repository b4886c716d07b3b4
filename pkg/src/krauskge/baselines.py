"""Single-operator KGE models written as kappa = 1 Kraus channels.

Entities are rank-one densities ``h h^T / ||h||^2``.  Complex vectors are
embedded in ``R^{2d}`` as ``(Re z, Im z)`` (real parts first), and complex
multiplication by ``diag(r)`` becomes the block matrix

    [[diag(Re r), -diag(Im r)],
     [diag(Im r),  diag(Re r)]].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Geometry, KrausChannel, completeness_residual
from .data import gauss_rank
from .errors import InvalidSign, NotOrthogonal, NotWOrthogonal, UnknownModel
from .param import lorentz_cayley, w_skew
from .training import score

MODELS = ("rescal", "distmult", "rotate", "golde")


def channel_from_rescal(M) -> KrausChannel:
    M = np.asarray(M, dtype=np.float64)
    if np.linalg.norm(M.T @ M - np.eye(M.shape[1])) > 1e-8:
        raise NotOrthogonal("RESCAL matrix must satisfy M^T M = I to be a complete channel")
    return KrausChannel(M[None])


def channel_from_distmult(signs) -> KrausChannel:
    signs = np.asarray(signs, dtype=np.float64).ravel()
    if not np.all(np.abs(signs) == 1.0):
        raise InvalidSign("DistMult relation entries must be +1 or -1 for completeness")
    return KrausChannel(np.diag(signs)[None])


def complex_block(r) -> np.ndarray:
    """Real 2d x 2d form of multiplication by diag(r), r complex."""
    r = np.asarray(r, dtype=np.complex128).ravel()
    re, im = np.diag(r.real), np.diag(r.imag)
    return np.block([[re, -im], [im, re]])


def embed_complex(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).ravel()
    return np.concatenate([z.real, z.imag])


def channel_from_rotate(theta) -> KrausChannel:
    theta = np.asarray(theta, dtype=np.float64).ravel()
    return KrausChannel(complex_block(np.exp(1j * theta))[None])


def channel_from_golde(G, g: Geometry) -> KrausChannel:
    G = np.asarray(G, dtype=np.float64)
    if np.linalg.norm(G.T @ g.W @ G - g.W) > 1e-8:
        raise NotWOrthogonal("GoldE operator must satisfy G^T diag(w) G = diag(w)")
    return KrausChannel(G[None], g)


def boost(a: float) -> np.ndarray:
    return np.array([[np.cosh(a), np.sinh(a)], [np.sinh(a), np.cosh(a)]])


# closed-form baseline scores (unit vectors)

def rescal_score(h, M, t) -> float:
    return float(t @ M @ h) ** 2


def distmult_score(h, r, t) -> float:
    return float(np.sum(h * r * t)) ** 2


def complex_score(h, r, t) -> float:
    """(Re <h, r, conj(t)>)^2 in complex arithmetic."""
    return float(np.real(np.sum(h * r * np.conj(t)))) ** 2


def rotate_distance_score(h, theta, t) -> float:
    """(1 - ||h o r - t||^2 / 2)^2 for unit-norm complex h, t."""
    r = np.exp(1j * np.asarray(theta))
    return float(1.0 - 0.5 * np.sum(np.abs(h * r - t) ** 2)) ** 2


def bilinear_score(h, G, t) -> float:
    return float(t @ G @ h) ** 2 / (float(h @ h) * float(t @ t))


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _unit_complex(rng, d):
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def random_orthogonal(rng, d) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def random_w_orthogonal(rng, g: Geometry) -> np.ndarray:
    """A w-orthogonal operator: Cayley image of a random W-skew matrix."""
    d = g.d
    if g.kind == "elliptic":
        s = np.sqrt(g.w)
        return random_orthogonal(rng, d) * s[None, :] / s[:, None]
    B = rng.standard_normal((d, d)) * 0.5
    S = (B - B.T) / 2.0
    return lorentz_cayley(w_skew(S, g, 1), g, 1, d).ops[0]


@dataclass
class EquivalenceReport:
    model: str
    trials: int
    max_deviation: float
    max_residual: float


def score_equivalence(model: str, trials: int = 1000, seed: int = 0, d: int = 6) -> EquivalenceReport:
    """Compare channel scores with the baseline's closed form on random unit vectors."""
    model = model.lower()
    if model == "transe":
        raise UnknownModel("transe is not recoverable: translation is affine, not a linear map "
                           "on density matrices, so no Kraus channel reproduces it")
    if model not in MODELS:
        raise UnknownModel(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    rng = np.random.default_rng(seed)
    worst, worst_res = 0.0, 0.0
    for trial in range(trials):
        if model == "rescal":
            M = random_orthogonal(rng, d)
            ch = channel_from_rescal(M)
            h, t = _unit(rng, d), _unit(rng, d)
            ref = rescal_score(h, M, t)
        elif model == "distmult":
            signs = rng.choice([-1.0, 1.0], size=d)
            ch = channel_from_distmult(signs)
            h, t = _unit(rng, d), _unit(rng, d)
            ref = distmult_score(h, signs, t)
        elif model == "rotate":
            theta = rng.uniform(-np.pi, np.pi, size=d)
            ch = channel_from_rotate(theta)
            hc, tc = _unit_complex(rng, d), _unit_complex(rng, d)
            h, t = embed_complex(hc), embed_complex(tc)
            ref = complex_score(hc, np.exp(1j * theta), tc)
            worst = max(worst, abs(ref - rotate_distance_score(hc, theta, tc)))
        else:
            kind = ("euclidean", "elliptic", "hyperbolic")[trial % 3]
            g = {"euclidean": Geometry.euclidean(d),
                 "elliptic": Geometry.elliptic(rng.uniform(0.5, 2.0, size=d)),
                 "hyperbolic": Geometry.hyperbolic(d)}[kind]
            G = random_orthogonal(rng, d) if kind == "euclidean" else random_w_orthogonal(rng, g)
            ch = channel_from_golde(G, g)
            h, t = _unit(rng, d), _unit(rng, d)
            ref = bilinear_score(h, G, t)
        worst = max(worst, abs(score(h, ch, t) - ref))
        worst_res = max(worst_res, completeness_residual(ch))
    return EquivalenceReport(model, trials, worst, worst_res)


@dataclass
class BottleneckReport:
    score_matrix: np.ndarray
    rank: int
    bilinear_rank: int
    d: int

    @property
    def exceeds_d(self) -> bool:
        return self.rank > self.d


def _numeric_rank(M: np.ndarray) -> int:
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return gauss_rank(M, tol=1e-10 * scale)


def verify_single_operator_bottleneck(K, X, Y) -> BottleneckReport:
    """Score matrix B[h, t] = (y_t^T K x_h)^2 of a kappa = 1 channel over rank-one entities.

    ``X`` and ``Y`` hold the head and tail unit vectors as rows.  The
    bilinear matrix ``y^T K x`` always has rank <= d; the squared matrix
    is bounded by d(d+1)/2, and ``rank`` records what is observed.
    """
    K = np.asarray(K, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    bil = X @ K.T @ Y.T  # [h, t] = y_t^T K x_h
    B = bil ** 2
    rep = BottleneckReport(B, _numeric_rank(B), _numeric_rank(bil), K.shape[0])
    if rep.bilinear_rank > rep.d:
        raise AssertionError(f"bilinear rank {rep.bilinear_rank} exceeds d={rep.d}")
    return rep


__all__ = [
    "channel_from_rescal", "channel_from_distmult", "channel_from_rotate", "channel_from_golde",
    "complex_block", "embed_complex", "boost", "score_equivalence", "EquivalenceReport",
    "verify_single_operator_bottleneck", "BottleneckReport", "rescal_score", "distmult_score",
    "complex_score", "rotate_distance_score", "bilinear_score", "random_orthogonal",
    "random_w_orthogonal", "MODELS",
]
