"""Randomised property checks shared by ``krauskge verify`` and the acceptance tests.

Each check draws instances from a fixed seed and reports the worst value of
its measured quantity against a tolerance.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .channels import (
    Geometry,
    KrausChannel,
    act,
    apply_channel,
    choi_matrix,
    completeness_residual,
    compose,
    compose_path,
    kraus_from_choi,
    spectral_norms,
)
from .data import TripleStore, gauss_rank
from .param import SkewParam, relation_channel
from .training import Batch, TrainConfig, check_gradients, init_params


@dataclass
class PropertyResult:
    name: str
    trials: int
    worst: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.worst[k] <= self.tolerance[k] for k in self.tolerance)

    def line(self) -> str:
        parts = ", ".join(f"{k}={self.worst[k]:.3e} (tol {self.tolerance[k]:.0e})"
                          for k in self.tolerance)
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.trials} trials, {parts}, {self.seconds:.1f}s"


def random_skew(rng, n: int, scale: float = 1.0) -> SkewParam:
    return SkewParam(rng.normal(0.0, scale, size=n * (n - 1) // 2), n)


def random_channel(rng, kappa: int, g: Geometry, scale: float = 1.0) -> KrausChannel:
    """Cayley channel with random free entries, one skew block per geometry block."""
    skews = [random_skew(rng, kappa * gb.d, scale) for gb, _ in g.block_slices()]
    return relation_channel(skews, g, kappa)


def random_density(rng, d: int, rank: int | None = None, trace: float = 1.0) -> np.ndarray:
    k = rank or int(rng.integers(1, d + 1))
    L = rng.standard_normal((d, k))
    rho = L @ L.T
    return trace * rho / np.trace(rho)


def _faulty(ch: KrausChannel, eps: float = 1e-3) -> KrausChannel:
    ops = ch.ops.copy()
    ops[0, 0, 0] += eps
    return KrausChannel(ops, ch.geometry, ch.relation_id)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_completeness(trials: int = 1000, seed: int = 0, kappas=(1, 2, 4, 8), dims=(4, 8, 32),
                       inject_fault: bool = False) -> PropertyResult:
    rng = np.random.default_rng(seed)
    combos = [(k, d) for k in kappas for d in dims]
    res, norm = 0.0, 0.0
    for i in range(trials):
        kappa, d = combos[i % len(combos)]
        ch = random_channel(rng, kappa, Geometry.euclidean(d))
        if inject_fault and i == 0:
            ch = _faulty(ch)
        res = max(res, completeness_residual(ch))
        norm = max(norm, max(spectral_norms(ch)) - 1.0)
    return PropertyResult("completeness", trials, {"residual": res, "spectral_excess": norm},
                          {"residual": 1e-10, "spectral_excess": 1e-8})


@_timed
def check_trace_psd(trials: int = 1000, seed: int = 1) -> PropertyResult:
    rng = np.random.default_rng(seed)
    dtr, neg = 0.0, 0.0
    for i in range(trials):
        d = int(rng.integers(2, 17))
        kappa = int(rng.integers(1, 5))
        ch = random_channel(rng, kappa, Geometry.euclidean(d))
        rho = random_density(rng, d, trace=float(rng.uniform(0.1, 1.0)))
        out = apply_channel(ch, rho).mat
        dtr = max(dtr, abs(np.trace(out) - np.trace(rho)))
        neg = max(neg, -float(np.linalg.eigvalsh(out).min()))
    return PropertyResult("trace_psd", trials, {"trace_change": dtr, "negative_eig": neg},
                          {"trace_change": 1e-8, "negative_eig": 1e-8})


@_timed
def check_composition(pairs: int = 500, chains: int = 100, seed: int = 2) -> PropertyResult:
    rng = np.random.default_rng(seed)
    res, dev = 0.0, 0.0
    for i in range(pairs + chains):
        d = int(rng.integers(2, 9))
        length = 2 if i < pairs else 3
        chain = [random_channel(rng, int(rng.integers(1, 4)), Geometry.euclidean(d))
                 for _ in range(length)]
        comp = compose(chain[0], chain[1]) if length == 2 else compose_path(chain)
        res = max(res, completeness_residual(comp))
        rho = random_density(rng, d)
        seq = rho
        for ch in chain:
            seq = act(ch.ops, seq)
        dev = max(dev, float(np.max(np.abs(act(comp.ops, rho) - seq))))
    return PropertyResult("composition", pairs + chains, {"residual": res, "apply_deviation": dev},
                          {"residual": 1e-7, "apply_deviation": 1e-9})


@_timed
def check_choi(trials: int = 200, seed: int = 3) -> PropertyResult:
    """Choi -> Kraus -> Choi round trip and Choi rank = kappa for independent operators."""
    rng = np.random.default_rng(seed)
    err, rank_miss = 0.0, 0
    for _ in range(trials):
        d = int(rng.integers(2, 9))
        kappa = int(rng.integers(1, min(8, d * d) + 1))
        ch = random_channel(rng, kappa, Geometry.euclidean(d))
        C = choi_matrix(ch)
        back = choi_matrix(kraus_from_choi(C))
        err = max(err, float(np.linalg.norm(back.mat - C.mat)))
        independent = gauss_rank(ch.ops.reshape(kappa, -1).T, tol=1e-8) == kappa
        if independent and np.linalg.matrix_rank(C.mat, tol=1e-8 * np.abs(C.mat).max()) != kappa:
            rank_miss += 1
    return PropertyResult("choi", trials, {"roundtrip": err, "rank_mismatches": float(rank_miss)},
                          {"roundtrip": 1e-8, "rank_mismatches": 0.0})


def _gradient_instance(rng, i: int):
    d = int(rng.integers(2, 9))
    kappa = int(rng.integers(1, 4))
    kind = ("euclidean", "elliptic", "hyperbolic", "product")[i % 4]
    if kind == "euclidean" or (kind == "product" and d < 2):
        g = Geometry.euclidean(d)
    elif kind == "elliptic":
        g = Geometry.elliptic(rng.uniform(0.5, 2.0, size=d))
    elif kind == "hyperbolic":
        g = Geometry.hyperbolic(d)
    else:
        a = int(rng.integers(1, d))
        g = Geometry.product([Geometry.euclidean(a), Geometry.hyperbolic(d - a)])
    n_ent, n_rel = int(rng.integers(3, 7)), int(rng.integers(1, 3))
    trip = np.column_stack([rng.integers(0, n_ent, 6), rng.integers(0, n_rel, 6),
                            rng.integers(0, n_ent, 6)])
    store = TripleStore.from_triples(trip, n_entities=n_ent, n_relations=n_rel)
    # a margin above the largest attainable euclidean score keeps every hinge active,
    # so finite differences never straddle a kink
    cfg = TrainConfig(d=d, kappa=kappa, k0=min(3, d), gamma=2.0, geometry=g,
                      seed=int(rng.integers(1 << 31)), sigma=0.3)
    params = init_params(store, cfg)
    params.ranks = np.minimum(params.ranks, 3)
    params.factors = params.factors[:, :, :int(params.ranks.max())].copy()
    params.factors *= params.mask
    neg = np.stack([np.column_stack([rng.integers(0, n_ent, 3), np.full(3, r),
                                     rng.integers(0, n_ent, 3)]) for r in trip[:, 1]])
    return params, Batch(trip, neg)


@_timed
def check_gradient_suite(trials: int = 50, seed: int = 4, tol: float = 1e-4) -> PropertyResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(trials):
        params, batch = _gradient_instance(rng, i)
        worst = max(worst, check_gradients(params, batch, step=1e-5))
    return PropertyResult("gradients", trials, {"relative_error": worst}, {"relative_error": tol})


@_timed
def check_w_geometry(trials: int = 500, seed: int = 5) -> PropertyResult:
    rng = np.random.default_rng(seed)
    ell, lor = 0.0, 0.0
    for _ in range(trials):
        d = int(rng.integers(2, 9))
        kappa = int(rng.integers(1, 4))
        g = Geometry.elliptic(rng.uniform(0.1, 10.0, size=d))
        ell = max(ell, completeness_residual(random_channel(rng, kappa, g)))
        lor = max(lor, completeness_residual(random_channel(rng, kappa, Geometry.hyperbolic(d), 0.3)))
    return PropertyResult("w_geometry", trials, {"elliptic": ell, "lorentzian": lor},
                          {"elliptic": 1e-7, "lorentzian": 1e-7})


@_timed
def check_recovery(trials: int = 1000, seed: int = 6) -> PropertyResult:
    worst, tol = {}, {}
    for j, model in enumerate(baselines.MODELS):
        rep = baselines.score_equivalence(model, trials, seed + j)
        worst[model] = rep.max_deviation
        tol[model] = 1e-10
    return PropertyResult("recovery", trials, worst, tol)


@_timed
def check_bottleneck(trials: int = 100, seed: int = 7) -> PropertyResult:
    """kappa = 1 over n = 3d rank-one entities: bilinear score matrix rank <= d."""
    rng = np.random.default_rng(seed)
    excess, above_d = 0.0, 0
    for _ in range(trials):
        d = int(rng.integers(2, 9))
        K = random_channel(rng, 1, Geometry.euclidean(d)).ops[0]
        X = rng.standard_normal((3 * d, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        rep = baselines.verify_single_operator_bottleneck(K, X, X)
        excess = max(excess, float(rep.bilinear_rank - d))
        above_d += rep.exceeds_d
    res = PropertyResult("bottleneck", trials, {"bilinear_rank_excess": excess},
                         {"bilinear_rank_excess": 0.0})
    res.worst["squared_rank_above_d"] = float(above_d)
    return res


SUITE = (check_completeness, check_trace_psd, check_composition, check_choi,
         check_gradient_suite, check_w_geometry, check_recovery, check_bottleneck)


def run_suite(inject_fault: bool = False, scale: float = 1.0) -> list[PropertyResult]:
    """Run every check; ``scale`` shrinks the trial counts for quick runs."""
    def n(x):
        return max(1, int(round(x * scale)))

    return [
        check_completeness(n(1000), inject_fault=inject_fault),
        check_trace_psd(n(1000)),
        check_composition(n(500), n(100)),
        check_choi(n(200)),
        check_gradient_suite(n(50)),
        check_w_geometry(n(500)),
        check_recovery(n(1000)),
        check_bottleneck(n(100)),
    ]


__all__ = ["PropertyResult", "random_channel", "random_density", "random_skew", "run_suite",
           "SUITE"] + [fn.__name__ for fn in SUITE]
