"""Scoring, loss, negative sampling, analytic gradients and the training loop.

Scores use the low-rank identity

    s(h, r, t) = sum_i ||L_t^T K_i L_h||_F^2 / (||L_h||_F^2 ||L_t||_F^2)

which equals ``Tr[rho_t sum_i K_i rho_h K_i^T]`` without forming ``d x d``
densities.  Gradients are propagated by hand:

    loss -> scores -> (L_h, L_t, K_i) -> U -> A -> free skew entries

with the Cayley differential ``dQ = -(I + A)^{-1} dA (I + Q)``; for the
first ``d`` columns this gives ``grad_A = -(I + A)^{-T} grad_U (P + U)^T``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .channels import Geometry, KrausChannel, completeness_residual
from .data import TripleStore, mean_degree
from .errors import EmptyNegatives, ExhaustedCandidates, MissingParam, ZeroFactor
from .param import (
    EntityParam,
    SkewParam,
    adaptive_rank,
    cayley_solve,
    init_entity,
    init_relation,
    lower_mask,
    metric_block,
    relation_channel,
    skew_adjoint,
)

log = logging.getLogger(__name__)

SCORE_CLIP = 10.0
MAX_REJECTIONS = 1000


@dataclass
class TrainConfig:
    d: int = 8
    kappa: int = 1
    k0: int = 4
    gamma: float = 0.5
    alpha: float = 1.0
    lr: float = 0.01
    batch_size: int = 256
    negatives_per_positive: int = 16
    max_epochs: int = 100
    patience: int = 10
    geometry: Geometry | None = None
    seed: int = 0
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    grad_check_interval: int = 0
    sigma: float = 0.01
    eval_every: int = 1

    def __post_init__(self):
        if self.geometry is None:
            self.geometry = Geometry.euclidean(self.d)
        if self.geometry.d != self.d:
            raise ValueError(f"geometry dimension {self.geometry.d} != d={self.d}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if not self.lr >= 0:
            raise ValueError("lr must be nonnegative")
        if self.kappa < 1 or self.k0 < 1 or self.d < 1:
            raise ValueError("d, kappa and k0 must be at least 1")
        if self.batch_size < 1 or self.negatives_per_positive < 1:
            raise ValueError("batch_size and negatives_per_positive must be at least 1")
        self.adam_betas = tuple(float(b) for b in self.adam_betas)


@dataclass
class ModelParams:
    """All trainable parameters.

    ``factors[e, :, :ranks[e]]`` is entity ``e``'s lower-banded factor; the
    columns beyond its rank are held at zero.  ``skews[b][r]`` holds the
    free skew entries of relation ``r`` for geometry block ``b`` (a single
    block unless the geometry is a product).
    """

    config: TrainConfig
    factors: np.ndarray
    ranks: np.ndarray
    skews: list

    @property
    def n_entities(self) -> int:
        return self.factors.shape[0]

    @property
    def n_relations(self) -> int:
        return self.skews[0].shape[0]

    @property
    def mask(self) -> np.ndarray:
        d, kmax = self.factors.shape[1:]
        band = lower_mask(d, kmax)
        cols = np.arange(kmax)[None, :] < self.ranks[:, None]
        return band[None, :, :] & cols[:, None, :]

    def entity(self, e: int) -> EntityParam:
        if not 0 <= e < self.n_entities:
            raise MissingParam(f"no parameters for entity {e}")
        return EntityParam(self.factors[e, :, : self.ranks[e]].copy(), e)

    def relation(self, r: int) -> list[SkewParam]:
        if not 0 <= r < self.n_relations:
            raise MissingParam(f"no parameters for relation {r}")
        kappa = self.config.kappa
        return [SkewParam(s[r].copy(), kappa * g.d) for s, (g, _) in
                zip(self.skews, self.config.geometry.block_slices())]

    def channel(self, r: int) -> KrausChannel:
        return relation_channel(self.relation(r), self.config.geometry, self.config.kappa, r)

    def channels(self) -> list[KrausChannel]:
        return [self.channel(r) for r in range(self.n_relations)]

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, self.factors.copy(), self.ranks.copy(),
                           [s.copy() for s in self.skews])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.factors[self.mask]] + [s.ravel() for s in self.skews])


def init_params(store: TripleStore, config: TrainConfig) -> ModelParams:
    d, kappa = config.d, config.kappa
    rng = np.random.default_rng(config.seed)
    deg = store.degrees
    mdeg = mean_degree(store)
    ranks = np.array([adaptive_rank(int(x), mdeg, config.k0, d) for x in deg], dtype=np.int64)
    kmax = int(ranks.max()) if ranks.size else 1
    factors = np.zeros((store.n_entities, d, kmax))
    for e, k in enumerate(ranks):
        factors[e, :, :k] = init_entity(d, int(k), rng).factor
    skews = []
    for g, _ in config.geometry.block_slices():
        n = kappa * g.d
        skews.append(np.stack([init_relation(kappa, g.d, config.sigma, rng).free
                               for _ in range(store.n_relations)])
                     if store.n_relations else np.zeros((0, n * (n - 1) // 2)))
    return ModelParams(config, factors, ranks, skews)


# scoring

def _factor(x) -> np.ndarray:
    return x.factor if isinstance(x, EntityParam) else np.asarray(x, dtype=np.float64)


def score(Lh, ch: KrausChannel, Lt) -> float:
    """Low-rank Hilbert-Schmidt overlap between the channel output and the tail."""
    Lh, Lt = _factor(Lh), _factor(Lt)
    if Lh.ndim == 1:
        Lh = Lh[:, None]
    if Lt.ndim == 1:
        Lt = Lt[:, None]
    a, b = float(np.sum(Lh * Lh)), float(np.sum(Lt * Lt))
    if not (a > 1e-60 and b > 1e-60):
        raise ZeroFactor("entity factor is zero")
    Y = np.einsum("pl,ipq,qk->ilk", Lt, ch.ops, Lh, optimize=True)
    return float(np.sum(Y * Y) / (a * b))


def adversarial_weights(neg_scores, alpha: float) -> np.ndarray:
    """Softmax of ``alpha * scores`` along the last axis."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    z = alpha * np.asarray(neg_scores, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def margin_loss(pos, neg, gamma: float, adv_weights=None) -> float:
    """sum_p sum_j w_pj max(0, gamma - s_p + s_pj); unweighted sum when no weights."""
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = [np.asarray(n, dtype=np.float64).ravel() for n in neg]
    if len(neg) != pos.size or any(n.size == 0 for n in neg):
        raise EmptyNegatives("every positive needs at least one negative")
    total = 0.0
    for i, (p, n) in enumerate(zip(pos, neg)):
        hinge = np.maximum(0.0, gamma - p + n)
        if adv_weights is None:
            total += float(np.sum(hinge))
        else:
            total += float(np.dot(np.asarray(adv_weights[i], dtype=np.float64).ravel(), hinge))
    return total


# negative sampling

def _keys(h, r, t, n_ent, n_rel):
    return (np.asarray(h, np.int64) * n_rel + np.asarray(r, np.int64)) * n_ent + np.asarray(t, np.int64)


class _TrainIndex:
    def __init__(self, store: TripleStore):
        tr = store.train
        self.n_ent, self.n_rel = store.n_entities, store.n_relations
        self.keys = np.unique(_keys(tr[:, 0], tr[:, 1], tr[:, 2], self.n_ent, self.n_rel))

    def contains(self, h, r, t) -> np.ndarray:
        k = _keys(h, r, t, self.n_ent, self.n_rel)
        pos = np.searchsorted(self.keys, k)
        pos = np.minimum(pos, self.keys.size - 1)
        return self.keys[pos] == k if self.keys.size else np.zeros(k.shape, bool)


def sample_negatives(triple, store: TripleStore, n: int, rng) -> list[tuple[int, int, int]]:
    """``n`` corruptions of ``triple`` (head or tail, 50/50), none a training triple."""
    if n < 1:
        raise ValueError("n must be at least 1")
    h, r, t = (int(x) for x in triple)
    train = store.train_set
    out = []
    for _ in range(n):
        for _attempt in range(MAX_REJECTIONS):
            e = int(rng.integers(store.n_entities))
            cand = (e, r, t) if rng.random() < 0.5 else (h, r, e)
            if cand not in train:
                out.append(cand)
                break
        else:
            raise ExhaustedCandidates(f"no valid corruption of {triple} after {MAX_REJECTIONS} draws")
    return out


def sample_negative_batch(pos: np.ndarray, index: _TrainIndex, n: int, rng) -> np.ndarray:
    """Vectorised form of :func:`sample_negatives` for a block of positives; shape (P, n, 3)."""
    P = len(pos)
    neg = np.repeat(pos[:, None, :], n, axis=1).copy()
    todo = np.ones((P, n), dtype=bool)
    attempts = 0
    while todo.any():
        if attempts >= MAX_REJECTIONS:
            raise ExhaustedCandidates(f"{int(todo.sum())} negatives unresolved after {MAX_REJECTIONS} draws")
        idx = np.nonzero(todo)
        m = idx[0].size
        ents = rng.integers(index.n_ent, size=m)
        head = rng.random(m) < 0.5
        base = pos[idx[0]]
        cand = base.copy()
        cand[head, 0] = ents[head]
        cand[~head, 2] = ents[~head]
        bad = index.contains(cand[:, 0], cand[:, 1], cand[:, 2])
        ok = ~bad
        neg[idx[0][ok], idx[1][ok]] = cand[ok]
        todo[idx[0][ok], idx[1][ok]] = False
        attempts += 1
    return neg


@dataclass
class Batch:
    pos: np.ndarray  # (P, 3)
    neg: np.ndarray  # (P, n, 3)


# forward / backward

def _build_relation(free_blocks, geometry: Geometry, kappa: int):
    d = geometry.d
    ops = np.zeros((kappa, d, d))
    caches = []
    for free, (g, sl) in zip(free_blocks, geometry.block_slices()):
        db = g.d
        n = kappa * db
        B = np.zeros((n, n))
        B[np.tril_indices(n, -1)] = free
        A = (B - B.T) / 2.0
        if g.kind == "hyperbolic":
            A = A / metric_block(g, kappa)[:, None]
        U, lu = cayley_solve(A, db)
        Kb = U.reshape(kappa, db, db)
        if g.kind == "elliptic":
            s = np.sqrt(g.w)
            Kb = Kb * s[None, None, :] / s[None, :, None]
        ops[:, sl, sl] = Kb
        caches.append((g, sl, lu, U))
    return ops, caches


def _backward_relation(gK: np.ndarray, caches, kappa: int) -> list[np.ndarray]:
    out = []
    for g, sl, lu, U in caches:
        db = g.d
        gKb = gK[:, sl, sl]
        if g.kind == "elliptic":
            s = np.sqrt(g.w)
            gKb = gKb * s[None, None, :] / s[None, :, None]
        gU = gKb.reshape(kappa * db, db)
        Z = scipy.linalg.lu_solve(lu, gU, trans=1, check_finite=False)
        PU = U.copy()
        PU[:db] += np.eye(db)
        gA = -Z @ PU.T
        if g.kind == "hyperbolic":
            gA = gA / metric_block(g, kappa)[:, None]
        out.append(skew_adjoint(gA))
    return out


def _scatter(idx: np.ndarray, vals: np.ndarray, n: int) -> np.ndarray:
    """Row sums of ``vals`` grouped by ``idx`` into an (n, ...) array."""
    N = idx.size
    onehot = sp.csr_matrix((np.ones(N), (idx, np.arange(N))), shape=(n, N))
    return np.asarray(onehot @ vals.reshape(N, -1)).reshape((n,) + vals.shape[1:])


@dataclass
class Grads:
    factors: np.ndarray
    skews: list

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.factors ** 2) + sum(np.sum(s ** 2) for s in self.skews)))

    def flat(self, mask) -> np.ndarray:
        return np.concatenate([self.factors[mask]] + [s.ravel() for s in self.skews])


@dataclass
class BatchResult:
    loss: float
    grads: Grads | None
    pos_scores: np.ndarray
    neg_scores: np.ndarray
    weights: np.ndarray
    hinge_rate: float
    clipped: int
    residual: float = 0.0


def _triple_scores(params: ModelParams, trip: np.ndarray, ops_by_rel: dict):
    """Scores for a flat (N, 3) triple array plus the intermediates needed for backprop."""
    rel_ids = np.array(sorted(ops_by_rel))
    local = np.searchsorted(rel_ids, trip[:, 1])
    ops = np.stack([ops_by_rel[r] for r in rel_ids])
    Kn = ops[local]
    Lh = params.factors[trip[:, 0]]
    Lt = params.factors[trip[:, 2]]
    X = np.einsum("nipq,nqk->nipk", Kn, Lh, optimize=True)
    Y = np.einsum("npl,nipk->nilk", Lt, X, optimize=True)
    S = np.sum(Y * Y, axis=(1, 2, 3))
    a = np.sum(Lh * Lh, axis=(1, 2))
    b = np.sum(Lt * Lt, axis=(1, 2))
    return S / (a * b), (rel_ids, local, Kn, Lh, Lt, X, Y, S, a, b)


def batch_forward_backward(params: ModelParams, batch: Batch, weights=None,
                           need_grad: bool = True) -> BatchResult:
    """Mean-over-positives loss of a batch and (optionally) its exact gradient.

    Adversarial weights are computed from the current negative scores unless
    given, and are always treated as constants.
    """
    cfg = params.config
    P, n = batch.neg.shape[:2]
    if n == 0:
        raise EmptyNegatives("batch has no negatives")
    trip = np.concatenate([batch.pos, batch.neg.reshape(-1, 3)])
    if trip[:, [0, 2]].max() >= params.n_entities or trip[:, [0, 2]].min() < 0:
        raise MissingParam("batch references an entity without parameters")
    if trip[:, 1].max() >= params.n_relations or trip[:, 1].min() < 0:
        raise MissingParam("batch references a relation without parameters")

    built = {}
    for r in np.unique(trip[:, 1]).tolist():
        built[r] = _build_relation([s[r] for s in params.skews], cfg.geometry, cfg.kappa)
    ops_by_rel = {r: v[0] for r, v in built.items()}
    raw, cache = _triple_scores(params, trip, ops_by_rel)

    clip = not cfg.geometry.is_euclidean
    s = np.clip(raw, -SCORE_CLIP, SCORE_CLIP) if clip else raw
    clipped = int(np.sum(s != raw)) if clip else 0
    sp_, sn = s[:P], s[P:].reshape(P, n)
    w = adversarial_weights(sn, cfg.alpha) if weights is None else np.asarray(weights)
    margin = cfg.gamma - sp_[:, None] + sn
    active = margin > 0
    loss = float(np.sum(w * np.where(active, margin, 0.0))) / P
    result = BatchResult(loss, None, sp_, sn, w, float(active.mean()), clipped)
    if not need_grad:
        return result

    gw = np.where(active, w, 0.0) / P
    gs = np.concatenate([-gw.sum(axis=1), gw.ravel()])
    if clip:
        gs = np.where(s == raw, gs, 0.0)
    rel_ids, local, Kn, Lh, Lt, X, Y, S, a, b = cache
    c = gs / (a * b)
    gY = 2.0 * Y * c[:, None, None, None]
    gX = np.einsum("npl,nilk->nipk", Lt, gY, optimize=True)
    gLt = np.einsum("nipk,nilk->npl", X, gY, optimize=True)
    gLh = np.einsum("nipq,nipk->nqk", Kn, gX, optimize=True)
    gLh -= (2.0 * gs * S / (a * a * b))[:, None, None] * Lh
    gLt -= (2.0 * gs * S / (a * b * b))[:, None, None] * Lt
    gKn = np.einsum("nipk,nqk->nipq", gX, Lh, optimize=True)

    gF = _scatter(np.concatenate([trip[:, 0], trip[:, 2]]), np.concatenate([gLh, gLt]),
                  params.n_entities)
    gF *= params.mask
    gK = _scatter(local, gKn, rel_ids.size)
    gskews = [np.zeros_like(s_) for s_ in params.skews]
    for j, r in enumerate(rel_ids.tolist()):
        for blk, g in enumerate(_backward_relation(gK[j], built[r][1], cfg.kappa)):
            gskews[blk][r] = g
    result.grads = Grads(gF, gskews)
    return result


def gradients(params: ModelParams, batch: Batch, weights=None) -> Grads:
    return batch_forward_backward(params, batch, weights).grads


def batch_loss(params: ModelParams, batch: Batch, weights=None) -> float:
    return batch_forward_backward(params, batch, weights, need_grad=False).loss


def _perturbed(params: ModelParams, where: tuple, delta: float) -> ModelParams:
    p = params.copy()
    kind, idx = where
    if kind == "factor":
        p.factors[idx] += delta
    else:
        p.skews[kind][idx] += delta
    return p


def parameter_coordinates(params: ModelParams):
    """Every free coordinate: lower-band factor entries then skew entries."""
    coords = [("factor", tuple(ix)) for ix in np.argwhere(params.mask)]
    for blk, s in enumerate(params.skews):
        coords += [(blk, tuple(ix)) for ix in np.argwhere(np.ones(s.shape, bool))]
    return coords


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(params: ModelParams, batch: Batch, coords=None, step: float = 1e-5,
                    floor: float = 1e-6) -> float:
    """Max relative error between analytic and central-difference gradients."""
    base = batch_forward_backward(params, batch)
    w = base.weights
    g = base.grads
    if coords is None:
        coords = parameter_coordinates(params)
    worst = 0.0
    for where in coords:
        kind, idx = where
        analytic = g.factors[idx] if kind == "factor" else g.skews[kind][idx]
        lp = batch_loss(_perturbed(params, where, step), batch, w)
        lm = batch_loss(_perturbed(params, where, -step), batch, w)
        worst = max(worst, relative_error(float(analytic), (lp - lm) / (2 * step), floor))
    return worst


# optimiser

@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        arrs = [params.factors] + list(params.skews)
        return cls([np.zeros_like(a) for a in arrs], [np.zeros_like(a) for a in arrs], 0)


def adam_step(params: ModelParams, grads: Grads, state: AdamState, lr: float,
              betas=(0.9, 0.999), eps: float = 1e-8) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update, in place on ``params``; returns (params, state)."""
    b1, b2 = betas
    state.t += 1
    arrs = [params.factors] + list(params.skews)
    gs = [grads.factors] + list(grads.skews)
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for a, g, m, v in zip(arrs, gs, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        if lr:
            a -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    params.factors *= params.mask
    return params, state


# loop

@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    grad_norm: float
    hinge_rate: float
    max_completeness_residual: float
    clipped: int = 0
    val_mrr: float | None = None
    max_grad_error: float | None = None

    def record(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_mrr": self.val_mrr,
            "grad_norm": self.grad_norm,
            "hinge_rate": self.hinge_rate,
            "clipped": self.clipped,
            "max_completeness_residual": self.max_completeness_residual,
        }


def max_residual(params: ModelParams, relations=None) -> float:
    rels = range(params.n_relations) if relations is None else relations
    return max((completeness_residual(params.channel(r)) for r in rels), default=0.0)


def train_epoch(store: TripleStore, params: ModelParams, state: AdamState, config: TrainConfig,
                rng, epoch: int = 0, index: _TrainIndex | None = None) -> EpochMetrics:
    if len(store.train) == 0:
        raise ValueError("training split is empty")
    index = index or _TrainIndex(store)
    order = rng.permutation(len(store.train))
    losses, norms, rates, clipped, worst = [], [], [], 0, None
    for bi, start in enumerate(range(0, len(order), config.batch_size)):
        pos = store.train[order[start:start + config.batch_size]]
        neg = sample_negative_batch(pos, index, config.negatives_per_positive, rng)
        batch = Batch(pos, neg)
        res = batch_forward_backward(params, batch)
        if config.grad_check_interval and bi % config.grad_check_interval == 0:
            err = _spot_check(params, batch, rng)
            worst = err if worst is None else max(worst, err)
            if err > 1e-4:
                raise AssertionError(f"gradient check failed: relative error {err:.3e}")
        adam_step(params, res.grads, state, config.lr, config.adam_betas, config.adam_eps)
        losses.append(res.loss * len(pos))
        norms.append(res.grads.norm())
        rates.append(res.hinge_rate)
        clipped += res.clipped
    if clipped:
        log.info("epoch %d: %d scores clipped to +-%g", epoch, clipped, SCORE_CLIP)
    return EpochMetrics(
        epoch=epoch,
        train_loss=float(np.sum(losses) / len(order)),
        grad_norm=float(np.mean(norms)),
        hinge_rate=float(np.mean(rates)),
        max_completeness_residual=max_residual(params),
        clipped=clipped,
        max_grad_error=worst,
    )


def _spot_check(params: ModelParams, batch: Batch, rng, n_coords: int = 12) -> float:
    small = Batch(batch.pos[:1], batch.neg[:1])
    coords = parameter_coordinates(params)
    # only coordinates that the sub-batch touches carry signal
    touched = set(small.pos[0, [0, 2]].tolist()) | set(small.neg[0][:, [0, 2]].ravel().tolist())
    rels = {int(small.pos[0, 1])}
    coords = [c for c in coords
              if (c[0] == "factor" and c[1][0] in touched) or (c[0] != "factor" and c[1][0] in rels)]
    pick = rng.choice(len(coords), size=min(n_coords, len(coords)), replace=False)
    return check_gradients(params, small, [coords[i] for i in pick])


@dataclass
class TrainResult:
    params: ModelParams
    history: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_mrr: float = float("nan")


def train(store: TripleStore, config: TrainConfig, params: ModelParams | None = None,
          on_epoch=None, val_split: str = "valid") -> TrainResult:
    """Train with early stopping on filtered validation MRR; returns the best checkpoint."""
    from .evaluation import evaluate_split

    if len(store.train) == 0 or len(store.split(val_split)) == 0:
        raise ValueError("train and validation splits must be nonempty")
    params = params or init_params(store, config)
    state = AdamState.zeros_like(params)
    index = _TrainIndex(store)
    best, best_mrr, best_epoch, since = params.copy(), -math.inf, 0, 0
    history = []
    for epoch in range(1, config.max_epochs + 1):
        rng = np.random.default_rng([config.seed, epoch])
        m = train_epoch(store, params, state, config, rng, epoch, index)
        if epoch % config.eval_every == 0 or epoch == config.max_epochs:
            m.val_mrr = evaluate_split(params, store, val_split).mrr
            if m.val_mrr > best_mrr:
                best, best_mrr, best_epoch, since = params.copy(), m.val_mrr, epoch, 0
            else:
                since += 1
        history.append(m)
        if on_epoch is not None:
            on_epoch(m)
        if m.val_mrr is not None and since >= config.patience:
            break
    return TrainResult(best, history, best_epoch, best_mrr)


__all__ = [
    "TrainConfig", "ModelParams", "init_params", "score", "adversarial_weights", "margin_loss",
    "sample_negatives", "sample_negative_batch", "Batch", "Grads", "gradients", "batch_loss",
    "batch_forward_backward", "check_gradients", "parameter_coordinates", "relative_error",
    "AdamState", "adam_step", "EpochMetrics", "train_epoch", "train", "TrainResult",
    "max_residual",
]
