"""Synthetic fixtures and scaled experiments behind the directional acceptance checks.

Each experiment takes a dataclass config, is deterministic given its seed,
and returns a small result record that scripts print and tests assert on.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    TripleStore,
    load_triples,
    matrix_rank,
    relation_matrix,
    split_triples,
    synth_relation,
)
from .evaluation import chain_queries, evaluate_split, kappa_fanout_correlation, multihop_eval
from .training import TrainConfig, train


# rank bottleneck

@dataclass
class BottleneckConfig:
    d: int = 8
    n_entities: int = 300
    heads_per_block: int = 3
    tails_per_block: int = 24
    kappas: tuple = (1, 4)
    k0: int = 1
    lr: float = 0.01
    gamma: float = 0.5
    epochs: int = 500
    eval_every: int = 25
    batch_size: int = 128
    negatives: int = 16
    seed: int = 0


@dataclass
class BottleneckResult:
    m_rank: int
    test_mrr: dict = field(default_factory=dict)
    best_epoch: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def gap(self) -> float:
        lo, hi = sorted(self.test_mrr)[0], sorted(self.test_mrr)[-1]
        return self.test_mrr[hi] - self.test_mrr[lo]


def bottleneck_store(cfg: BottleneckConfig) -> TripleStore:
    """One high-rank relation with rank(M_r) = 3d over a fixed entity budget.

    The 3d blocks draw their tails from a shared pool that fills the entities
    left over after the heads, so tail sets overlap across blocks.
    """
    rank = 3 * cfg.d
    pool = cfg.n_entities - rank * cfg.heads_per_block
    trip = synth_relation("high_rank", {"rank": rank, "heads_per_block": cfg.heads_per_block,
                                        "tails_per_block": cfg.tails_per_block, "pool": pool},
                          seed=cfg.seed)
    tr, va, te = split_triples(trip, 0.1, 0.1, seed=cfg.seed)
    return TripleStore.from_triples(tr, va, te, n_entities=cfg.n_entities, n_relations=1)


def run_bottleneck(cfg: BottleneckConfig = BottleneckConfig(), log=None) -> BottleneckResult:
    t0 = time.perf_counter()
    store = bottleneck_store(cfg)
    full = TripleStore.from_triples(store.all_triples, n_entities=cfg.n_entities, n_relations=1)
    out = BottleneckResult(matrix_rank(relation_matrix(full, 0, "train")))
    for kappa in cfg.kappas:
        tc = TrainConfig(d=cfg.d, kappa=kappa, k0=cfg.k0, gamma=cfg.gamma, lr=cfg.lr,
                         batch_size=cfg.batch_size, negatives_per_positive=cfg.negatives,
                         max_epochs=cfg.epochs, patience=cfg.epochs, eval_every=cfg.eval_every,
                         seed=cfg.seed)
        res = train(store, tc)
        out.test_mrr[kappa] = evaluate_split(res.params, store, "test").mrr
        out.best_epoch[kappa] = res.best_epoch
        if log:
            log(f"kappa={kappa} best_epoch={res.best_epoch} test_mrr={out.test_mrr[kappa]:.4f}")
    out.seconds = time.perf_counter() - t0
    return out


# fan-out diagnostic

FANOUTS = (1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16)


@dataclass
class DiagnosticConfig:
    d: int = 8
    kappa: int = 8
    fanouts: tuple = FANOUTS
    heads_per_relation: int = 12
    n_entities: int = 200
    k0: int = 1
    lr: float = 0.01
    gamma: float = 0.1
    energy: float = 0.99
    epochs: int = 100
    eval_every: int = 10
    batch_size: int = 128
    negatives: int = 8
    seed: int = 0


@dataclass
class DiagnosticResult:
    rho: float
    rows: list
    degenerate: bool
    seconds: float = 0.0

    @property
    def bound_fraction(self) -> float:
        return float(np.mean([x.bound_satisfied for x in self.rows]))


def fanout_store(cfg: DiagnosticConfig) -> TripleStore:
    """One relation per fan-out F: each of its heads links to F random tails."""
    rng = np.random.default_rng(cfg.seed)
    trip = []
    for r, f in enumerate(cfg.fanouts):
        heads = rng.choice(cfg.n_entities, size=cfg.heads_per_relation, replace=False)
        for h in heads.tolist():
            others = np.setdiff1d(np.arange(cfg.n_entities), [h])
            for t in rng.choice(others, size=f, replace=False).tolist():
                trip.append((h, r, t))
    trip = np.array(trip, dtype=np.int64)
    # hold out a few triples for early stopping; F and the ranks use train only
    perm = rng.permutation(len(trip))
    n_val = max(1, len(trip) // 20)
    return TripleStore.from_triples(trip[perm[n_val:]], trip[perm[:n_val]], trip[perm[:n_val]],
                                    n_entities=cfg.n_entities, n_relations=len(cfg.fanouts))


def run_diagnostic(cfg: DiagnosticConfig = DiagnosticConfig(), log=None) -> DiagnosticResult:
    t0 = time.perf_counter()
    store = fanout_store(cfg)
    tc = TrainConfig(d=cfg.d, kappa=cfg.kappa, k0=cfg.k0, gamma=cfg.gamma, lr=cfg.lr,
                     batch_size=cfg.batch_size, negatives_per_positive=cfg.negatives,
                     max_epochs=cfg.epochs, patience=cfg.epochs, eval_every=cfg.eval_every,
                     seed=cfg.seed)
    res = train(store, tc)
    rho, rows, degenerate = kappa_fanout_correlation(store, res.params, energy=cfg.energy)
    if log:
        for x in rows:
            log(f"relation={x.relation} F={x.fanout:.3g} kappa_eff={x.kappa_eff} "
                f"m_rank={x.m_rank} bound={x.bound}")
    return DiagnosticResult(rho, rows, degenerate, time.perf_counter() - t0)


# multi-hop

@dataclass
class MultihopConfig:
    width: int = 30
    d: int = 8
    kappa: int = 1
    k0: int = 2
    lr: float = 0.02
    gamma: float = 0.5
    epochs: int = 200
    eval_every: int = 10
    batch_size: int = 64
    negatives: int = 8
    seed: int = 0


@dataclass
class MultihopResult:
    mrr: float
    queries: int
    max_sequential_deviation: float
    seconds: float = 0.0


def chain_graph(width: int, seed: int = 0) -> np.ndarray:
    """Layers A -> B -> C of ``width`` entities; relation 0 maps A to B, relation 1 maps B to C."""
    rng = np.random.default_rng(seed)
    a = np.arange(width)
    b = width + rng.permutation(width)
    c = 2 * width + rng.permutation(width)
    r0 = np.column_stack([a, np.zeros(width, np.int64), b])
    r1 = np.column_stack([width + a, np.ones(width, np.int64), c])
    return np.concatenate([r0, r1]).astype(np.int64)


def run_multihop(cfg: MultihopConfig = MultihopConfig(), log=None) -> MultihopResult:
    """Train on one-hop edges only, then answer A -> C queries through the composed channel."""
    t0 = time.perf_counter()
    trip = chain_graph(cfg.width, cfg.seed)
    # validation reuses training edges: every one-hop fact is needed for the 2-hop paths
    store = TripleStore.from_triples(trip, trip, trip, n_entities=3 * cfg.width, n_relations=2)
    tc = TrainConfig(d=cfg.d, kappa=cfg.kappa, k0=cfg.k0, gamma=cfg.gamma, lr=cfg.lr,
                     batch_size=cfg.batch_size, negatives_per_positive=cfg.negatives,
                     max_epochs=cfg.epochs, patience=cfg.epochs, eval_every=cfg.eval_every,
                     seed=cfg.seed)
    res = train(store, tc)
    queries = chain_queries(store, (0, 1), "train")
    rep = multihop_eval(queries, res.params, store)
    if log:
        log(f"one-hop best val MRR {res.best_val_mrr:.4f}; 2-hop MRR {rep.mrr:.4f}")
    return MultihopResult(rep.mrr, rep.count, rep.extras["max_sequential_deviation"],
                          time.perf_counter() - t0)


# FB15k-237 ingestion

FB15K237_COUNTS = {"entities": 14541, "relations": 237, "train": 310116}
FB15K237_ENV = "KRAUSKGE_FB15K237"


def fb15k237_dir(root=None) -> Path | None:
    """Directory holding train.txt, valid.txt and test.txt, if one is available."""
    cands = [os.environ.get(FB15K237_ENV)]
    base = Path(root) if root else Path(__file__).resolve().parents[2]
    cands += [base / "data" / "FB15k-237", base / "data" / "fb15k-237"]
    for c in cands:
        if c and all((Path(c) / f"{s}.txt").exists() for s in ("train", "valid", "test")):
            return Path(c)
    return None


def ingestion_counts(directory) -> dict:
    d = Path(directory)
    store = load_triples(d / "train.txt", d / "valid.txt", d / "test.txt")
    return {"entities": store.n_entities, "relations": store.n_relations,
            "train": len(store.train)}


__all__ = [
    "BottleneckConfig", "BottleneckResult", "bottleneck_store", "run_bottleneck",
    "DiagnosticConfig", "DiagnosticResult", "fanout_store", "run_diagnostic", "FANOUTS",
    "MultihopConfig", "MultihopResult", "chain_graph", "run_multihop",
    "FB15K237_COUNTS", "FB15K237_ENV", "fb15k237_dir", "ingestion_counts",
]
