"""Filtered link-prediction ranking, stratification, multi-hop queries and diagnostics."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from .channels import (
    ChoiMatrix,
    KrausChannel,
    act,
    apply_channel,
    compose_path,
    density_from_factor,
    effective_rank,
)
from .data import PATTERNS, TripleStore, all_relation_stats
from .errors import EmptyRanks, KappaOverflow, TooFewRelations, UnknownId

HITS_AT = (1, 3, 10)


@dataclass(frozen=True)
class RankResult:
    triple: tuple
    direction: str
    raw_rank: float
    filtered_rank: float


@dataclass
class MetricsReport:
    mrr: float
    hits1: float
    hits3: float
    hits10: float
    count: int
    by_pattern: dict | None = None
    by_relation: dict | None = None
    extras: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {"mrr": self.mrr, "hits1": self.hits1, "hits3": self.hits3,
                "hits10": self.hits10, "count": self.count}


class ModelScorer:
    """Scores every candidate entity for a fixed (h, r, ?) or (?, r, t) query.

    Tail candidates use ``Tr[rho_t Phi(rho_h)]``; head candidates use the
    adjoint channel, ``Tr[rho_h Phi^*(rho_t)]``, so no inverse relation is
    ever synthesised.
    """

    def __init__(self, params):
        self.params = params
        F = params.factors
        self.factors = F
        self.norms = np.sum(F * F, axis=(1, 2))
        self._channels: dict[int, KrausChannel] = {}

    @property
    def n_entities(self) -> int:
        return self.factors.shape[0]

    def channel(self, r: int) -> KrausChannel:
        if r not in self._channels:
            if not 0 <= r < self.params.n_relations:
                raise UnknownId(f"unknown relation {r}")
            self._channels[r] = self.params.channel(r)
        return self._channels[r]

    def density(self, e: int) -> np.ndarray:
        if not 0 <= e < self.n_entities:
            raise UnknownId(f"unknown entity {e}")
        return density_from_factor(self.factors[e]).mat

    def overlaps(self, M: np.ndarray) -> np.ndarray:
        """Tr[rho_e M] for every entity e."""
        F = self.factors
        return np.einsum("npk,pq,nqk->n", F, M, F, optimize=True) / self.norms

    def tail_scores(self, h: int, r: int) -> np.ndarray:
        return self.overlaps(act(self.channel(r).ops, self.density(h)))

    def head_scores(self, r: int, t: int) -> np.ndarray:
        ops = self.channel(r).ops
        return self.overlaps(act(np.transpose(ops, (0, 2, 1)), self.density(t)))

    def path_tail_scores(self, h: int, ch: KrausChannel) -> np.ndarray:
        return self.overlaps(act(ch.ops, self.density(h)))


def _scorer(model):
    return model if hasattr(model, "tail_scores") else ModelScorer(model)


def mean_rank(scores: np.ndarray, target: int, exclude=()) -> float:
    """1 + #strictly better + (#ties)/2 among candidates not excluded."""
    s = scores[target]
    keep = np.ones(scores.size, dtype=bool)
    keep[target] = False
    if exclude:
        keep[np.fromiter(exclude, dtype=np.int64)] = False
    other = scores[keep]
    return 1.0 + float(np.sum(other > s)) + 0.5 * float(np.sum(other == s))


def _check_triple(triple, scorer, store: TripleStore):
    h, r, t = (int(x) for x in triple)
    n = store.n_entities
    if not (0 <= h < n and 0 <= t < n and 0 <= r < store.n_relations):
        raise UnknownId(f"triple {triple} outside the vocabulary")
    return h, r, t


def rank_triple(triple, model, store: TripleStore, direction: str = "tail") -> RankResult:
    """Raw and filtered mean-convention rank of the true entity in one direction."""
    scorer = _scorer(model)
    h, r, t = _check_triple(triple, scorer, store)
    if direction == "tail":
        scores = scorer.tail_scores(h, r)
        target, known = t, store.hr_to_tails.get((h, r), set())
    elif direction == "head":
        scores = scorer.head_scores(r, t)
        target, known = h, store.rt_to_heads.get((r, t), set())
    else:
        raise ValueError("direction must be 'head' or 'tail'")
    return RankResult((h, r, t), direction, mean_rank(scores, target),
                      mean_rank(scores, target, known - {target}))


def metrics(ranks, filtered: bool = True) -> MetricsReport:
    ranks = list(ranks)
    if not ranks:
        raise EmptyRanks("no ranks to summarise")
    vals = np.array([x.filtered_rank if filtered else x.raw_rank for x in ranks]
                    if isinstance(ranks[0], RankResult) else ranks, dtype=np.float64)
    return MetricsReport(
        mrr=float(np.mean(1.0 / vals)),
        hits1=float(np.mean(vals <= 1)),
        hits3=float(np.mean(vals <= 3)),
        hits10=float(np.mean(vals <= 10)),
        count=int(vals.size),
    )


def rank_split(model, store: TripleStore, split: str = "test", triples=None) -> list[RankResult]:
    """Head and tail ranks for every triple of a split, sharing scores across queries."""
    scorer = _scorer(model)
    trip = store.split(split) if triples is None else np.asarray(triples).reshape(-1, 3)
    by_hr, by_rt = defaultdict(list), defaultdict(list)
    for h, r, t in trip.tolist():
        _check_triple((h, r, t), scorer, store)
        by_hr[(h, r)].append(t)
        by_rt[(r, t)].append(h)
    out = []
    for (h, r), tails in by_hr.items():
        scores = scorer.tail_scores(h, r)
        known = store.hr_to_tails.get((h, r), set())
        for t in tails:
            out.append(RankResult((h, r, t), "tail", mean_rank(scores, t),
                                  mean_rank(scores, t, known - {t})))
    for (r, t), heads in by_rt.items():
        scores = scorer.head_scores(r, t)
        known = store.rt_to_heads.get((r, t), set())
        for h in heads:
            out.append(RankResult((h, r, t), "head", mean_rank(scores, h),
                                  mean_rank(scores, h, known - {h})))
    return out


def evaluate_split(model, store: TripleStore, split: str = "test", filtered: bool = True,
                   per_relation: bool = False) -> MetricsReport:
    ranks = rank_split(model, store, split)
    rep = metrics(ranks, filtered)
    if per_relation:
        groups = defaultdict(list)
        for x in ranks:
            groups[x.triple[1]].append(x)
        rep.by_relation = {r: metrics(v, filtered) for r, v in sorted(groups.items())}
    return rep


def stratified_eval(model, store: TripleStore, split: str = "test", filtered: bool = True,
                    d: int | None = None) -> MetricsReport:
    """Overall metrics plus one bucket per mapping pattern present in the split."""
    scorer = _scorer(model)
    d = d or scorer.factors.shape[1]
    patterns = {r: s.pattern for r, s in all_relation_stats(store, d).items()}
    ranks = rank_split(scorer, store, split)
    rep = metrics(ranks, filtered)
    buckets = defaultdict(list)
    for x in ranks:
        p = patterns.get(x.triple[1])
        if p is not None:
            buckets[p].append(x)
    rep.by_pattern = {p: metrics(buckets[p], filtered) for p in PATTERNS if buckets.get(p)}
    return rep


# multi-hop

def path_answers(store: TripleStore, head: int, path, split: str = "all") -> set:
    """Entities reachable from ``head`` by following ``path`` through the graph."""
    hr = store.hr_to_tails if split == "all" else _split_index(store, split)
    frontier = {head}
    for r in path:
        nxt = set()
        for e in frontier:
            nxt |= hr.get((e, r), set())
        frontier = nxt
    return frontier


def _split_index(store: TripleStore, split: str) -> dict:
    out = defaultdict(set)
    for h, r, t in store.split(split).tolist():
        out[(h, r)].add(t)
    return out


def sequential_path_scores(scorer, head: int, path) -> np.ndarray:
    """Scores of every tail after applying each relation's channel in turn."""
    rho = scorer.density(head)
    for r in path:
        rho = apply_channel(scorer.channel(r), rho).mat
    return scorer.overlaps(rho)


def multihop_eval(queries, model, store: TripleStore, filtered: bool = True,
                  traverse: bool = True, check_sequential: bool = True,
                  max_kappa: int = 4096) -> MetricsReport:
    """Rank answers of (head, relation path, tail) queries with composed channels.

    Filtering removes other known answers of the same (head, path): those
    listed among ``queries`` and, when ``traverse`` is set, every entity the
    path reaches in the stored graph.  One-hop triples are never filtered.
    """
    scorer = _scorer(model)
    queries = [(int(h), tuple(int(r) for r in path), int(t)) for h, path, t in queries]
    listed = defaultdict(set)
    for h, path, t in queries:
        if len(path) < 2:
            raise ValueError("multi-hop queries need a path of at least two relations")
        for r in path:
            if not 0 <= r < store.n_relations:
                raise UnknownId(f"unknown relation {r} in path {path}")
        listed[(h, path)].add(t)
    composed: dict[tuple, KrausChannel] = {}
    ranks, skipped, worst = [], 0, 0.0
    for h, path, t in queries:
        if path not in composed:
            try:
                composed[path] = compose_path([scorer.channel(r) for r in path], max_kappa)
            except KappaOverflow:
                composed[path] = None
        ch = composed[path]
        if ch is None:
            skipped += 1
            continue
        scores = scorer.path_tail_scores(h, ch)
        if check_sequential:
            seq = sequential_path_scores(scorer, h, path)
            worst = max(worst, float(np.max(np.abs(seq - scores))))
        known = set(listed[(h, path)])
        if traverse:
            known |= path_answers(store, h, path)
        known.discard(t)
        ranks.append(RankResult((h, path, t), "tail", mean_rank(scores, t),
                                mean_rank(scores, t, known)))
    if not ranks:
        raise EmptyRanks(f"all {skipped} multi-hop queries were skipped")
    rep = metrics(ranks, filtered)
    rep.extras = {"skipped": skipped, "max_sequential_deviation": worst if check_sequential else None}
    return rep


def chain_queries(store: TripleStore, path, split: str = "all") -> list[tuple]:
    """Every (head, path, tail) answer reachable in the graph along ``path``."""
    heads = np.unique(store.split(split)[:, 0])
    out = []
    for h in heads.tolist():
        for t in sorted(path_answers(store, h, path, split)):
            out.append((h, tuple(path), t))
    return out


# diagnostics

def operator_choi(ch: KrausChannel) -> ChoiMatrix:
    """Sum of vec(K_i^T) vec(K_i^T)^T for any geometry (equals the Choi matrix when euclidean)."""
    V = np.transpose(ch.ops, (0, 2, 1)).reshape(ch.kappa, -1)
    C = V.T @ V
    return ChoiMatrix(0.5 * (C + C.T), ch.d)


def spearman(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    return float(scipy.stats.spearmanr(x, y).statistic)


@dataclass
class DiagnosticRow:
    relation: int
    fanout: float
    kappa_eff: int
    m_rank: int
    bound: int

    @property
    def bound_satisfied(self) -> bool:
        return self.kappa_eff >= self.bound


def kappa_fanout_correlation(store: TripleStore, model, d: int | None = None,
                             energy: float = 0.99):
    """Spearman correlation between fan-out F(r) and learned effective Kraus rank.

    Returns ``(rho, rows, degenerate)``; ``rho`` is NaN and ``degenerate``
    True when either column is constant.
    """
    scorer = _scorer(model)
    d = d or scorer.factors.shape[1]
    stats = all_relation_stats(store, d)
    if len(stats) < 3:
        raise TooFewRelations(f"need at least 3 relations with training triples, got {len(stats)}")
    rows = []
    for r, s in stats.items():
        ch = scorer.channel(r)
        rows.append(DiagnosticRow(r, s.fanout, effective_rank(operator_choi(ch), energy),
                                  s.m_rank, s.bound))
    rho = spearman([x.fanout for x in rows], [x.kappa_eff for x in rows])
    return rho, rows, math.isnan(rho)


def write_diagnostics_tsv(path, rows, store: TripleStore):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("relation\tF\tkappa_eff\tm_rank\tbound\tbound_satisfied\n")
        for x in rows:
            fh.write(f"{store.relations.names[x.relation]}\t{x.fanout:.6g}\t{x.kappa_eff}\t"
                     f"{x.m_rank}\t{x.bound}\t{str(x.bound_satisfied).lower()}\n")


def format_report(rep: MetricsReport, title: str = "overall") -> str:
    lines = [f"{'bucket':<10} {'count':>7} {'MRR':>7} {'H@1':>7} {'H@3':>7} {'H@10':>7}"]

    def line(name, m):
        return f"{name:<10} {m.count:>7d} {m.mrr:>7.4f} {m.hits1:>7.4f} {m.hits3:>7.4f} {m.hits10:>7.4f}"

    lines.append(line(title, rep))
    for name, m in (rep.by_pattern or {}).items():
        lines.append(line(name, m))
    return "\n".join(lines)


__all__ = [
    "RankResult", "MetricsReport", "ModelScorer", "rank_triple", "metrics", "rank_split",
    "evaluate_split", "stratified_eval", "multihop_eval", "path_answers", "chain_queries",
    "sequential_path_scores", "kappa_fanout_correlation", "operator_choi", "spearman",
    "DiagnosticRow", "write_diagnostics_tsv", "format_report", "mean_rank",
]
