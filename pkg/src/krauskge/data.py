"""Triple storage, relation statistics and the empirical relation-matrix rank."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import EmptyRelation, EmptySplit, InvalidParams, ParseError, TooLargeExact

log = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")
PATTERNS = ("1-1", "1-N", "N-1", "N-N")
PATTERN_CUT = 1.5
DENSE_RANK_CUTOFF = 4000
RANK_TOL = 1e-10


class Vocab:
    """Bidirectional string <-> id map, ids in first-appearance order."""

    def __init__(self, names=()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        i = self.index.get(name)
        if i is None:
            i = self.index[name] = len(self.names)
            self.names.append(name)
        return i

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name):
        return self.index[name]

    def __contains__(self, name):
        return name in self.index


def _index(triples: np.ndarray):
    hr, rt = defaultdict(set), defaultdict(set)
    for h, r, t in triples.tolist():
        hr[(h, r)].add(t)
        rt[(r, t)].add(h)
    return dict(hr), dict(rt)


@dataclass
class TripleStore:
    entities: Vocab
    relations: Vocab
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    duplicates: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in SPLITS:
            arr = np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 3)
            setattr(self, name, arr)
            if arr.size:
                if arr[:, [0, 2]].min() < 0 or arr[:, [0, 2]].max() >= len(self.entities):
                    raise ValueError(f"{name}: entity id out of range")
                if arr[:, 1].min() < 0 or arr[:, 1].max() >= len(self.relations):
                    raise ValueError(f"{name}: relation id out of range")

    @classmethod
    def from_triples(cls, train, valid=(), test=(), n_entities=None, n_relations=None):
        """Build a store from integer triples; names are the decimal ids."""
        arrs = [np.asarray(x, dtype=np.int64).reshape(-1, 3) for x in (train, valid, test)]
        allt = np.concatenate(arrs)
        ne = n_entities if n_entities is not None else int(allt[:, [0, 2]].max()) + 1
        nr = n_relations if n_relations is not None else int(allt[:, 1].max()) + 1
        return cls(Vocab(map(str, range(ne))), Vocab(map(str, range(nr))), *arrs)

    def split(self, name: str) -> np.ndarray:
        if name == "all":
            return self.all_triples
        if name not in SPLITS:
            raise KeyError(f"unknown split {name!r}")
        return getattr(self, name)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    @cached_property
    def all_triples(self) -> np.ndarray:
        return np.concatenate([self.train, self.valid, self.test])

    @cached_property
    def _train_index(self):
        return _index(self.train)

    @cached_property
    def _all_index(self):
        return _index(self.all_triples)

    @property
    def hr_to_tails(self) -> dict:
        """(h, r) -> tails over train, valid and test (filtered evaluation)."""
        return self._all_index[0]

    @property
    def rt_to_heads(self) -> dict:
        return self._all_index[1]

    @property
    def train_hr_to_tails(self) -> dict:
        return self._train_index[0]

    @property
    def train_rt_to_heads(self) -> dict:
        return self._train_index[1]

    @cached_property
    def train_set(self) -> frozenset:
        return frozenset(map(tuple, self.train.tolist()))

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_entities, dtype=np.int64)
        np.add.at(deg, self.train[:, 0], 1)
        np.add.at(deg, self.train[:, 2], 1)
        return deg


def _read_split(path, ents: Vocab, rels: Vocab):
    rows, seen, dup = [], set(), 0
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not all(parts):
                raise ParseError(path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            key = tuple(parts)
            if key in seen:
                dup += 1
                continue
            seen.add(key)
            h, r, t = parts
            rows.append((ents.add(h), rels.add(r), ents.add(t)))
    if not rows:
        raise EmptySplit(f"{path} contains no triples")
    return np.array(rows, dtype=np.int64), dup


def load_triples(train_path, valid_path, test_path) -> TripleStore:
    ents, rels = Vocab(), Vocab()
    arrs, dups = [], {}
    for name, path in zip(SPLITS, (train_path, valid_path, test_path)):
        arr, dup = _read_split(path, ents, rels)
        if dup:
            log.warning("%s: dropped %d duplicate triples", path, dup)
        arrs.append(arr)
        dups[name] = dup
    return TripleStore(ents, rels, *arrs, duplicates=dups)


def write_triples(path, triples: np.ndarray, store: TripleStore):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t in np.asarray(triples).tolist():
            fh.write(f"{store.entities.names[h]}\t{store.relations.names[r]}\t{store.entities.names[t]}\n")


def write_store(store: TripleStore, directory) -> dict:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name in SPLITS:
        paths[name] = directory / f"{name}.txt"
        write_triples(paths[name], store.split(name), store)
    return paths


@dataclass(frozen=True)
class RelationStats:
    relation_id: int
    tph: float
    hpt: float
    fanout: float
    pattern: str
    m_rank: int
    bound: int
    approximate: bool = False
    count: int = 0


def classify_pattern(tph: float, hpt: float) -> str:
    many_tails = tph >= PATTERN_CUT
    many_heads = hpt >= PATTERN_CUT
    return {(False, False): "1-1", (True, False): "1-N",
            (False, True): "N-1", (True, True): "N-N"}[(many_tails, many_heads)]


def _relation_rows(store: TripleStore, r: int, split: str) -> np.ndarray:
    trip = store.split(split)
    return trip[trip[:, 1] == r]


def relation_matrix(store: TripleStore, r: int, split: str = "train") -> sp.csr_matrix:
    """Binary |E| x |E| matrix with a one at (h, t) for every (h, r, t) in the split."""
    if not 0 <= r < store.n_relations:
        raise EmptyRelation(f"unknown relation {r}")
    rows = _relation_rows(store, r, split)
    if rows.size == 0:
        raise EmptyRelation(f"relation {r} has no triples in {split}")
    n = store.n_entities
    M = sp.csr_matrix((np.ones(len(rows)), (rows[:, 0], rows[:, 2])), shape=(n, n))
    M.data[:] = 1.0
    return M


def compact(M) -> np.ndarray:
    """Dense copy with all-zero rows and columns removed."""
    M = sp.csr_matrix(M)
    rows = np.unique(M.nonzero()[0])
    cols = np.unique(M.nonzero()[1])
    return M[rows][:, cols].toarray()


def gauss_rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by Gaussian elimination with partial (row) pivoting."""
    A = np.array(A, dtype=np.float64)
    m, n = A.shape
    rank = 0
    for col in range(n):
        if rank == m:
            break
        sub = np.abs(A[rank:, col])
        p = rank + int(np.argmax(sub))
        if sub[p - rank] <= tol:
            continue
        if p != rank:
            A[[rank, p], col:] = A[[p, rank], col:]
        pivot_row = A[rank, col + 1:]
        factors = A[rank + 1:, col] / A[rank, col]
        A[rank + 1:, col + 1:] -= np.outer(factors, pivot_row)
        A[rank + 1:, col] = 0.0
        rank += 1
    return rank


def sketch_rank(M, tol: float = RANK_TOL, oversample: int = 10, seed: int = 0) -> int:
    """Randomised range-finder rank estimate; widens the sketch until it is not saturated."""
    M = sp.csr_matrix(M)
    m, n = M.shape
    rng = np.random.default_rng(seed)
    width = min(n, 64 + oversample)
    while True:
        Y = M @ rng.standard_normal((n, width))
        s = np.linalg.svd(Y, compute_uv=False)
        r = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
        if r <= width - oversample or width >= min(m, n):
            return min(r, m, n)
        width = min(n, 2 * width)


def matrix_rank(M, exact: bool | None = None, return_flag: bool = False):
    """Real rank of a sparse binary matrix.

    Exact elimination on the compacted matrix up to ``DENSE_RANK_CUTOFF``
    rows or columns; beyond that a randomised sketch is used and flagged
    approximate (``return_flag=True`` returns ``(rank, approximate)``).
    """
    M = sp.csr_matrix(M)
    if M.nnz == 0:
        raise EmptyRelation("matrix has no nonzero entries")
    rows = np.unique(M.nonzero()[0])
    cols = np.unique(M.nonzero()[1])
    big = max(rows.size, cols.size) > DENSE_RANK_CUTOFF
    if big and exact:
        raise TooLargeExact(f"compacted size {rows.size}x{cols.size} above dense cutoff")
    if big:
        rank, approx = sketch_rank(M[rows][:, cols]), True
    else:
        rank, approx = gauss_rank(M[rows][:, cols].toarray()), False
    return (rank, approx) if return_flag else rank


def rank_lower_bound(m_rank: int, d: int) -> int:
    if m_rank < 0 or d < 1:
        raise ValueError("need m_rank >= 0 and d >= 1")
    return -(-int(m_rank) // int(d))


def relation_stats(store: TripleStore, r: int, d: int) -> RelationStats:
    rows = _relation_rows(store, r, "train")
    if rows.size == 0:
        raise EmptyRelation(f"relation {r} has no training triples")
    n = len(rows)
    tph = n / len(np.unique(rows[:, 0]))
    hpt = n / len(np.unique(rows[:, 2]))
    m_rank, approx = matrix_rank(relation_matrix(store, r, "train"), return_flag=True)
    return RelationStats(
        relation_id=int(r), tph=tph, hpt=hpt, fanout=tph, pattern=classify_pattern(tph, hpt),
        m_rank=int(m_rank), bound=rank_lower_bound(m_rank, d), approximate=approx, count=n,
    )


def all_relation_stats(store: TripleStore, d: int) -> dict[int, RelationStats]:
    out = {}
    for r in range(store.n_relations):
        if np.any(store.train[:, 1] == r):
            out[r] = relation_stats(store, r, d)
    return out


def write_stats_tsv(path, stats, store: TripleStore):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("relation\ttph\thpt\tfanout\tpattern\tm_rank\tbound\n")
        for s in stats.values() if isinstance(stats, dict) else stats:
            name = store.relations.names[s.relation_id]
            fh.write(f"{name}\t{s.tph:.6g}\t{s.hpt:.6g}\t{s.fanout:.6g}\t{s.pattern}\t{s.m_rank}\t{s.bound}\n")


# synthetic fixtures with known rank(M_r)

def synth_relation(kind: str, params: dict, seed=0) -> list[tuple[int, int, int]]:
    """Triples for a relation whose empirical matrix has analytically known rank.

    kinds and params (all accept ``relation`` and ``offset``):
      permutation  n                     -> rank n
      star         tails                 -> rank 1
      bipartite    heads, tails          -> rank 1
      high_rank    rank, heads_per_block, tails_per_block[, pool]
                   Without ``pool`` the blocks are disjoint all-ones blocks.
                   With ``pool`` each block's tails are drawn from a shared
                   pool of that many tails, redrawn until the block tail
                   patterns are linearly independent; either way rank = ``rank``.
    """
    p = dict(params)
    rel = int(p.pop("relation", 0))
    off = int(p.pop("offset", 0))
    rng = np.random.default_rng(seed)

    def need(*keys):
        missing = [k for k in keys if k not in p]
        if missing:
            raise InvalidParams(f"{kind} needs {missing}")
        vals = [int(p[k]) for k in keys]
        if any(v < 1 for v in vals):
            raise InvalidParams(f"{kind} parameters must be positive: {dict(zip(keys, vals))}")
        return vals

    pairs: list[tuple[int, int]] = []
    if kind == "permutation":
        (n,) = need("n")
        perm = rng.permutation(n)
        pairs = [(i, n + int(perm[i])) for i in range(n)]
    elif kind == "star":
        (nt,) = need("tails")
        pairs = [(0, 1 + j) for j in range(nt)]
    elif kind == "bipartite":
        a, b = need("heads", "tails")
        pairs = [(i, a + j) for i in range(a) for j in range(b)]
    elif kind == "high_rank":
        r, hb, tb = need("rank", "heads_per_block", "tails_per_block")
        heads = r * hb
        if "pool" not in p:
            for blk in range(r):
                for i in range(hb):
                    for j in range(tb):
                        pairs.append((blk * hb + i, heads + blk * tb + j))
        else:
            pool = int(p["pool"])
            if pool < r or tb > pool:
                raise InvalidParams("pool must hold at least `rank` tails and a full block")
            for _ in range(1000):
                T = np.zeros((r, pool))
                for blk in range(r):
                    T[blk, rng.choice(pool, size=tb, replace=False)] = 1.0
                if gauss_rank(T) == r:
                    break
            else:
                raise InvalidParams("could not draw independent block patterns")
            for blk in range(r):
                for j in np.nonzero(T[blk])[0]:
                    for i in range(hb):
                        pairs.append((blk * hb + i, heads + int(j)))
    else:
        raise InvalidParams(f"unknown synthetic relation kind {kind!r}")
    return [(h + off, rel, t + off) for h, t in pairs]


def split_triples(triples, valid_frac: float, test_frac: float, seed=0):
    """Random split; every entity keeps at least one training triple when possible."""
    trip = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(trip))
    n_valid = int(round(valid_frac * len(trip)))
    n_test = int(round(test_frac * len(trip)))
    covered = set()
    train, held = [], []
    for i in order:
        h, _, t = trip[i]
        if h not in covered or t not in covered:
            train.append(i)
            covered.update((h, t))
        else:
            held.append(i)
    valid = held[:n_valid]
    test = held[n_valid:n_valid + n_test]
    train += held[n_valid + n_test:]
    return trip[np.sort(train)], trip[np.sort(valid)], trip[np.sort(test)]


def mean_degree(store: TripleStore) -> float:
    deg = store.degrees
    m = float(deg.mean()) if deg.size else 0.0
    return m if m > 0 else 1.0


__all__ = [
    "Vocab", "TripleStore", "RelationStats", "load_triples", "write_triples", "write_store",
    "relation_stats", "all_relation_stats", "relation_matrix", "matrix_rank", "gauss_rank",
    "sketch_rank", "rank_lower_bound", "synth_relation", "split_triples", "classify_pattern",
    "write_stats_tsv", "mean_degree",
]
