"""Write the small bundled dataset used by the CLI smoke tests.

Two inverse relations over 2n entities, ``(a_i, fwd, b_i)`` and
``(b_i, back, a_i)``, plus a many-to-many ``hub`` block from the first five
``a`` entities to the first four ``b`` entities.  Every entity keeps a
training triple.
"""
import argparse
from pathlib import Path

from krauskge.data import TripleStore, split_triples, write_store


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "tiny"))
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    n = args.n
    trip = [(i, 0, n + i) for i in range(n)] + [(n + i, 1, i) for i in range(n)]
    trip += [(i, 2, n + j) for i in range(5) for j in range(4)]
    tr, va, te = split_triples(trip, 0.15, 0.15, seed=args.seed)
    store = TripleStore.from_triples(tr, va, te, n_entities=2 * n, n_relations=3)
    store.entities.names = [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)]
    store.relations.names = ["fwd", "back", "hub"]
    paths = write_store(store, args.out)
    for name, p in paths.items():
        print(name, p, len(store.split(name)))


if __name__ == "__main__":
    main()
