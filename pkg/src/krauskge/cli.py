"""``krauskge <train|eval|diagnose|compose|verify|recover>``.

Exit codes: 0 ok, 1 property failure, 2 input error, 3 advisory.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from . import baselines
from .channels import completeness_residual, compose_path, effective_rank
from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_config
from .data import load_triples
from .errors import ConfigError, KrausError, PropertyFailure
from .evaluation import (
    ModelScorer,
    evaluate_split,
    format_report,
    kappa_fanout_correlation,
    operator_choi,
    stratified_eval,
    write_diagnostics_tsv,
)
from .properties import run_suite
from .training import train

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_ADVISORY = 0, 1, 2, 3


def _thread_limit():
    raw = os.environ.get("KRAUSKGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"KRAUSKGE_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigError("KRAUSKGE_THREADS must be nonnegative")
    if n == 0:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _store_from_meta(meta: dict, override: str | None = None):
    if override:
        cfg = load_config(override)
        return load_triples(cfg.train_path, cfg.valid_path, cfg.test_path), cfg.energy
    paths = [meta.get(k) for k in ("train", "valid", "test")]
    if not all(paths):
        raise ConfigError("checkpoint does not record its data paths; pass --config")
    for p in paths:
        if not Path(p).exists():
            raise ConfigError(f"data file recorded in checkpoint not found: {p}")
    return load_triples(*paths), float(meta.get("energy", 0.99))


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    store = load_triples(cfg.train_path, cfg.valid_path, cfg.test_path)
    out = Path(args.out)
    log = open(args.log, "w", encoding="utf-8") if args.log else sys.stdout

    def emit(m):
        log.write(json.dumps(m.record(), sort_keys=True) + "\n")
        log.flush()

    try:
        res = train(store, cfg.train, on_epoch=emit)
    finally:
        if args.log:
            log.close()
    meta = {"train": str(cfg.train_path.resolve()), "valid": str(cfg.valid_path.resolve()),
            "test": str(cfg.test_path.resolve()), "energy": cfg.energy,
            "best_epoch": res.best_epoch, "best_val_mrr": res.best_val_mrr}
    save_checkpoint(out, res.params, res.history, meta)
    print(f"best epoch {res.best_epoch}, validation MRR {res.best_val_mrr:.4f}; wrote {out}",
          file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    store, _ = _store_from_meta(ck.meta, args.config)
    filtered = not args.raw
    if args.stratify:
        rep = stratified_eval(ck.params, store, args.split, filtered)
    else:
        rep = evaluate_split(ck.params, store, args.split, filtered)
    print(format_report(rep, f"{args.split}"))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    store, energy = _store_from_meta(ck.meta, args.config)
    energy = args.energy if args.energy is not None else energy
    rho, rows, degenerate = kappa_fanout_correlation(store, ck.params, energy=energy)
    if args.tsv:
        write_diagnostics_tsv(args.tsv, rows, store)
    else:
        print("relation\tF\tkappa_eff\tm_rank\tbound\tbound_satisfied")
        for x in rows:
            print(f"{store.relations.names[x.relation]}\t{x.fanout:.6g}\t{x.kappa_eff}\t"
                  f"{x.m_rank}\t{x.bound}\t{str(x.bound_satisfied).lower()}")
    sat = sum(x.bound_satisfied for x in rows)
    note = " (degenerate: a column is constant)" if degenerate else ""
    print(f"spearman rho = {rho:.4f}{note}; bound satisfied for {sat}/{len(rows)} relations",
          file=sys.stderr)
    return EXIT_OK


def _relation_id(token: str, store) -> int:
    if store is not None and token in store.relations:
        return store.relations[token]
    try:
        return int(token)
    except ValueError as exc:
        raise ConfigError(f"unknown relation {token!r}") from exc


def cmd_compose(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    store = None
    if args.config or ck.meta.get("train"):
        with contextlib.suppress(ConfigError):
            store, _ = _store_from_meta(ck.meta, args.config)
    ids = [_relation_id(t, store) for t in args.relations]
    scorer = ModelScorer(ck.params)
    chain = [scorer.channel(r) for r in ids]
    ch = compose_path(chain, max_kappa=args.max_kappa)
    energy = float(ck.meta.get("energy", 0.99)) if args.energy is None else args.energy
    print(f"kappa_total\t{ch.kappa}")
    print(f"completeness_residual\t{completeness_residual(ch):.3e}")
    print(f"effective_rank\t{effective_rank(operator_choi(ch), energy)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(inject_fault=args.inject_fault, scale=args.scale)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} property checks passed")
    if failed:
        raise PropertyFailure(f"failed: {', '.join(failed)}")
    return EXIT_OK


def cmd_recover(args) -> int:
    rep = baselines.score_equivalence(args.model, args.trials, args.seed)
    print(f"model\t{rep.model}")
    print(f"trials\t{rep.trials}")
    print(f"max_deviation\t{rep.max_deviation:.3e}")
    print(f"completeness_residual\t{rep.max_residual:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="krauskge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("config")
    p.add_argument("--out", default="model.kge", help="checkpoint path")
    p.add_argument("--log", help="JSON-lines epoch log (default: stdout)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="filtered/raw link-prediction metrics")
    p.add_argument("checkpoint")
    p.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p.add_argument("--stratify", action="store_true", help="add per-mapping-pattern rows")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--filtered", action="store_true", default=True)
    g.add_argument("--raw", action="store_true")
    p.add_argument("--config", help="config whose data paths override the checkpoint's")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("diagnose", help="per-relation effective Kraus rank vs fan-out")
    p.add_argument("checkpoint")
    p.add_argument("--tsv", help="write rows here instead of stdout")
    p.add_argument("--energy", type=float)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("compose", help="compose relation channels along a path")
    p.add_argument("checkpoint")
    p.add_argument("relations", nargs="+")
    p.add_argument("--max-kappa", type=int, default=4096)
    p.add_argument("--energy", type=float)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("verify", help="run the randomised property suite")
    p.add_argument("--inject-fault", action="store_true",
                   help="perturb one Kraus operator so the completeness check must fail")
    p.add_argument("--scale", type=float, default=1.0, help="trial-count multiplier")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("recover", help="score equivalence with a classical model")
    p.add_argument("model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(fn=cmd_recover)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.fn(args)
    except KrausError as exc:
        print(f"krauskge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        print(f"krauskge {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
