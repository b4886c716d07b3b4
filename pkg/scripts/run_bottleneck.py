"""Rank-bottleneck separation: kappa = 1 vs kappa = 4 on a rank-3d relation."""
from _cli import parse_into

from krauskge.experiments import BottleneckConfig, run_bottleneck

if __name__ == "__main__":
    cfg = parse_into(BottleneckConfig(), __doc__)
    res = run_bottleneck(cfg, log=lambda s: print(s, flush=True))
    print(f"rank(M_r) = {res.m_rank}")
    for k, mrr in res.test_mrr.items():
        print(f"kappa={k}\ttest MRR {mrr:.4f}\tbest epoch {res.best_epoch[k]}")
    print(f"gap {res.gap:+.4f} in {res.seconds:.0f}s")
