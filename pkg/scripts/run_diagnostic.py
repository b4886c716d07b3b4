"""Fan-out vs learned effective Kraus rank on a 12-relation synthetic suite."""
from _cli import parse_into

from krauskge.experiments import DiagnosticConfig, run_diagnostic

if __name__ == "__main__":
    cfg = parse_into(DiagnosticConfig(), __doc__)
    res = run_diagnostic(cfg)
    print("relation\tF\tkappa_eff\tm_rank\tbound")
    for x in res.rows:
        print(f"{x.relation}\t{x.fanout:.3g}\t{x.kappa_eff}\t{x.m_rank}\t{x.bound}")
    print(f"spearman rho {res.rho:.4f}; bound satisfied {res.bound_fraction:.0%}; "
          f"{res.seconds:.0f}s")
