"""Knowledge-graph embedding with relations as completeness-constrained Kraus channels."""
from .channels import (
    ChoiMatrix,
    DensityMatrix,
    Geometry,
    KrausChannel,
    apply_channel,
    choi_matrix,
    completeness_residual,
    compose,
    compose_path,
    effective_rank,
    kraus_from_choi,
)
from .data import TripleStore, load_triples, relation_stats, synth_relation
from .evaluation import evaluate_split, kappa_fanout_correlation, multihop_eval, stratified_eval
from .training import ModelParams, TrainConfig, init_params, train

__version__ = "0.1.0"

__all__ = [
    "ChoiMatrix", "DensityMatrix", "Geometry", "KrausChannel", "apply_channel", "choi_matrix",
    "completeness_residual", "compose", "compose_path", "effective_rank", "kraus_from_choi",
    "TripleStore", "load_triples", "relation_stats", "synth_relation", "evaluate_split",
    "kappa_fanout_correlation", "multihop_eval", "stratified_eval", "ModelParams",
    "TrainConfig", "init_params", "train",
]
