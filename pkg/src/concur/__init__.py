"""Road-network incident concurrency toolkit.

Neighbor-incident metrics (ANCD/ANCC) with a paired hypothesis test, a
two-layer graph-convolution classifier with a label-token prior, and a
synthetic generator with planted spatial incident clustering.
"""

__version__ = "0.1.0"

from .evaluate import EvalResult, auc, evaluate, f1_score
from .gnn import (CpGcnModel, TrainConfig, count_cp_params, forward, init_model,
                  load_model, loss_and_grads, normalize_adjacency, predict,
                  sample_mask, save_model, tokenize_labels, train)
from .graph import (NEGATIVE, POSITIVE, UNKNOWN, GraphFormatError, RoadGraph,
                    Split, load_dataset, load_graph, load_labels, load_split,
                    save_dataset, save_split, stratified_split, validate)
from .metrics import (DEFAULT_HOPS, MetricReport, ancc, ancd, khop_neighbors,
                      metric_report, ncc, ncd)
from .stats import PairedTestResult, hypothesis_test, paired_t_test, t_cdf
from .synth import (SynthConfig, generate_dataset, generate_features,
                    generate_suite, generate_topology, jitter_configs,
                    plant_labels, plant_labels_independent)

__all__ = [
    "EvalResult", "auc", "evaluate", "f1_score",
    "CpGcnModel", "TrainConfig", "count_cp_params", "forward", "init_model",
    "load_model", "loss_and_grads", "normalize_adjacency", "predict",
    "sample_mask", "save_model", "tokenize_labels", "train",
    "NEGATIVE", "POSITIVE", "UNKNOWN", "GraphFormatError", "RoadGraph",
    "Split", "load_dataset", "load_graph", "load_labels", "load_split",
    "save_dataset", "save_split", "stratified_split", "validate",
    "DEFAULT_HOPS", "MetricReport", "ancc", "ancd", "khop_neighbors",
    "metric_report", "ncc", "ncd",
    "PairedTestResult", "hypothesis_test", "paired_t_test", "t_cdf",
    "SynthConfig", "generate_dataset", "generate_features", "generate_suite",
    "generate_topology", "jitter_configs", "plant_labels",
    "plant_labels_independent",
    "__version__",
]
