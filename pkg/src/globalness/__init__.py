"""Global-node detection in directed, region-labeled graphs."""

from .errors import GlobalnessError
from .graph import DirectedGraph, LabelTable, bfs_hops, load_edges, load_labels
from .features import AnchorSet, build_features, compute_sdv, compute_snp, make_anchor_set
from .sampler import OT, SamplingPolicy, select_biased
from .classifiers import ClassifierModel, TrainConfig, load_model, save_model, train
from .pipeline import DefinitionParams, DetectionReport, Hypothesis, definition_oracle, run_detection
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AnchorSet", "ClassifierModel", "DefinitionParams", "DetectionReport", "DirectedGraph",
    "GlobalnessError", "Hypothesis", "LabelTable", "OT", "SamplingPolicy", "SynthConfig",
    "TrainConfig", "bfs_hops", "build_features", "compute_sdv", "compute_snp", "definition_oracle",
    "generate", "load_edges", "load_labels", "load_model", "make_anchor_set", "run_detection",
    "save_model", "select_biased", "train",
]
