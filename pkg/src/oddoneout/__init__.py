"""Feature discovery via adaptively chosen two-out-of-three comparisons.

Ask an oracle (simulated crowd or live humans over HTTP) which two of three
examples share a feature, label every discovery across the dataset, and never
ask about a triple an already-known feature can resolve.
"""

from .model import (
    FeatureMatrix,
    FeatureTree,
    IndependentSpec,
    build_lr_counterexample,
    distinguishing_features,
    gen_caterpillar_binary_tree,
    gen_d_ary_leafy_tree,
    gen_proper_binary_tree,
    identifiability_tau,
    sample_independent,
    tree_to_matrix,
    validate_tree,
)
from .oracle import GroundTruth, LabelingConfig, OraclePolicy
from .resolution import SignaturePartition
from .algorithms import (
    HybridConfig,
    RunResult,
    Transcript,
    replay,
    run_adaptive_hybrid,
    run_adaptive_pair,
    run_adaptive_triple,
    run_fresh_adaptive,
    run_fresh_random_triple,
    run_random_triple,
    run_tagging,
)
from .metrics import distinct_interesting_count, feature_distance, interesting, scatter_g
from .bounds import BoundTable, compute_bounds

__version__ = "0.1.0"
