"""edgefdr: FDR-controlled link prediction via conformal calibration.

Turn any link-prediction scoring function into a selector of likely edges
with false-discovery-rate control, by calibrating test scores against a
reference set of observed non-edges. Ships with a block-model simulator
and a Monte-Carlo harness for measuring FDR/TDR.
"""

from .baselines import (
    CrossValThresholdSelector,
    CvtConfig,
    NaiveThresholdSelector,
    cvt_select,
    default_threshold_grid,
    nt_select,
)
from .conformal import (
    ConformalEdgeSelector,
    ScoreTable,
    SelectionResult,
    adjusted_level,
    bh_select,
    ck_select,
    conformal_link_predict,
    conformal_pvalue,
    conformal_pvalues,
    estimate_pi0_ratio,
    estimate_pi0_storey,
)
from .generate import (
    ExperimentDesign,
    SbmParams,
    expected_edge_count,
    generate_sbm,
    make_experiment,
    sample_reference,
)
from .graph import (
    GroundTruth,
    ObservedGraph,
    PairSets,
    all_pairs,
    canonicalize_pairs,
    mask_reference,
    partition_pairs,
)
from .harness import (
    ExperimentConfig,
    MetricsRecord,
    aggregate,
    fdp,
    run_experiment,
    run_replication,
    tdp,
)
from .scoring import (
    FEATURE_NAMES,
    SCORERS,
    AdamicAdar,
    CommonNeighbors,
    JaccardCoefficient,
    LogisticPairScorer,
    PreferentialAttachment,
    ResourceAllocation,
    build_scorer,
    extract_features,
    fit_logistic,
    logistic_loss_and_grad,
    make_scorer,
    normalize_scores,
)

__version__ = "0.1.0"

__all__ = [
    "AdamicAdar",
    "CommonNeighbors",
    "ConformalEdgeSelector",
    "CrossValThresholdSelector",
    "CvtConfig",
    "ExperimentConfig",
    "ExperimentDesign",
    "FEATURE_NAMES",
    "GroundTruth",
    "JaccardCoefficient",
    "LogisticPairScorer",
    "MetricsRecord",
    "NaiveThresholdSelector",
    "ObservedGraph",
    "PairSets",
    "PreferentialAttachment",
    "ResourceAllocation",
    "SCORERS",
    "SbmParams",
    "ScoreTable",
    "SelectionResult",
    "adjusted_level",
    "aggregate",
    "all_pairs",
    "bh_select",
    "build_scorer",
    "canonicalize_pairs",
    "ck_select",
    "conformal_link_predict",
    "conformal_pvalue",
    "conformal_pvalues",
    "cvt_select",
    "default_threshold_grid",
    "estimate_pi0_ratio",
    "estimate_pi0_storey",
    "expected_edge_count",
    "extract_features",
    "fdp",
    "fit_logistic",
    "generate_sbm",
    "logistic_loss_and_grad",
    "make_experiment",
    "make_scorer",
    "mask_reference",
    "normalize_scores",
    "nt_select",
    "partition_pairs",
    "run_experiment",
    "run_replication",
    "sample_reference",
    "tdp",
]
