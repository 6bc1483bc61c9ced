"""Monte-Carlo evaluation harness.

Each replication builds one experiment (a fresh block-model draw, or a
fresh split of a fixed real graph), fits at most one scorer per method, and
evaluates every requested (method, alpha) cell on the same instance.
Per-replication randomness comes from independent streams derived from
(master seed, replication index), so replications can run in parallel and
still aggregate byte-identically to a sequential run.
"""

from dataclasses import dataclass, field, replace
from itertools import groupby

import numpy as np
import scipy.sparse as sp

from .baselines import CvtConfig, _cvt_at, _prepare_cvt, _prepare_nt, \
    _threshold_selection
from .conformal import _prepare_conformal, _select_at
from .generate import ExperimentDesign, SbmParams, generate_sbm, \
    make_experiment

__all__ = [
    "MetricsRecord",
    "ExperimentConfig",
    "AggregateStats",
    "fdp",
    "tdp",
    "run_replication",
    "run_experiment",
    "aggregate",
]

METHODS = ("conformal", "nt", "cvt")


def _as_tuple_set(pairs):
    return set(map(tuple, np.asarray(pairs, dtype=np.int64).tolist()))


def fdp(selected, h0):
    """Share of hidden non-edges among the selected pairs (0 when nothing
    is selected)."""
    sel = _as_tuple_set(selected)
    if not sel:
        return 0.0
    return len(sel & _as_tuple_set(h0)) / len(sel)


def tdp(selected, h1):
    """Share of hidden true edges that were recovered (0 when there are
    none to recover)."""
    truth = _as_tuple_set(h1)
    if not truth:
        return 0.0
    return len(_as_tuple_set(selected) & truth) / len(truth)


@dataclass(frozen=True)
class MetricsRecord:
    """One (method, alpha, replication) evaluation."""

    method: str
    alpha: float
    replication: int
    fdp: float
    tdp: float
    n_selected: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "fdp", float(self.fdp))
        object.__setattr__(self, "tdp", float(self.tdp))
        object.__setattr__(self, "n_selected", int(self.n_selected))
        object.__setattr__(self, "seed", int(self.seed))
        if not 0.0 <= self.fdp <= 1.0 or not 0.0 <= self.tdp <= 1.0:
            raise ValueError("fdp and tdp must lie in [0, 1]")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one Monte-Carlo experiment needs.

    Exactly one of ``sbm`` (with ``n_nodes``) or ``a_star`` (a fixed full
    adjacency, real-data mode) must be given as the ground-truth source.
    """

    methods: tuple
    alphas: tuple
    n_replications: int
    master_seed: int
    design: ExperimentDesign
    scorer: str = "cn"
    scorer_params: dict = field(default_factory=dict)
    sbm: SbmParams | None = None
    n_nodes: int | None = None
    a_star: sp.csr_matrix | None = None
    directed: bool = False
    self_pairs: bool = True
    adjust: bool = True
    pi0_method: str = "ratio"
    storey_lambda: float = 0.5
    cvt_val_fraction: float = 0.2
    cvt_threshold_grid: tuple | None = None
    output: str | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_replications < 1:
            raise ValueError("replication count must be at least 1")
        if not self.alphas:
            raise ValueError("alpha grid must be nonempty")
        if any(not 0.0 < a < 1.0 for a in self.alphas):
            raise ValueError("alpha grid values must lie strictly between "
                             "0 and 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of "
                             f"{METHODS}")
        if self.pi0_method not in ("ratio", "storey", "design"):
            raise ValueError("pi0_method must be 'ratio', 'storey' or "
                             "'design'")
        has_sbm = self.sbm is not None
        has_data = self.a_star is not None
        if has_sbm == has_data:
            raise ValueError("give exactly one of an SBM model or a fixed "
                             "adjacency")
        if has_sbm and self.n_nodes is None:
            raise ValueError("SBM mode needs the node count")


def _stage_seeds(master_seed, rep_index):
    """Independent per-stage integer seeds for one replication."""
    ss = np.random.SeedSequence([int(master_seed), int(rep_index)])
    rep_seed = int(ss.generate_state(1, np.uint64)[0])
    stages = [int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(5)]
    return rep_seed, stages


def run_replication(config, rep_index):
    """Build one experiment and evaluate every (method, alpha) cell on it.

    Deterministic given (config.master_seed, rep_index); at most one scorer
    fit per method.
    """
    rep_seed, (sbm_seed, split_seed, conf_seed, nt_seed,
               cvt_seed) = _stage_seeds(config.master_seed, rep_index)

    if config.sbm is not None:
        a_star, _ = generate_sbm(config.sbm, config.n_nodes,
                                 directed=config.directed,
                                 self_loops=config.self_pairs,
                                 seed=sbm_seed)
    else:
        a_star = config.a_star
    design = replace(config.design, seed=split_seed)
    graph, truth = make_experiment(a_star, design, directed=config.directed,
                                   self_pairs=config.self_pairs)

    records = []

    def add(method, alpha, result):
        records.append(MetricsRecord(
            method=method, alpha=alpha, replication=rep_index,
            fdp=fdp(result.selected, truth.h0),
            tdp=tdp(result.selected, truth.h1),
            n_selected=result.n_selected, seed=rep_seed))

    if "conformal" in config.methods:
        state = _prepare_conformal(graph, config.scorer, design.cal_size,
                                   conf_seed, config.scorer_params)
        ratio = config.design.ratio_h0_h1
        pi0_design = ratio / (1.0 + ratio)
        for alpha in config.alphas:
            add("conformal", alpha,
                _select_at(state, alpha, config.adjust, config.pi0_method,
                           config.storey_lambda, pi0_design=pi0_design))
    if "nt" in config.methods:
        state = _prepare_nt(graph, config.scorer, nt_seed,
                            config.scorer_params)
        for alpha in config.alphas:
            add("nt", alpha,
                _threshold_selection(state.test_scores, state.test_pairs,
                                     1.0 - alpha, alpha))
    if "cvt" in config.methods:
        cvt_config = CvtConfig(val_fraction=config.cvt_val_fraction,
                               threshold_grid=config.cvt_threshold_grid,
                               seed=cvt_seed)
        state = _prepare_cvt(graph, config.scorer, cvt_config,
                             config.scorer_params)
        for alpha in config.alphas:
            add("cvt", alpha, _cvt_at(state, alpha))
    return records


def run_experiment(config):
    """All replications, flattened and deterministically ordered."""
    if config.n_jobs == 1:
        batches = [run_replication(config, rep)
                   for rep in range(config.n_replications)]
    else:
        from joblib import Parallel, delayed
        batches = Parallel(n_jobs=config.n_jobs)(
            delayed(run_replication)(config, rep)
            for rep in range(config.n_replications))
    records = [rec for batch in batches for rec in batch]
    records.sort(key=lambda r: (r.method, r.alpha, r.replication))
    return records


@dataclass(frozen=True)
class AggregateStats:
    """Per-(method, alpha) summary over replications."""

    method: str
    alpha: float
    n_replications: int
    fdr: float
    fdr_std: float
    tdr: float
    tdr_std: float
    mean_selected: float


def _mean_std(values):
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def aggregate(records):
    """Sample mean and standard deviation of FDP / TDP per (method, alpha).

    Standard deviation uses the N - 1 divisor and is reported as 0 for a
    single replication. The fold is order-independent: records are sorted
    before grouping.
    """
    if not records:
        raise ValueError("no records to aggregate")
    ordered = sorted(records, key=lambda r: (r.method, r.alpha,
                                             r.replication))
    rows = []
    for (method, alpha), group in groupby(ordered,
                                          key=lambda r: (r.method, r.alpha)):
        group = list(group)
        fdr, fdr_std = _mean_std([r.fdp for r in group])
        tdr, tdr_std = _mean_std([r.tdp for r in group])
        mean_sel = float(np.mean([r.n_selected for r in group]))
        rows.append(AggregateStats(method=method, alpha=alpha,
                                   n_replications=len(group), fdr=fdr,
                                   fdr_std=fdr_std, tdr=tdr,
                                   tdr_std=tdr_std,
                                   mean_selected=mean_sel))
    return rows
