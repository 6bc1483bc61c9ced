"""Thresholding baselines: naive and cross-validated.

Naive thresholding (NT) keeps the test pairs whose normalized score reaches
1 - alpha. Cross-validated thresholding (CVT) holds out a balanced
validation split of the observed pairs, scans a grid of cut-offs for the
largest one whose validation false-discovery proportion stays within alpha,
and applies it to the test scores. Neither uses a reference set; both are
here for comparison against the conformal selector.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .conformal import SelectionResult, _check_level
from .graph import ObservedGraph, pair_codes, partition_pairs
from .scoring import make_scorer, normalize_scores

__all__ = [
    "CvtConfig",
    "default_threshold_grid",
    "nt_select",
    "cvt_select",
    "cvt_threshold",
    "NaiveThresholdSelector",
    "CrossValThresholdSelector",
]

_GRID_DIVISORS = (1, 5, 10, 20, 50, 100)


def default_threshold_grid(alpha):
    """Cut-off grid {(1 - alpha) / k} for a fixed divisor ladder."""
    return np.array([(1.0 - alpha) / k for k in _GRID_DIVISORS])


@dataclass(frozen=True)
class CvtConfig:
    """Validation-split design for cross-validated thresholding.

    ``val_fraction`` is the share of observed true edges whose count sizes
    the (balanced) validation split. ``threshold_grid`` of None means the
    default alpha-dependent ladder.
    """

    val_fraction: float = 0.2
    threshold_grid: tuple | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie strictly between 0 "
                             "and 1")
        if self.threshold_grid is not None:
            grid = np.asarray(self.threshold_grid, dtype=float)
            if grid.size == 0 or np.any(grid < 0) or np.any(grid > 1):
                raise ValueError("threshold grid values must lie in [0, 1]")

    def grid_for(self, alpha):
        if self.threshold_grid is None:
            return default_threshold_grid(alpha)
        return np.asarray(self.threshold_grid, dtype=float)


def _empty_selection(alpha, threshold=None):
    return SelectionResult(selected=np.empty((0, 2), dtype=np.int64),
                           selected_idx=np.empty(0, dtype=np.intp),
                           threshold=threshold, alpha_used=float(alpha))


def _threshold_selection(scores, pairs, threshold, alpha):
    idx = np.nonzero(scores >= threshold)[0]
    if idx.size == 0:
        return _empty_selection(alpha, threshold=float(threshold))
    selected = pairs[idx]
    order = np.lexsort((selected[:, 1], selected[:, 0]))
    return SelectionResult(selected=selected[order], selected_idx=idx,
                           threshold=float(threshold),
                           alpha_used=float(alpha))


# -- naive thresholding -----------------------------------------------------


@dataclass(frozen=True)
class _NtState:
    test_pairs: np.ndarray
    test_scores: np.ndarray  # normalized into (0, 1) unless probabilistic


def _prepare_nt(graph, scorer, seed, scorer_params):
    sets = partition_pairs(graph)
    if len(sets.dtest) == 0:
        raise ValueError("the test set is empty: nothing to select")
    model = make_scorer(scorer, random_state=seed, **(scorer_params or {}))
    model.fit(graph)
    raw = model.score_pairs(sets.dtest)
    scores = raw if model.produces_probabilities else normalize_scores(raw)
    return _NtState(test_pairs=sets.dtest, test_scores=scores)


def nt_select(graph, scorer="cn", alpha=0.1, seed=None, scorer_params=None):
    """Keep the test pairs whose (normalized) score is at least 1 - alpha.

    The scorer is fit on the observation as-is: no reference set, no
    masking. Scores already in [0, 1] are used raw; others are normalized.
    """
    _check_level(alpha)
    state = _prepare_nt(graph, scorer, seed, scorer_params)
    return _threshold_selection(state.test_scores, state.test_pairs,
                                1.0 - alpha, alpha)


# -- cross-validated thresholding --------------------------------------------


@dataclass(frozen=True)
class _CvtState:
    config: CvtConfig
    test_pairs: np.ndarray
    test_scores: np.ndarray
    val_pairs: np.ndarray
    val_scores: np.ndarray
    val_is_false: np.ndarray
    model: object


def cvt_threshold(val_scores, val_is_false, grid, alpha):
    """Largest grid cut-off whose validation FDP is within alpha, or None.

    FDP at cut t = (#false validation pairs with score >= t) /
    max(1, #validation pairs with score >= t).
    """
    best = None
    for t in np.sort(np.asarray(grid, dtype=float)):
        kept = val_scores >= t
        fdp = np.count_nonzero(kept & val_is_false) / max(
            1, np.count_nonzero(kept))
        if fdp <= alpha:
            best = float(t)
    return best


def _prepare_cvt(graph, scorer, config, scorer_params):
    sets = partition_pairs(graph)
    if len(sets.dtest) == 0:
        raise ValueError("the test set is empty: nothing to select")
    n_each = int(0.5 * config.val_fraction * len(sets.dtr_alt))
    if n_each < 1:
        raise ValueError("too few observed true edges for the validation "
                         "split")
    if n_each > len(sets.dtr_null):
        raise ValueError("too few observed non-edges for the validation "
                         "split")
    split_child, fit_child = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(split_child)
    alt_idx = rng.choice(len(sets.dtr_alt), size=n_each, replace=False)
    null_idx = rng.choice(len(sets.dtr_null), size=n_each, replace=False)
    val_alt = sets.dtr_alt[np.sort(alt_idx)]
    val_null = sets.dtr_null[np.sort(null_idx)]
    val_pairs = np.concatenate([val_alt, val_null])
    val_is_false = np.concatenate(
        [np.zeros(n_each, bool), np.ones(n_each, bool)])

    fit_seed = int(fit_child.generate_state(1, np.uint64)[0])
    model = make_scorer(scorer, random_state=fit_seed,
                        **(scorer_params or {}))
    if model.trainable:
        # Learned scorers must not train on the held-out split: refit on a
        # copy with the validation pairs treated as unobserved.
        frozen = _mask_validation(graph, val_alt, val_pairs)
        model.fit(frozen)
        overlap = np.intersect1d(pair_codes(model.train_pairs_, graph.n),
                                 pair_codes(val_pairs, graph.n))
        if overlap.size:
            raise RuntimeError("training examples leaked into the "
                               "validation split; masking bug")
    else:
        model.fit(graph)

    val_raw = model.score_pairs(val_pairs)
    test_raw = model.score_pairs(sets.dtest)
    if model.produces_probabilities:
        val_scores, test_scores = val_raw, test_raw
    else:
        both = normalize_scores(np.concatenate([val_raw, test_raw]))
        val_scores, test_scores = both[:len(val_raw)], both[len(val_raw):]
    return _CvtState(config=config, test_pairs=sets.dtest,
                     test_scores=test_scores, val_pairs=val_pairs,
                     val_scores=val_scores, val_is_false=val_is_false,
                     model=model)


def _mask_validation(graph, val_alt, val_pairs):
    """Treat the validation pairs as unobserved (edges removed as well)."""
    drop = np.isin(pair_codes(graph.edges, graph.n),
                   pair_codes(val_alt, graph.n))
    missing = np.concatenate([graph.missing, val_pairs])
    return ObservedGraph(graph.n, graph.edges[~drop], missing,
                         directed=graph.directed,
                         self_pairs=graph.self_pairs,
                         covariates=graph.covariates)


def _cvt_at(state, alpha):
    _check_level(alpha)
    grid = state.config.grid_for(alpha)
    t_hat = cvt_threshold(state.val_scores, state.val_is_false, grid, alpha)
    if t_hat is None:
        return _empty_selection(alpha)
    return _threshold_selection(state.test_scores, state.test_pairs, t_hat,
                                alpha)


def cvt_select(graph, scorer="cn", alpha=0.1, config=None,
               scorer_params=None):
    """Cross-validated thresholding on a balanced held-out split.

    Draws a validation set of observed pairs (equal numbers of true and
    false edges, sized by ``config.val_fraction`` of the observed edges),
    fits the scorer with that split held out of training, and selects the
    test pairs at the largest grid cut-off whose validation FDP stays
    within alpha. No feasible cut-off means an empty selection.
    """
    _check_level(alpha)
    config = config or CvtConfig()
    state = _prepare_cvt(graph, scorer, config, scorer_params)
    return _cvt_at(state, alpha)


# -- estimator wrappers -------------------------------------------------------


class _BaseSelector(BaseEstimator):
    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted")

    @property
    def selected_edges_(self):
        self._check_fitted()
        return self.result_.selected

    @property
    def threshold_(self):
        self._check_fitted()
        return self.result_.threshold


class NaiveThresholdSelector(_BaseSelector):
    """Estimator wrapper around :func:`nt_select`."""

    def __init__(self, scorer="cn", alpha=0.1, random_state=None,
                 scorer_params=None):
        self.scorer = scorer
        self.alpha = alpha
        self.random_state = random_state
        self.scorer_params = scorer_params

    def fit(self, graph):
        self.result_ = nt_select(graph, self.scorer, self.alpha,
                                 seed=self.random_state,
                                 scorer_params=self.scorer_params)
        return self


class CrossValThresholdSelector(_BaseSelector):
    """Estimator wrapper around :func:`cvt_select`."""

    def __init__(self, scorer="cn", alpha=0.1, val_fraction=0.2,
                 threshold_grid=None, random_state=None, scorer_params=None):
        self.scorer = scorer
        self.alpha = alpha
        self.val_fraction = val_fraction
        self.threshold_grid = threshold_grid
        self.random_state = random_state
        self.scorer_params = scorer_params

    def fit(self, graph):
        config = CvtConfig(val_fraction=self.val_fraction,
                           threshold_grid=self.threshold_grid,
                           seed=self.random_state)
        self.result_ = cvt_select(graph, self.scorer, self.alpha,
                                  config=config,
                                  scorer_params=self.scorer_params)
        return self
