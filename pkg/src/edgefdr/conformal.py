"""Edge selection with false-discovery-rate control.

Test-pair scores are converted to rank-based p-values against a reference
set of observed non-edge scores, then thresholded by the step-up procedure.
``ck_select`` is the score-space view of the same selection: it returns the
test pairs at or above a data-driven score cut-off, and is exactly
equivalent to ``bh_select`` applied to the conformal p-values (the
counting form shares the step-up comparison, so the equality is structural,
not approximate).

``conformal_link_predict`` is the end-to-end procedure: sample a reference
set, fit the scorer on the reference-masked observation, score reference
and test pairs, select.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .generate import sample_reference
from .graph import PairSets, partition_pairs
from .scoring import PairScorer, build_scorer

__all__ = [
    "ScoreTable",
    "SelectionResult",
    "conformal_pvalue",
    "conformal_pvalues",
    "bh_select",
    "ck_select",
    "estimate_pi0_ratio",
    "estimate_pi0_storey",
    "adjusted_level",
    "conformal_link_predict",
    "ConformalEdgeSelector",
]

_LEVEL_CAP = 1.0 - 1e-12


def _check_level(alpha, name="alpha"):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1")


@dataclass(frozen=True)
class ScoreTable:
    """Scores for the reference pairs and for the test pairs.

    ``test_pairs`` carries the identities of the test scores; use
    :meth:`from_scores` when only the score values matter.
    """

    cal_scores: np.ndarray
    test_scores: np.ndarray
    test_pairs: np.ndarray

    def __post_init__(self):
        cal = np.asarray(self.cal_scores, dtype=np.float64)
        test = np.asarray(self.test_scores, dtype=np.float64)
        pairs = np.asarray(self.test_pairs, dtype=np.int64)
        if not np.isfinite(cal).all() or not np.isfinite(test).all():
            raise ValueError("scores must be finite")
        if pairs.shape != (test.size, 2):
            raise ValueError("test_pairs must align with test_scores")
        object.__setattr__(self, "cal_scores", cal)
        object.__setattr__(self, "test_scores", test)
        object.__setattr__(self, "test_pairs", pairs)

    @classmethod
    def from_scores(cls, cal_scores, test_scores):
        """Build a table with synthetic (k, k) pair identities."""
        test_scores = np.asarray(test_scores, dtype=np.float64)
        idx = np.arange(test_scores.size, dtype=np.int64)
        return cls(cal_scores, test_scores, np.column_stack([idx, idx]))


@dataclass(frozen=True)
class SelectionResult:
    """A selected subset of the test pairs, with its provenance.

    ``selected`` is always exactly the set of test pairs whose score is at
    least ``threshold`` (empty selection has ``threshold`` None).
    """

    selected: np.ndarray
    selected_idx: np.ndarray
    threshold: float | None
    alpha_used: float
    pi0_hat: float | None = None

    @property
    def n_selected(self):
        return len(self.selected_idx)


def conformal_pvalues(scores, cal_scores):
    """Rank-based p-values of ``scores`` against the reference scores.

    p = (1 + #{reference >= s}) / (n_reference + 1); ties count as
    exceedances, which keeps the p-values conservative.
    """
    cal = np.asarray(cal_scores, dtype=np.float64)
    if cal.size == 0:
        raise ValueError("reference score set is empty")
    scores = np.asarray(scores, dtype=np.float64)
    cal_sorted = np.sort(cal)
    n_ge = cal.size - np.searchsorted(cal_sorted, scores, side="left")
    return (1.0 + n_ge) / (cal.size + 1.0)


def conformal_pvalue(score, cal_scores):
    """Scalar convenience wrapper around :func:`conformal_pvalues`."""
    return float(conformal_pvalues(np.array([score]), cal_scores)[0])


def bh_select(pvalues, level):
    """Step-up selection: indices of the k* smallest p-values, where
    k* = max{k : p_(k) <= k * level / m}.

    Returns a sorted index array; empty when no k qualifies. Ties at the
    selection boundary are always all selected.
    """
    p = np.asarray(pvalues, dtype=np.float64)
    if p.size == 0:
        return np.empty(0, dtype=np.intp)
    if not np.all((p >= 0) & (p <= 1)):  # also rejects NaN
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    passed = np.nonzero(p[order] <= np.arange(1, m + 1) * level / m)[0]
    if passed.size == 0:
        return np.empty(0, dtype=np.intp)
    k_star = passed[-1] + 1
    return np.sort(order[:k_star])


def ck_select(table, alpha):
    """Select test pairs by scanning score cut-offs against the reference.

    Counts reference exceedances at each candidate cut, forms the inflated
    false-discovery estimate, and keeps the lowest feasible cut. By
    construction this returns exactly ``bh_select`` over the conformal
    p-values of the test scores at level ``alpha``; the empty set comes
    back when no cut is feasible.
    """
    _check_level(alpha)
    if table.cal_scores.size == 0:
        raise ValueError("reference score set is empty")
    if table.test_scores.size == 0:
        return SelectionResult(
            selected=np.empty((0, 2), dtype=np.int64),
            selected_idx=np.empty(0, dtype=np.intp),
            threshold=None, alpha_used=float(alpha))
    pvals = conformal_pvalues(table.test_scores, table.cal_scores)
    idx = bh_select(pvals, alpha)
    if idx.size == 0:
        return SelectionResult(
            selected=np.empty((0, 2), dtype=np.int64),
            selected_idx=idx,
            threshold=None, alpha_used=float(alpha))
    threshold = float(table.test_scores[idx].min())
    selected = table.test_pairs[idx]
    order = np.lexsort((selected[:, 1], selected[:, 0]))
    return SelectionResult(selected=selected[order], selected_idx=idx,
                           threshold=threshold, alpha_used=float(alpha))


def estimate_pi0_ratio(pair_sets):
    """Fraction of observed pairs that are non-edges, |DtrNull| / |Dtr|."""
    n_tr = len(pair_sets.dtr)
    if n_tr == 0:
        raise ValueError("no observed pairs: cannot estimate the null "
                         "fraction")
    return len(pair_sets.dtr_null) / n_tr


def estimate_pi0_storey(pvalues, lam=0.5):
    """Storey-type null-fraction estimate from p-values:
    min(1, (1 + #{p > lam}) / (m (1 - lam)))."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie strictly between 0 and 1")
    p = np.asarray(pvalues, dtype=np.float64)
    if p.size == 0:
        raise ValueError("cannot estimate the null fraction from zero "
                         "p-values")
    return min(1.0, (1.0 + np.count_nonzero(p > lam)) / (p.size * (1.0 - lam)))


def adjusted_level(alpha, pi0_hat):
    """Power-boosting working level alpha / pi0_hat, capped below 1.

    With pi0_hat = 0 the adjustment is disabled (warning) and alpha is
    returned unchanged.
    """
    _check_level(alpha)
    if pi0_hat == 0:
        warnings.warn("estimated null fraction is 0; level adjustment "
                      "disabled", UserWarning, stacklevel=2)
        return float(alpha)
    if not 0.0 <= pi0_hat <= 1.0:
        raise ValueError("pi0_hat must lie in [0, 1]")
    return min(alpha / pi0_hat, _LEVEL_CAP)


@dataclass(frozen=True)
class ConformalState:
    """Fitted intermediate state shared across selection levels."""

    pair_sets: PairSets
    dcal: np.ndarray
    scorer: PairScorer
    table: ScoreTable
    pi0_ratio: float


def _prepare_conformal(graph, scorer, cal_size, seed, scorer_params):
    sets = partition_pairs(graph)
    if len(sets.dtest) == 0:
        raise ValueError("the test set is empty: nothing to select")
    if len(sets.dtr_null) == 0:
        raise ValueError(
            "no observed non-edges: conformal calibration requires at "
            "least one observed false edge")
    ss = np.random.SeedSequence(seed)
    cal_seed, fit_seed = (int(c.generate_state(1, np.uint64)[0])
                          for c in ss.spawn(2))
    dcal = sample_reference(sets, cal_size, seed=cal_seed)
    sets = sets.with_dcal(dcal)
    model = build_scorer(scorer, graph, dcal, random_state=fit_seed,
                         scorer_params=scorer_params)
    table = ScoreTable(cal_scores=model.score_pairs(dcal),
                       test_scores=model.score_pairs(sets.dtest),
                       test_pairs=sets.dtest)
    return ConformalState(pair_sets=sets, dcal=dcal, scorer=model,
                          table=table, pi0_ratio=estimate_pi0_ratio(sets))


def _select_at(state, alpha, adjust, pi0_method, storey_lambda,
               pi0_design=None):
    _check_level(alpha)
    if not adjust:
        return ck_select(state.table, alpha)
    if pi0_method == "ratio":
        pi0 = state.pi0_ratio
    elif pi0_method == "storey":
        pvals = conformal_pvalues(state.table.test_scores,
                                  state.table.cal_scores)
        pi0 = estimate_pi0_storey(pvals, storey_lambda)
    elif pi0_method == "design":
        # Simulation-mode oracle: the null fraction implied by the
        # experiment design. The ratio estimator assumes i.i.d. sampling,
        # which a constructed hidden split deliberately violates.
        if pi0_design is None:
            raise ValueError("pi0_method='design' needs the design null "
                             "fraction")
        pi0 = pi0_design
    else:
        raise ValueError("pi0_method must be 'ratio', 'storey' or 'design'")
    level = adjusted_level(alpha, pi0)
    result = ck_select(state.table, level)
    return SelectionResult(selected=result.selected,
                           selected_idx=result.selected_idx,
                           threshold=result.threshold,
                           alpha_used=level, pi0_hat=pi0)


def conformal_link_predict(graph, scorer="cn", alpha=0.1, cal_size=5000,
                           adjust=True, pi0_method="ratio",
                           storey_lambda=0.5, seed=None, scorer_params=None):
    """End-to-end conformal selection of likely edges among the test pairs.

    Steps: draw the reference set uniformly from the observed non-edges,
    fit the scorer on the reference-masked observation, score reference and
    test pairs, and select at level ``alpha`` (rescaled by the estimated
    null fraction when ``adjust``). Deterministic given ``seed``.
    """
    state = _prepare_conformal(graph, scorer, cal_size, seed, scorer_params)
    return _select_at(state, alpha, adjust, pi0_method, storey_lambda)


class ConformalEdgeSelector(BaseEstimator):
    """Estimator wrapper around :func:`conformal_link_predict`.

    After ``fit(graph)`` the selection is available as ``result_`` /
    ``selected_edges_``, along with the fitted scorer, reference pairs and
    the score table.
    """

    def __init__(self, scorer="cn", alpha=0.1, cal_size=5000, adjust=True,
                 pi0_method="ratio", storey_lambda=0.5, random_state=None,
                 scorer_params=None):
        self.scorer = scorer
        self.alpha = alpha
        self.cal_size = cal_size
        self.adjust = adjust
        self.pi0_method = pi0_method
        self.storey_lambda = storey_lambda
        self.random_state = random_state
        self.scorer_params = scorer_params

    def fit(self, graph):
        state = _prepare_conformal(graph, self.scorer, self.cal_size,
                                   self.random_state, self.scorer_params)
        self.result_ = _select_at(state, self.alpha, self.adjust,
                                  self.pi0_method, self.storey_lambda)
        self.scorer_ = state.scorer
        self.cal_pairs_ = state.dcal
        self.score_table_ = state.table
        self.pi0_ = self.result_.pi0_hat
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("ConformalEdgeSelector is not fitted")

    @property
    def selected_edges_(self):
        self._check_fitted()
        return self.result_.selected

    @property
    def threshold_(self):
        self._check_fitted()
        return self.result_.threshold
