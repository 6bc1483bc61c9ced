"""Link-prediction scorers behind a common fit/score interface.

A scorer is fit on an :class:`~edgefdr.graph.ObservedGraph` and afterwards
maps node pairs to real-valued scores, deterministically. Heuristic scorers
(common neighbors and friends) have a no-op fit; the logistic scorer trains
a classifier by gradient descent on pair features built from powers of the
observed adjacency.

Fitting must only ever see the (possibly reference-masked) observation:
scorers never touch ground truth, and ``build_scorer`` enforces that a
trained scorer's examples are disjoint from the reference set.
"""

import inspect
import warnings

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .graph import canonicalize_pairs, mask_reference, pair_codes

__all__ = [
    "FEATURE_NAMES",
    "PairScorer",
    "CommonNeighbors",
    "JaccardCoefficient",
    "AdamicAdar",
    "ResourceAllocation",
    "PreferentialAttachment",
    "LogisticPairScorer",
    "SCORERS",
    "make_scorer",
    "build_scorer",
    "extract_features",
    "fit_logistic",
    "logistic_loss_and_grad",
    "normalize_scores",
]

#: Feature order used by :func:`extract_features`.
FEATURE_NAMES = (
    "deg_i",
    "deg_j",
    "common_neighbors",
    "jaccard",
    "adamic_adar",
    "two_paths",
    "three_paths",
    "preferential_attachment",
)

_CHUNK = 4096


def _row_sums(mat):
    return np.asarray(mat.sum(axis=1)).ravel()


def _common_neighbors(adj, src, trg):
    return _row_sums(adj[src].multiply(adj[trg]))


def _weighted_common(adj, weights, src, trg):
    # sum_u A_iu * w_u * A_ju via a diagonal reweighting of the rows
    weighted = adj[src] @ sp.diags(weights)
    return _row_sums(weighted.multiply(adj[trg]))


def extract_features(graph, pairs):
    """Fixed-order pair features from the observed adjacency.

    Columns follow :data:`FEATURE_NAMES`: the endpoint (out-)degrees,
    common-neighbor count, Jaccard coefficient, Adamic-Adar index, the
    number of 2- and 3-paths between the endpoints, and the degree product.
    Path counts use sparse row products; dense matrix powers are never
    formed.
    """
    pairs = canonicalize_pairs(pairs, graph.directed)
    out = np.empty((len(pairs), len(FEATURE_NAMES)), dtype=np.float64)
    adj = graph.adjacency
    adj_t = graph._adjacency_t
    deg = graph.out_degrees

    log_deg = np.log(np.maximum(deg, 2.0))
    aa_weights = np.where(deg >= 2, 1.0 / log_deg, 0.0)

    for lo in range(0, len(pairs), _CHUNK):
        chunk = pairs[lo:lo + _CHUNK]
        src, trg = chunk[:, 0], chunk[:, 1]
        cn = _common_neighbors(adj, src, trg)
        union = deg[src] + deg[trg] - cn
        jac = np.divide(cn, union, out=np.zeros_like(cn), where=union > 0)
        aa = _weighted_common(adj, aa_weights, src, trg)
        two = _row_sums(adj[src].multiply(adj_t[trg]))
        three = _row_sums((adj[src] @ adj).multiply(adj_t[trg]))
        block = out[lo:lo + _CHUNK]
        block[:, 0] = deg[src]
        block[:, 1] = deg[trg]
        block[:, 2] = cn
        block[:, 3] = jac
        block[:, 4] = aa
        block[:, 5] = two
        block[:, 6] = three
        block[:, 7] = deg[src] * deg[trg]
    return out


class PairScorer(BaseEstimator):
    """Base class: fit on an observed graph, then score node pairs."""

    #: True when scores are probabilities in [0, 1] (no normalization
    #: needed by the thresholding baselines).
    produces_probabilities = False
    #: True when fit consumes training examples (and so is subject to the
    #: reference-set leakage guard).
    trainable = False

    def fit(self, graph):
        self.graph_ = graph
        self._fit(graph)
        return self

    def _fit(self, graph):
        pass

    def _check_fitted(self):
        if not hasattr(self, "graph_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fit on a graph before "
                "scoring")

    def score_pairs(self, pairs):
        """Vectorized scores for an (m, 2) array of pairs."""
        self._check_fitted()
        pairs = canonicalize_pairs(pairs, self.graph_.directed)
        if len(pairs) == 0:
            return np.empty(0, dtype=np.float64)
        return self._score(pairs)

    def score(self, i, j):
        return float(self.score_pairs(np.array([[i, j]]))[0])


class CommonNeighbors(PairScorer):
    """Number of common (out-)neighbors, A_i . A_j on the observed
    adjacency."""

    def _score(self, pairs):
        return _common_neighbors(self.graph_.adjacency, pairs[:, 0],
                                 pairs[:, 1])


class JaccardCoefficient(PairScorer):
    """|N(i) & N(j)| / |N(i) | N(j)|, zero when both neighborhoods are
    empty."""

    def _score(self, pairs):
        adj = self.graph_.adjacency
        deg = self.graph_.out_degrees
        cn = _common_neighbors(adj, pairs[:, 0], pairs[:, 1])
        union = deg[pairs[:, 0]] + deg[pairs[:, 1]] - cn
        return np.divide(cn, union, out=np.zeros_like(cn), where=union > 0)


class AdamicAdar(PairScorer):
    """Sum of 1/log(deg) over common neighbors.

    Common neighbors of degree <= 1 (possible only around self-pairs or in
    directed graphs) contribute 0, keeping the score finite.
    """

    def _score(self, pairs):
        deg = self.graph_.out_degrees
        weights = np.where(deg >= 2, 1.0 / np.log(np.maximum(deg, 2.0)), 0.0)
        return _weighted_common(self.graph_.adjacency, weights,
                                pairs[:, 0], pairs[:, 1])


class ResourceAllocation(PairScorer):
    """Sum of 1/deg over common neighbors."""

    def _score(self, pairs):
        deg = self.graph_.out_degrees
        weights = np.where(deg >= 1, 1.0 / np.maximum(deg, 1.0), 0.0)
        return _weighted_common(self.graph_.adjacency, weights,
                                pairs[:, 0], pairs[:, 1])


class PreferentialAttachment(PairScorer):
    """Product of the endpoint (out-)degrees."""

    def _score(self, pairs):
        deg = self.graph_.out_degrees
        return (deg[pairs[:, 0]] * deg[pairs[:, 1]]).astype(np.float64)


def logistic_loss_and_grad(weights, bias, features, labels):
    """Mean cross-entropy of a logistic model and its exact gradient.

    Loss is computed in the numerically stable form
    mean(log(1 + exp(z)) - y z) with z = X w + b.

    Returns
    -------
    (float, ndarray, float)
        Loss, gradient w.r.t. ``weights``, gradient w.r.t. ``bias``.
    """
    z = features @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    resid = expit(z) - labels
    grad_w = features.T @ resid / len(labels)
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def fit_logistic(features, labels, learning_rate=0.1, n_iter=500):
    """Full-batch gradient descent on the mean cross-entropy.

    Parameters start at zero; the step size is halved whenever a step would
    increase the loss, so the returned loss history is non-increasing.

    Returns
    -------
    (ndarray, float, ndarray)
        Weights, bias, and the loss value before and after each accepted
        step.
    """
    weights = np.zeros(features.shape[1])
    bias = 0.0
    step = float(learning_rate)
    loss, grad_w, grad_b = logistic_loss_and_grad(
        weights, bias, features, labels)
    history = [loss]
    for _ in range(n_iter):
        while step >= 1e-12:
            cand_w = weights - step * grad_w
            cand_b = bias - step * grad_b
            cand_loss, cand_gw, cand_gb = logistic_loss_and_grad(
                cand_w, cand_b, features, labels)
            if cand_loss <= loss:
                break
            step /= 2.0
        else:
            break
        weights, bias = cand_w, cand_b
        loss, grad_w, grad_b = cand_loss, cand_gw, cand_gb
        history.append(loss)
    return weights, bias, np.asarray(history)


class LogisticPairScorer(PairScorer):
    """Logistic classifier on pair features, trained by gradient descent.

    The training set is balanced: all observed true edges plus an equally
    sized uniform subsample of the observed non-edges (shrunk with a warning
    when too few non-edges remain). Features are standardized on the
    training set; optimization is :func:`fit_logistic`, which starts at zero
    and keeps the loss non-increasing, so the whole fit is deterministic
    given ``random_state``.
    """

    produces_probabilities = True
    trainable = True

    def __init__(self, learning_rate=0.1, n_iter=500, random_state=None):
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.random_state = random_state

    def _fit(self, graph):
        sets = graph.pair_sets
        alt, null = sets.dtr_alt, sets.dtr_null
        if len(alt) == 0:
            raise ValueError("logistic scorer needs at least one observed "
                             "true edge")
        if len(null) == 0:
            raise ValueError("logistic scorer needs at least one observed "
                             "non-edge")
        n_null = min(len(alt), len(null))
        if n_null < len(alt):
            warnings.warn(
                f"only {len(null)} observed non-edges available for "
                f"{len(alt)} true edges; training set is unbalanced",
                UserWarning, stacklevel=2)
        rng = np.random.default_rng(self.random_state)
        idx = rng.choice(len(null), size=n_null, replace=False)
        train_pairs = np.concatenate([alt, null[np.sort(idx)]])
        labels = np.concatenate([np.ones(len(alt)), np.zeros(n_null)])

        features = extract_features(graph, train_pairs)
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0] = 1.0
        scaled = (features - mean) / std

        weights, bias, history = fit_logistic(
            scaled, labels, learning_rate=self.learning_rate,
            n_iter=self.n_iter)

        self.weights_ = weights
        self.bias_ = bias
        self.feature_mean_ = mean
        self.feature_std_ = std
        self.train_pairs_ = train_pairs
        self.train_labels_ = labels
        self.loss_history_ = history

    def _score(self, pairs):
        features = extract_features(self.graph_, pairs)
        scaled = (features - self.feature_mean_) / self.feature_std_
        return expit(scaled @ self.weights_ + self.bias_)


#: Registry of scorer kinds selectable from config / CLI.
SCORERS = {
    "cn": CommonNeighbors,
    "jaccard": JaccardCoefficient,
    "adamic-adar": AdamicAdar,
    "resource-allocation": ResourceAllocation,
    "preferential-attachment": PreferentialAttachment,
    "logistic": LogisticPairScorer,
}


def make_scorer(kind, random_state=None, **params):
    """Instantiate a scorer by registry name.

    ``random_state`` is forwarded only to scorers that accept one.
    """
    try:
        cls = SCORERS[kind]
    except KeyError:
        raise ValueError(
            f"unknown scorer {kind!r}; choose from {sorted(SCORERS)}"
        ) from None
    accepted = inspect.signature(cls.__init__).parameters
    if "random_state" in accepted:
        params = dict(params, random_state=random_state)
    return cls(**params)


def build_scorer(kind, graph, dcal, *, random_state=None, scorer_params=None):
    """Fit a scorer of the given kind on the reference-masked observation.

    The graph is masked on ``dcal`` before fitting, so trained scorers treat
    the reference pairs as unobserved; a defensive guard verifies that the
    resulting training examples never intersect ``dcal``.
    """
    masked = mask_reference(graph, dcal)
    scorer = make_scorer(kind, random_state=random_state,
                         **(scorer_params or {}))
    scorer.fit(masked)
    if getattr(scorer, "trainable", False):
        overlap = np.intersect1d(
            pair_codes(scorer.train_pairs_, graph.n),
            pair_codes(canonicalize_pairs(dcal, graph.directed), graph.n))
        if overlap.size:
            raise RuntimeError(
                "training examples leaked into the reference set; this is "
                "a bug in the masking logic")
    return scorer


def normalize_scores(scores):
    """Map raw scores into (0, 1): standardize, then apply the sigmoid.

    Constant inputs map to 0.5. The map is strictly increasing otherwise,
    so rankings are preserved.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("cannot normalize an empty score sequence")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    std = scores.std()
    if std == 0:
        return np.full(scores.shape, 0.5)
    return expit((scores - scores.mean()) / std)
