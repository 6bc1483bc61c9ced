"""Stochastic block model generation and experiment construction.

``generate_sbm`` draws a full adjacency from a block model;
``make_experiment`` hides a controlled fraction of its true and false
edges behind the sampling mask, producing an :class:`ObservedGraph`
together with the hidden ground truth; ``sample_reference`` draws the
calibration set from the observed non-edges.

Everything here is a pure function of (inputs, seed) and byte-deterministic.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import (
    GroundTruth,
    ObservedGraph,
    all_pairs,
    pair_codes,
    pairs_from_codes,
)

__all__ = [
    "SbmParams",
    "ExperimentDesign",
    "generate_sbm",
    "expected_edge_count",
    "make_experiment",
    "sample_reference",
]

_PI_TOL = 1e-9


@dataclass(frozen=True)
class SbmParams:
    """Block model parameters: mixture proportions and connectivity matrix.

    ``pi`` has one entry per latent class (nonnegative, summing to one);
    ``gamma[a, b]`` is the connection probability between a class-a node
    and a class-b node.
    """

    pi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if pi.ndim != 1 or pi.size == 0:
            raise ValueError("pi must be a nonempty 1-d array")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > _PI_TOL:
            raise ValueError("pi entries must be nonnegative and sum to 1")
        q = pi.size
        if gamma.shape != (q, q):
            raise ValueError(f"gamma must be a {q}x{q} matrix")
        if np.any(gamma < 0) or np.any(gamma > 1):
            raise ValueError("gamma entries must lie in [0, 1]")
        pi.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_classes(self):
        return self.pi.size


@dataclass(frozen=True)
class ExperimentDesign:
    """How much of the true graph to hide, and how to calibrate.

    ``pi_mis`` is the fraction of true edges to hide; the number of hidden
    non-edges is ``ratio_h0_h1`` times the number of hidden edges.
    ``cal_size`` is the requested reference-set size (capped at the number
    of observed non-edges when sampling).
    """

    pi_mis: float
    ratio_h0_h1: float
    cal_size: int
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.pi_mis <= 1.0:
            raise ValueError("pi_mis must lie in [0, 1]")
        if self.ratio_h0_h1 < 0:
            raise ValueError("ratio_h0_h1 must be nonnegative")
        if self.cal_size < 1:
            raise ValueError("cal_size must be at least 1")


def generate_sbm(params, n, *, directed=False, self_loops=True, seed=None):
    """Draw a full adjacency matrix from a stochastic block model.

    Class labels are i.i.d. from ``params.pi``; each admissible pair
    (i, j) is an edge independently with probability
    ``params.gamma[z_i, z_j]``.

    Returns
    -------
    (scipy.sparse.csr_matrix, ndarray)
        The 0/1 adjacency (symmetric when undirected) and the length-n
        label vector.
    """
    if n <= 0:
        raise ValueError("node count must be positive")
    if not directed and not np.allclose(params.gamma, params.gamma.T):
        raise ValueError("undirected generation requires a symmetric gamma")
    rng = np.random.default_rng(seed)
    labels = rng.choice(params.n_classes, size=n, p=params.pi)
    probs = params.gamma[labels[:, None], labels[None, :]]
    draws = rng.random((n, n))
    adj = (draws < probs).astype(np.float64)
    if directed:
        if not self_loops:
            np.fill_diagonal(adj, 0.0)
    else:
        upper = np.triu(adj, k=0 if self_loops else 1)
        adj = upper + np.triu(upper, k=1).T
    return sp.csr_matrix(adj), labels


def expected_edge_count(params, n, *, directed=False, self_loops=True):
    """Analytic expected number of edges over the pair universe.

    Off-diagonal pairs contribute pi' gamma pi each; diagonal pairs (when
    admissible) contribute sum_a pi_a gamma_aa.
    """
    pi, gamma = params.pi, params.gamma
    per_offdiag = float(pi @ gamma @ pi)
    per_diag = float(np.sum(pi * np.diagonal(gamma)))
    n_offdiag = n * (n - 1) if directed else n * (n - 1) // 2
    n_diag = n if self_loops else 0
    return n_offdiag * per_offdiag + n_diag * per_diag


def _canonical_edges(a_star, n, directed, self_pairs):
    a = sp.csr_matrix(a_star)
    coo = a.tocoo()
    if np.any((coo.data != 0) & (coo.data != 1)):
        raise ValueError("adjacency entries must be 0/1")
    keep = coo.data == 1
    pairs = np.column_stack([coo.row[keep], coo.col[keep]]).astype(np.int64)
    if not directed:
        if (a != a.T).nnz:
            raise ValueError("undirected adjacency must be symmetric")
        pairs = pairs[pairs[:, 0] <= pairs[:, 1]]
    if not self_pairs and np.any(pairs[:, 0] == pairs[:, 1]):
        raise ValueError("adjacency has self-loops but self_pairs=False")
    codes = np.unique(pair_codes(pairs, n))
    return pairs_from_codes(codes, n)


def make_experiment(a_star, design, *, directed=False, self_pairs=True,
                    covariates=None):
    """Hide part of a full graph behind the sampling mask.

    A uniform sample of ``floor(pi_mis * |E|)`` true edges becomes the
    hidden edge set; a uniform sample of ``floor(ratio_h0_h1 * |H1|)``
    non-edges becomes the hidden non-edge set. The mask is zero exactly on
    their union and the observed adjacency is the full one restricted to
    the mask.

    Returns
    -------
    (ObservedGraph, GroundTruth)
    """
    a_star = sp.csr_matrix(a_star)
    n = a_star.shape[0]
    edges = _canonical_edges(a_star, n, directed, self_pairs)
    universe = pair_codes(all_pairs(n, directed, self_pairs), n)
    edge_codes = pair_codes(edges, n)
    non_edge_codes = np.setdiff1d(universe, edge_codes, assume_unique=True)

    n_h1 = math.floor(design.pi_mis * len(edges))
    n_h0 = math.floor(design.ratio_h0_h1 * n_h1)
    if n_h1 > len(edges):
        raise ValueError("not enough true edges for the requested design")
    if n_h0 > len(non_edge_codes):
        raise ValueError("not enough non-edges for the requested design")

    rng = np.random.default_rng(design.seed)
    h1_codes = np.sort(rng.choice(edge_codes, size=n_h1, replace=False))
    h0_codes = np.sort(rng.choice(non_edge_codes, size=n_h0, replace=False))

    observed_edges = pairs_from_codes(
        np.setdiff1d(edge_codes, h1_codes, assume_unique=True), n)
    missing = pairs_from_codes(
        np.concatenate([h0_codes, h1_codes]), n)
    graph = ObservedGraph(n, observed_edges, missing, directed=directed,
                          self_pairs=self_pairs, covariates=covariates)
    truth = GroundTruth(a_star=a_star,
                        h0=pairs_from_codes(h0_codes, n),
                        h1=pairs_from_codes(h1_codes, n))
    return graph, truth


def sample_reference(pair_sets, size, seed=None):
    """Draw the reference (calibration) set uniformly from the observed
    non-edges.

    Requests larger than the number of available non-edges are capped with
    a ``UserWarning``. The result is lexicographically sorted, so downstream
    behaviour depends only on the sampled set, not the draw order.
    """
    if size < 1:
        raise ValueError("reference set size must be at least 1")
    null = pair_sets.dtr_null
    if len(null) == 0:
        raise ValueError("no observed non-edges to sample the reference "
                         "set from")
    k = min(int(size), len(null))
    if k < size:
        # stable message so repeated Monte-Carlo runs warn only once
        warnings.warn(
            "requested reference-set size exceeds the available observed "
            "non-edges; using all of them", UserWarning, stacklevel=2)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(null), size=k, replace=False)
    chosen = null[np.sort(idx)]
    return chosen
