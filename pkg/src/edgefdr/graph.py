"""Partially observed graphs with an explicit sampling mask.

The observation model: a fixed underlying graph of which only some node
pairs have a recorded status. A binary sampling mask says which pairs were
recorded; among recorded pairs the adjacency says edge / no edge. Pairs the
mask marks as unrecorded are the prediction targets.

All graphs here are immutable after construction and safe to share across
threads; masking operations return fresh objects.
"""

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ObservedGraph",
    "PairSets",
    "GroundTruth",
    "all_pairs",
    "canonicalize_pairs",
    "pair_codes",
    "pairs_from_codes",
    "partition_pairs",
    "mask_reference",
]


def canonicalize_pairs(pairs, directed=False):
    """Coerce ``pairs`` to an (m, 2) int64 array in canonical form.

    Undirected pairs are stored with the smaller endpoint first, so that
    (i, j) and (j, i) denote the same pair.
    """
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be an array of shape (m, 2)")
    if not directed:
        arr = np.sort(arr, axis=1)
    return arr


def pair_codes(pairs, n):
    """Encode canonical pairs as scalar codes i * n + j (for fast set ops)."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.size == 0:
        return np.empty(0, dtype=np.int64)
    return pairs[:, 0] * np.int64(n) + pairs[:, 1]


def pairs_from_codes(codes, n):
    """Inverse of :func:`pair_codes`."""
    codes = np.asarray(codes, dtype=np.int64)
    return np.column_stack(np.divmod(codes, np.int64(n)))


def _unique_pairs(pairs, n):
    """Deduplicate canonical pairs and sort them lexicographically."""
    codes = np.unique(pair_codes(pairs, n))
    return pairs_from_codes(codes, n)


def all_pairs(n, directed=False, self_pairs=False):
    """Enumerate the full pair universe in lexicographic order.

    Undirected: {(i, j) : i <= j} (or i < j without self-pairs).
    Directed: all ordered pairs (with or without the diagonal).
    """
    if directed:
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        pairs = np.column_stack([i.ravel(), j.ravel()])
        if not self_pairs:
            pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        return pairs.astype(np.int64)
    i, j = np.triu_indices(n, k=0 if self_pairs else 1)
    return np.column_stack([i, j]).astype(np.int64)


def _check_nodes(pairs, n, what):
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise ValueError(f"{what} contain node ids outside [0, {n})")


class ObservedGraph:
    """Immutable partially observed graph.

    Parameters
    ----------
    n : int
        Number of nodes; ids run from 0 to n - 1.
    edges : array-like of shape (k, 2)
        Observed true edges. Undirected edges may be given in either
        orientation; duplicates are merged.
    missing_pairs : array-like of shape (m, 2), optional
        Pairs whose status was not recorded (mask zeros). All other pairs
        of the universe count as recorded.
    directed : bool, default False
    self_pairs : bool, default False
        Whether diagonal pairs (i, i) belong to the pair universe.
    covariates : ndarray of shape (n, d), optional
        Node covariates. Carried through masking untouched; the built-in
        scorers do not consume them.
    """

    def __init__(self, n, edges=(), missing_pairs=(), *, directed=False,
                 self_pairs=False, covariates=None):
        n = int(n)
        if n <= 0:
            raise ValueError("node count must be positive")
        self.n = n
        self.directed = bool(directed)
        self.self_pairs = bool(self_pairs)

        edges = canonicalize_pairs(edges, directed=self.directed)
        missing = canonicalize_pairs(missing_pairs, directed=self.directed)
        _check_nodes(edges, n, "edges")
        _check_nodes(missing, n, "missing pairs")
        if not self.self_pairs:
            for arr, what in ((edges, "edges"), (missing, "missing pairs")):
                if arr.size and np.any(arr[:, 0] == arr[:, 1]):
                    raise ValueError(
                        f"{what} include a self-pair but self_pairs=False")

        self.edges = _unique_pairs(edges, n)
        self.missing = _unique_pairs(missing, n)
        overlap = np.intersect1d(pair_codes(self.edges, n),
                                 pair_codes(self.missing, n))
        if overlap.size:
            raise ValueError(
                "an observed edge cannot also be an unsampled pair "
                f"(e.g. {tuple(pairs_from_codes(overlap[:1], n)[0])})")

        if covariates is not None:
            covariates = np.array(covariates, dtype=float)
            if covariates.ndim != 2 or covariates.shape[0] != n:
                raise ValueError("covariates must have shape (n, d)")
            covariates.setflags(write=False)
        self.covariates = covariates

        self.edges.setflags(write=False)
        self.missing.setflags(write=False)

        rows, cols = self.edges[:, 0], self.edges[:, 1]
        if not self.directed:
            off = rows != cols
            rows = np.concatenate([rows, cols[off]])
            cols = np.concatenate([cols, self.edges[off, 0]])
        data = np.ones(rows.shape[0], dtype=np.float64)
        self.adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        self.adjacency.sum_duplicates()

    @classmethod
    def from_adjacency(cls, a, omega=None, *, directed=False,
                       self_pairs=False, covariates=None):
        """Build a graph from adjacency / sampling matrices.

        ``omega`` defaults to all-ones (fully observed). Entries of both
        matrices must be 0/1 with ``a <= omega`` entrywise; undirected
        inputs must be symmetric. Densifies both matrices for validation,
        so this is meant for small graphs and tests.
        """
        a = sp.csr_matrix(a)
        n = a.shape[0]
        if a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        a_dense = np.asarray(a.todense())
        if not np.isin(a_dense, (0, 1)).all():
            raise ValueError("adjacency entries must be 0/1")
        if omega is None:
            omega_dense = np.ones((n, n))
        else:
            omega_dense = np.asarray(sp.csr_matrix(omega).todense(), dtype=float)
            if omega_dense.shape != (n, n):
                raise ValueError("sampling matrix shape must match adjacency")
            if not np.isin(omega_dense, (0, 1)).all():
                raise ValueError("sampling matrix entries must be 0/1")
        if not directed:
            if (a_dense != a_dense.T).any():
                raise ValueError("undirected adjacency must be symmetric")
            if (omega_dense != omega_dense.T).any():
                raise ValueError("undirected sampling matrix must be symmetric")
        if (a_dense > omega_dense).any():
            raise ValueError("adjacency must satisfy a <= omega entrywise")
        if not self_pairs and np.diagonal(a_dense).any():
            raise ValueError("adjacency has self-loops but self_pairs=False")
        universe = all_pairs(n, directed, self_pairs)
        edges = universe[a_dense[universe[:, 0], universe[:, 1]] == 1]
        missing = universe[omega_dense[universe[:, 0], universe[:, 1]] == 0]
        return cls(n, edges, missing, directed=directed,
                   self_pairs=self_pairs, covariates=covariates)

    # -- queries ----------------------------------------------------------

    def _check_node(self, node):
        node = int(node)
        if not 0 <= node < self.n:
            raise ValueError(f"node {node} out of range [0, {self.n})")
        return node

    def out_neighbors(self, node):
        node = self._check_node(node)
        row = self.adjacency.indices[
            self.adjacency.indptr[node]:self.adjacency.indptr[node + 1]]
        return set(int(u) for u in row)

    def in_neighbors(self, node):
        node = self._check_node(node)
        col = self._adjacency_t.indices[
            self._adjacency_t.indptr[node]:self._adjacency_t.indptr[node + 1]]
        return set(int(u) for u in col)

    def neighbors(self, node):
        """Neighbor set induced by the symmetric adjacency (undirected)."""
        if self.directed:
            raise ValueError(
                "use out_neighbors / in_neighbors on directed graphs")
        return self.out_neighbors(node)

    def degree(self, node):
        if self.directed:
            raise ValueError(
                "use out_degree / in_degree on directed graphs")
        return len(self.out_neighbors(node))

    def out_degree(self, node):
        return len(self.out_neighbors(node))

    def in_degree(self, node):
        return len(self.in_neighbors(node))

    def has_edge(self, i, j):
        i, j = self._check_node(i), self._check_node(j)
        return bool(self.adjacency[i, j])

    def is_sampled(self, i, j):
        pair = canonicalize_pairs([(i, j)], self.directed)
        code = pair_codes(pair, self.n)[0]
        return code not in self._missing_code_set

    @cached_property
    def _adjacency_t(self):
        return self.adjacency.T.tocsr()

    @cached_property
    def _missing_code_set(self):
        return set(pair_codes(self.missing, self.n).tolist())

    @cached_property
    def out_degrees(self):
        """Out-degree vector (plain degrees for undirected graphs)."""
        deg = np.asarray(self.adjacency.sum(axis=1)).ravel()
        deg.setflags(write=False)
        return deg

    @cached_property
    def in_degrees(self):
        deg = np.asarray(self.adjacency.sum(axis=0)).ravel()
        deg.setflags(write=False)
        return deg

    @cached_property
    def pair_sets(self):
        """Partition of the pair universe by observation status."""
        universe = pair_codes(
            all_pairs(self.n, self.directed, self.self_pairs), self.n)
        missing = pair_codes(self.missing, self.n)
        alt = pair_codes(self.edges, self.n)
        dtr = np.setdiff1d(universe, missing, assume_unique=True)
        dtr_null = np.setdiff1d(dtr, alt, assume_unique=True)
        return PairSets(
            dtr=pairs_from_codes(dtr, self.n),
            dtr_alt=pairs_from_codes(alt, self.n),
            dtr_null=pairs_from_codes(dtr_null, self.n),
            dtest=pairs_from_codes(missing, self.n),
        )

    # -- dense views (small graphs / tests) --------------------------------

    def adjacency_dense(self):
        return np.asarray(self.adjacency.todense())

    def omega_dense(self):
        """Dense sampling matrix; pairs outside the universe read as 1."""
        omega = np.ones((self.n, self.n))
        if self.missing.size:
            omega[self.missing[:, 0], self.missing[:, 1]] = 0
            if not self.directed:
                omega[self.missing[:, 1], self.missing[:, 0]] = 0
        return omega

    # -- misc ---------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ObservedGraph):
            return NotImplemented
        same_cov = (self.covariates is None and other.covariates is None) or (
            self.covariates is not None and other.covariates is not None
            and np.array_equal(self.covariates, other.covariates))
        return (self.n == other.n
                and self.directed == other.directed
                and self.self_pairs == other.self_pairs
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.missing, other.missing)
                and same_cov)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return (f"ObservedGraph(n={self.n}, {kind}, "
                f"{len(self.edges)} edges, {len(self.missing)} unsampled)")


@dataclass(frozen=True)
class PairSets:
    """Disjoint bookkeeping of node pairs by observation status.

    ``dtr`` (recorded pairs) splits into ``dtr_alt`` (observed true edges)
    and ``dtr_null`` (observed non-edges); ``dtest`` holds the unrecorded
    pairs. ``dcal`` is an optional reference subset of ``dtr_null``.
    """

    dtr: np.ndarray
    dtr_alt: np.ndarray
    dtr_null: np.ndarray
    dtest: np.ndarray
    dcal: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.dtr, self.dtr_alt, self.dtr_null, self.dtest):
            arr.setflags(write=False)
        if self.dcal is not None:
            self.dcal.setflags(write=False)

    def with_dcal(self, dcal):
        return replace(self, dcal=np.asarray(dcal, dtype=np.int64))


@dataclass(frozen=True)
class GroundTruth:
    """Hidden truth of a constructed experiment (simulation only).

    ``h1`` / ``h0`` are the unsampled pairs that are / are not edges of the
    full adjacency ``a_star``.
    """

    a_star: sp.csr_matrix
    h0: np.ndarray
    h1: np.ndarray


def partition_pairs(graph):
    """Split the pair universe of ``graph`` into the four canonical sets."""
    return graph.pair_sets


def mask_reference(graph, dcal):
    """Zero the sampling mask on the reference pairs ``dcal``.

    Returns a new graph in which the pairs of ``dcal`` count as unrecorded,
    so that downstream scorers treat them exactly like test pairs. The
    adjacency and covariates are unchanged.

    Raises
    ------
    ValueError
        If ``dcal`` contains an observed true edge: reference pairs must be
        observed non-edges. Pairs that are already unrecorded are accepted
        as no-ops (masking is idempotent).
    """
    dcal = canonicalize_pairs(dcal, graph.directed)
    _check_nodes(dcal, graph.n, "reference pairs")
    if dcal.size == 0:
        return graph
    bad = np.intersect1d(pair_codes(dcal, graph.n),
                         pair_codes(graph.edges, graph.n))
    if bad.size:
        raise ValueError(
            "reference pairs must be observed non-edges; got observed edge "
            f"{tuple(pairs_from_codes(bad[:1], graph.n)[0])}")
    missing = np.concatenate([graph.missing, dcal])
    return ObservedGraph(graph.n, graph.edges, missing,
                         directed=graph.directed, self_pairs=graph.self_pairs,
                         covariates=graph.covariates)
