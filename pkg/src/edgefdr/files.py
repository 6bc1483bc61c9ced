"""Text file formats: edge lists, masks, pair lists, truth files, CSV.

Edge list: one whitespace-separated record per line. "i j" (or "i j 1")
records an observed true edge; "i j 0" records an explicitly observed
non-edge (redundant for graph construction, but validated for
consistency). Mask file: one "i j" per line marking the pair as unsampled.
Truth file: "i j s" with s = 1 for hidden true edges, 0 for hidden
non-edges. Lines starting with '#' and blank lines are ignored everywhere;
node ids are 0-based unless a loader is told otherwise.
"""

import warnings

import numpy as np

from .graph import ObservedGraph, canonicalize_pairs, pair_codes

__all__ = [
    "read_edge_list",
    "read_mask",
    "read_pairs",
    "read_truth",
    "load_observed_graph",
    "write_edge_list",
    "write_mask",
    "write_pairs",
    "write_records_csv",
    "format_summary",
]

CSV_HEADER = "method,alpha,replication,fdp,tdp,n_selected,seed"


def _parse_lines(path, *, min_tokens, max_tokens):
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if not min_tokens <= len(tokens) <= max_tokens:
                raise ValueError(
                    f"{path}:{lineno}: expected {min_tokens}"
                    + (f"-{max_tokens}" if max_tokens != min_tokens else "")
                    + f" fields, got {len(tokens)}")
            try:
                values = [int(t) for t in tokens]
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: fields must be integers") from None
            if values[0] < 0 or values[1] < 0:
                raise ValueError(
                    f"{path}:{lineno}: node ids must be nonnegative")
            rows.append((lineno, values))
    return rows


def _apply_base(pairs, index_base, path):
    if index_base == 0:
        return pairs
    if index_base != 1:
        raise ValueError("index_base must be 0 or 1")
    pairs = pairs - 1
    if pairs.size and pairs.min() < 0:
        raise ValueError(f"{path}: found node id 0 in a 1-based file")
    return pairs


def read_edge_list(path, index_base=0):
    """Read an edge-list file.

    Returns
    -------
    (ndarray, ndarray)
        Observed true edges and explicitly recorded non-edges, both as
        (k, 2) arrays.
    """
    edges, falses = [], []
    for lineno, values in _parse_lines(path, min_tokens=2, max_tokens=3):
        status = values[2] if len(values) == 3 else 1
        if status not in (0, 1):
            raise ValueError(f"{path}:{lineno}: status field must be 0 or 1")
        (edges if status == 1 else falses).append(values[:2])
    to_arr = lambda rows: np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    return _apply_base(to_arr(edges), index_base, path), \
        _apply_base(to_arr(falses), index_base, path)


def read_mask(path, index_base=0):
    """Read the unsampled pairs of a mask file as a (k, 2) array."""
    rows = [values for _, values in
            _parse_lines(path, min_tokens=2, max_tokens=2)]
    pairs = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    return _apply_base(pairs, index_base, path)


def read_pairs(path, index_base=0):
    """Read a plain "i j" pair list (e.g. a selected-edges file)."""
    return read_mask(path, index_base)


def read_truth(path, index_base=0):
    """Read a truth file into the hidden non-edge / edge pair arrays."""
    h0, h1 = [], []
    for lineno, values in _parse_lines(path, min_tokens=3, max_tokens=3):
        if values[2] not in (0, 1):
            raise ValueError(f"{path}:{lineno}: status field must be 0 or 1")
        (h1 if values[2] == 1 else h0).append(values[:2])
    to_arr = lambda rows: np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    return _apply_base(to_arr(h0), index_base, path), \
        _apply_base(to_arr(h1), index_base, path)


def load_observed_graph(edges_path, mask_path=None, *, n=None,
                        directed=False, self_pairs=False, index_base=0,
                        covariates=None):
    """Build an :class:`ObservedGraph` from an edge list and a mask file.

    Without a mask file every pair counts as sampled. The node count is
    inferred as max id + 1 unless declared. Duplicate records (including
    reversed duplicates of undirected edges) are merged with a warning.
    Explicit non-edge records are checked for consistency: they may appear
    neither as edges nor as unsampled pairs.
    """
    edges, explicit_false = read_edge_list(edges_path, index_base)
    missing = (read_mask(mask_path, index_base) if mask_path is not None
               else np.empty((0, 2), dtype=np.int64))

    inferred = 0
    for arr in (edges, explicit_false, missing):
        if arr.size:
            inferred = max(inferred, int(arr.max()) + 1)
    if n is None:
        n = inferred
    elif n < inferred:
        raise ValueError(f"declared node count {n} is smaller than the "
                         f"largest id + 1 ({inferred})")
    if n == 0:
        raise ValueError(f"{edges_path}: no records and no node count")

    def dedup(arr, what, source):
        canon = canonicalize_pairs(arr, directed)
        codes = pair_codes(canon, n)
        if len(np.unique(codes)) < len(codes):
            warnings.warn(f"{source}: duplicate {what} merged", UserWarning,
                          stacklevel=2)
        return canon

    edges = dedup(edges, "edges", edges_path)
    if mask_path is not None:
        missing = dedup(missing, "pairs", mask_path)

    graph = ObservedGraph(n, edges, missing, directed=directed,
                          self_pairs=self_pairs, covariates=covariates)
    if explicit_false.size:
        false_codes = pair_codes(
            canonicalize_pairs(explicit_false, directed), n)
        clash = np.intersect1d(false_codes, pair_codes(graph.edges, n))
        if clash.size:
            raise ValueError(f"{edges_path}: a pair is recorded both as an "
                             "edge and as a non-edge")
        clash = np.intersect1d(false_codes, pair_codes(graph.missing, n))
        if clash.size:
            raise ValueError(f"{edges_path}: a pair recorded as an observed "
                             "non-edge is also listed as unsampled")
    return graph


def _write_pair_lines(pairs, path):
    pairs = np.asarray(pairs, dtype=np.int64)
    order = np.lexsort((pairs[:, 1], pairs[:, 0])) if pairs.size else []
    with open(path, "w", encoding="utf-8") as handle:
        for i, j in pairs[order]:
            handle.write(f"{i} {j}\n")


def write_edge_list(graph, path):
    """Write the observed true edges, one "i j" per line."""
    _write_pair_lines(graph.edges, path)


def write_mask(graph, path):
    """Write the unsampled pairs, one "i j" per line."""
    _write_pair_lines(graph.missing, path)


def write_pairs(pairs, path):
    """Write a pair list (lexicographically sorted), one "i j" per line."""
    _write_pair_lines(pairs, path)


def write_records_csv(records, path):
    """Write metric records in the stable CSV schema (sorted rows)."""
    ordered = sorted(records, key=lambda r: (r.method, r.alpha,
                                             r.replication))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(CSV_HEADER + "\n")
        for r in ordered:
            handle.write(f"{r.method},{r.alpha!r},{r.replication},"
                         f"{r.fdp!r},{r.tdp!r},{r.n_selected},{r.seed}\n")


def format_summary(stats):
    """Human-readable aggregation table for standard output."""
    lines = [f"{'method':<11}{'alpha':>7}  {'fdr (std)':<18}"
             f"{'tdr (std)':<18}{'avg |R|':>9}"]
    for row in stats:
        lines.append(
            f"{row.method:<11}{row.alpha:>7.3g}  "
            f"{row.fdr:.3f} ({row.fdr_std:.3f})   "
            f"{row.tdr:.3f} ({row.tdr_std:.3f})   "
            f"{row.mean_selected:>8.1f}")
    return "\n".join(lines)
