"""Flat key = value experiment configuration files.

Keys are section-prefixed (``sbm.pi``, ``design.pi_mis``, ...); unknown
keys are rejected so typos cannot silently change an experiment. Values
are scalars, comma-separated lists, or semicolon-separated rows for the
connectivity matrix. '#' starts a comment.
"""

import numpy as np
import scipy.sparse as sp

from .files import read_edge_list
from .generate import ExperimentDesign, SbmParams
from .graph import canonicalize_pairs
from .harness import ExperimentConfig
from .scoring import SCORERS

__all__ = ["parse_config", "load_experiment_config"]


def _parse_bool(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_float_list(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_str_list(text):
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _parse_matrix(text):
    rows = [[float(tok) for tok in row.split(",") if tok.strip()]
            for row in text.split(";") if row.strip()]
    return np.asarray(rows, dtype=float)


_SCHEMA = {
    "experiment.methods": _parse_str_list,
    "experiment.alphas": _parse_float_list,
    "experiment.replications": int,
    "experiment.seed": int,
    "experiment.output": str,
    "experiment.n_jobs": int,
    "scorer.kind": str,
    "scorer.learning_rate": float,
    "scorer.iterations": int,
    "graph.n": int,
    "graph.directed": _parse_bool,
    "graph.self_pairs": _parse_bool,
    "sbm.pi": _parse_float_list,
    "sbm.gamma": _parse_matrix,
    "design.pi_mis": float,
    "design.ratio_h0_h1": float,
    "design.cal_size": int,
    "conformal.adjust": _parse_bool,
    "conformal.pi0": str,
    "conformal.storey_lambda": float,
    "cvt.val_fraction": float,
    "cvt.grid": _parse_float_list,
    "data.edges": str,
    "data.index_base": int,
}

_REQUIRED = (
    "experiment.methods",
    "experiment.alphas",
    "experiment.replications",
    "experiment.seed",
    "design.pi_mis",
    "design.ratio_h0_h1",
    "design.cal_size",
)


def parse_config(path):
    """Parse a config file into a typed key -> value mapping."""
    values = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in _SCHEMA:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _SCHEMA[key](text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for "
                                 f"{key!r}: {exc}") from None
    return values


def _full_adjacency_from_file(path, index_base, directed, self_pairs):
    edges, _ = read_edge_list(path, index_base)
    if edges.size == 0:
        raise ValueError(f"{path}: no edges")
    edges = canonicalize_pairs(edges, directed)
    n = int(edges.max()) + 1
    rows, cols = edges[:, 0], edges[:, 1]
    if not directed:
        off = rows != cols
        rows = np.concatenate([rows, cols[off]])
        cols = np.concatenate([cols, edges[off, 0]])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    adj.sum_duplicates()
    adj.data[:] = 1.0
    return adj


def load_experiment_config(path):
    """Parse and validate a config file into an :class:`ExperimentConfig`."""
    values = parse_config(path)
    missing = [key for key in _REQUIRED if key not in values]
    if missing:
        raise ValueError(f"{path}: missing required keys: "
                         + ", ".join(missing))

    scorer = values.get("scorer.kind", "cn")
    if scorer not in SCORERS:
        raise ValueError(f"{path}: unknown scorer {scorer!r}")
    scorer_params = {}
    if "scorer.learning_rate" in values:
        scorer_params["learning_rate"] = values["scorer.learning_rate"]
    if "scorer.iterations" in values:
        scorer_params["n_iter"] = values["scorer.iterations"]
    if scorer_params and scorer != "logistic":
        raise ValueError(f"{path}: scorer.* hyperparameters apply to the "
                         "logistic scorer only")

    directed = values.get("graph.directed", False)
    has_sbm = "sbm.gamma" in values or "sbm.pi" in values
    has_data = "data.edges" in values
    if has_sbm == has_data:
        raise ValueError(f"{path}: configure exactly one of sbm.* or "
                         "data.edges")

    sbm = None
    a_star = None
    n_nodes = values.get("graph.n")
    if has_sbm:
        if "sbm.pi" not in values or "sbm.gamma" not in values:
            raise ValueError(f"{path}: sbm mode needs both sbm.pi and "
                             "sbm.gamma")
        if n_nodes is None:
            raise ValueError(f"{path}: sbm mode needs graph.n")
        sbm = SbmParams(pi=np.asarray(values["sbm.pi"]),
                        gamma=values["sbm.gamma"])
        self_pairs = values.get("graph.self_pairs", True)
    else:
        self_pairs = values.get("graph.self_pairs", False)
        a_star = _full_adjacency_from_file(
            values["data.edges"], values.get("data.index_base", 0),
            directed, self_pairs)

    design = ExperimentDesign(pi_mis=values["design.pi_mis"],
                              ratio_h0_h1=values["design.ratio_h0_h1"],
                              cal_size=values["design.cal_size"])

    return ExperimentConfig(
        methods=values["experiment.methods"],
        alphas=values["experiment.alphas"],
        n_replications=values["experiment.replications"],
        master_seed=values["experiment.seed"],
        design=design,
        scorer=scorer,
        scorer_params=scorer_params,
        sbm=sbm,
        n_nodes=n_nodes,
        a_star=a_star,
        directed=directed,
        self_pairs=self_pairs,
        adjust=values.get("conformal.adjust", True),
        pi0_method=values.get("conformal.pi0", "ratio"),
        storey_lambda=values.get("conformal.storey_lambda", 0.5),
        cvt_val_fraction=values.get("cvt.val_fraction", 0.2),
        cvt_threshold_grid=values.get("cvt.grid"),
        output=values.get("experiment.output"),
        n_jobs=values.get("experiment.n_jobs", 1),
    )
