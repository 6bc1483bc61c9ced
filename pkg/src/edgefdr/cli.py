"""Command-line interface: simulate, predict, evaluate."""

import argparse
import sys

import numpy as np

from .conformal import conformal_link_predict
from .config import load_experiment_config
from .files import (
    format_summary,
    load_observed_graph,
    read_pairs,
    read_truth,
    write_pairs,
    write_records_csv,
)
from .graph import canonicalize_pairs, pair_codes
from .harness import aggregate, fdp, run_experiment, tdp
from .scoring import SCORERS

__all__ = ["main"]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="edgefdr",
        description="FDR-controlled link prediction via conformal "
                    "calibration")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="run a Monte-Carlo experiment from a config file")
    sim.add_argument("config", help="path to a key = value config file")

    pred = sub.add_parser(
        "predict",
        help="select likely edges among the unsampled pairs of a graph")
    pred.add_argument("edges", help="edge-list file of observed true edges")
    pred.add_argument("mask", help="file of unsampled pairs (mask zeros)")
    pred.add_argument("-o", "--output", required=True,
                      help="where to write the selected pairs")
    pred.add_argument("--alpha", type=float, default=0.1,
                      help="target false discovery rate (default 0.1)")
    pred.add_argument("--scorer", default="cn", choices=sorted(SCORERS),
                      help="scoring function (default cn)")
    pred.add_argument("--cal-size", type=int, default=5000,
                      help="requested reference-set size (default 5000)")
    pred.add_argument("--seed", type=int, required=True,
                      help="RNG seed (explicit, for reproducibility)")
    pred.add_argument("--no-adjust", action="store_true",
                      help="skip the null-fraction level adjustment")
    pred.add_argument("--directed", action="store_true",
                      help="treat the graph as directed")
    pred.add_argument("--self-pairs", action="store_true",
                      help="include diagonal pairs in the pair universe")
    pred.add_argument("--nodes", type=int, default=None,
                      help="node count (default: max id + 1)")
    pred.add_argument("--index-base", type=int, default=0, choices=(0, 1),
                      help="node id base in the input files (default 0)")

    ev = sub.add_parser(
        "evaluate",
        help="score a selected-edges file against a truth file")
    ev.add_argument("selected", help="file of selected pairs")
    ev.add_argument("truth", help='truth file with "i j status" records')
    ev.add_argument("--directed", action="store_true",
                    help="treat pairs as ordered")
    ev.add_argument("--index-base", type=int, default=0, choices=(0, 1),
                    help="node id base in the input files (default 0)")
    return parser


def _cmd_simulate(args):
    config = load_experiment_config(args.config)
    if config.output is None:
        raise ValueError("config must set experiment.output for the CSV")
    records = run_experiment(config)
    write_records_csv(records, config.output)
    stats = aggregate(records)
    print(format_summary(stats))
    print(f"wrote {len(records)} records to {config.output}")
    return 0


def _cmd_predict(args):
    graph = load_observed_graph(args.edges, args.mask, n=args.nodes,
                                directed=args.directed,
                                self_pairs=args.self_pairs,
                                index_base=args.index_base)
    if len(graph.missing) == 0:
        raise ValueError("the mask file lists no unsampled pairs; there is "
                         "nothing to predict")
    result = conformal_link_predict(
        graph, scorer=args.scorer, alpha=args.alpha, cal_size=args.cal_size,
        adjust=not args.no_adjust, seed=args.seed)
    write_pairs(result.selected, args.output)
    threshold = "none" if result.threshold is None else repr(result.threshold)
    pi0 = "none" if result.pi0_hat is None else f"{result.pi0_hat:.6g}"
    print(f"selected {result.n_selected} of {len(graph.missing)} "
          "test pairs")
    print(f"threshold {threshold}")
    print(f"pi0_hat {pi0}")
    print(f"alpha_used {result.alpha_used:.6g}")
    return 0


def _cmd_evaluate(args):
    selected = canonicalize_pairs(read_pairs(args.selected, args.index_base),
                                  args.directed)
    h0, h1 = (canonicalize_pairs(arr, args.directed)
              for arr in read_truth(args.truth, args.index_base))
    universe = np.concatenate([h0, h1])
    if universe.size == 0:
        raise ValueError(f"{args.truth}: truth file is empty")
    n = int(universe.max()) + 1
    if selected.size:
        n = max(n, int(selected.max()) + 1)
        stray = np.setdiff1d(pair_codes(selected, n),
                             pair_codes(universe, n))
        if stray.size:
            raise ValueError(
                "selected pairs are not all in the truth file's test set; "
                "the files probably belong to different experiments")
    print(f"fdp {fdp(selected, h0)!r}")
    print(f"tdp {tdp(selected, h1)!r}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
