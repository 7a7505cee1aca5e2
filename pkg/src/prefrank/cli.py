"""Command-line front end: ``prefrank <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import analysis, experiment
from .baselines import DEFAULT_DAMPING, graph_rank, rank_centrality
from .graph import read_edge_list, write_edge_list
from .kernels import PairMode
from .ranking import (
    EMBEDDINGS,
    PreferenceSample,
    PreferenceVector,
    Task,
    kendall_tau,
    node_kernel,
    pairwise_error,
    parse_embedding,
    pref_rank,
    sample_pairs,
    scores_from_ranking,
    spearman_footrule,
)
from .svm import DEFAULT_C, DEFAULT_TOL

log = logging.getLogger("prefrank")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
GRAPH_FAMILIES = ("complete", "union-cliques", "regular", "erdos-renyi", "two-cluster")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output path")
    p.add_argument("--config", default=argparse.SUPPRESS, help="YAML file of option defaults")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _graph_flags(p):
    g = p.add_argument_group("graph")
    g.add_argument("--graph", help="edge-list file (overrides the family flags)")
    g.add_argument("--family", choices=GRAPH_FAMILIES)
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int, help="number of cliques")
    g.add_argument("--r", type=int, help="degree of a regular graph")
    g.add_argument("--q", type=float, help="edge probability (between clusters for two-cluster)")
    g.add_argument("--p", type=float, dest="p_in", help="within-cluster edge probability")


def _graph_spec(args) -> dict:
    if args.graph:
        return {"file": args.graph}
    if not args.family or args.n is None:
        raise UsageError("give --graph FILE or --family with --n")
    spec = {"family": args.family, "n": args.n}
    for key, attr in (("k", "k"), ("r", "r"), ("q", "q"), ("p", "p_in")):
        if getattr(args, attr) is not None:
            spec[key] = getattr(args, attr)
    return spec


def _seed(args) -> int:
    return getattr(args, "seed", 0)


def _out(args, default=None):
    out = getattr(args, "out", None) or default
    if out is None:
        raise UsageError("--out is required")
    return out


def _load_graph(args, rng):
    spec = _graph_spec(args)
    try:
        return experiment.make_graph(spec, rng), spec
    except KeyError as exc:
        raise UsageError(f"family {spec.get('family')} needs --{exc.args[0]}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_graph(args):
    rng = np.random.default_rng(_seed(args))
    g, _ = _load_graph(args, rng)
    write_edge_list(g, _out(args))
    log.info("wrote graph with %d nodes and %d edges", g.n, g.num_edges)


def cmd_gen_pref(args):
    ss = np.random.SeedSequence(_seed(args))
    g_seed, p_seed = ss.spawn(2)
    g, spec = _load_graph(args, np.random.default_rng(g_seed))
    if args.protocol == "two-cluster":
        spec = {**spec, "family": "two-cluster"}
    elif args.protocol == "adjacency":
        spec = {k: v for k, v in spec.items() if k != "family"}
    pref = experiment.make_preference(g, spec, Task(args.task), args.levels, args.br_prob, p_seed)
    pref.write(_out(args))
    if args.graph_out:
        write_edge_list(g, args.graph_out)


def cmd_ingest(args):
    written = experiment.ingest(
        args.feature_file, _out(args), args.subset_size, args.subsets, Task(args.task), _seed(args)
    )
    for gpath, ppath in written:
        print(f"{gpath}\t{ppath}")


def _sample(args, pref):
    if args.sample:
        return PreferenceSample.from_csv(args.sample, pref.n)
    return sample_pairs(pref.n, args.f, pref, np.random.default_rng(_seed(args)))


def _report(pref, sample, scores, ranking, extra):
    star = pref.ranking()
    row = dict(extra)
    row.update(
        m=sample.m,
        er_D=pairwise_error(scores, pref, "D"),
        train_error=pairwise_error(scores, pref, "train", sample=sample),
        d_k=kendall_tau(star, ranking),
        d_s=spearman_footrule(star, ranking),
        ranking=ranking.sigma.tolist(),
    )
    return row


def _write_outputs(args, ranking, scores):
    if getattr(args, "out", None):
        Path(args.out).write_text(ranking.to_text() + "\n")
    if args.scores_out:
        np.savetxt(args.scores_out, scores, fmt="%.17g")


def cmd_rank(args):
    g = read_edge_list(args.graph)
    pref = PreferenceVector.read(args.pref)
    sample = _sample(args, pref)
    if args.sample_out:
        sample.to_csv(args.sample_out)
    emb = args.embedding
    res = pref_rank(g, emb, sample, C=args.C, tol=args.tol)
    _write_outputs(args, res.ranking, res.scores)
    print(json.dumps(_report(pref, sample, res.scores, res.ranking, {"algorithm": "Pref-Rank", "embedding": emb, "C": args.C})))


def cmd_baseline(args):
    g = read_edge_list(args.graph)
    pref = PreferenceVector.read(args.pref)
    sample = _sample(args, pref)
    if args.sample_out:
        sample.to_csv(args.sample_out)
    if args.method == "rc":
        ranking = rank_centrality(g.n, sample, args.damping)
        scores = scores_from_ranking(ranking)
        extra = {"algorithm": "RC", "damping": args.damping}
    else:
        res = graph_rank(g, sample, C=args.C, tol=args.tol)
        ranking, scores = res.ranking, res.scores
        extra = {"algorithm": "GR", "embedding": "Lap-PD", "C": args.C}
    _write_outputs(args, ranking, scores)
    print(json.dumps(_report(pref, sample, scores, ranking, extra)))


def cmd_experiment(args):
    overrides = {
        "fractions": args.fractions,
        "repeats": args.repeats,
        "C": args.C,
        "seed": getattr(args, "seed", None),
        "algorithms": args.algorithms,
        "task": args.task,
        "levels": args.levels,
        "br_prob": args.br_prob,
        "jobs": args.jobs,
        "output": getattr(args, "out", None),
    }
    if args.fresh_instance:
        overrides["fresh_instance"] = True
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        config = experiment.ExperimentConfig.from_file(cfg_path, **overrides)
    else:
        if not (args.graph or args.family):
            raise UsageError("experiment needs --config or graph flags")
        data = {k: v for k, v in overrides.items() if v is not None}
        data["graph"] = _graph_spec(args)
        config = experiment.ExperimentConfig.from_dict(data)
    if not config.output:
        raise UsageError("--out (or 'output' in the config) is required")

    def progress(f, t):
        log.info("f=%g trial=%d done", f, t)

    experiment.run_experiment(config, progress=progress)
    print(config.output)


def cmd_analyze(args):
    reports, complexity = [], []
    if args.graph or args.family:
        g, _ = _load_graph(args, np.random.default_rng(_seed(args)))
        for emb in args.embedding:
            family, mode = parse_embedding(emb)
            kernel = node_kernel(g, family)
            modes = [mode, "generic"] if args.generic and mode is PairMode.KRONECKER else [mode]
            for md in modes:
                for p in args.p_values:
                    reports.append(
                        analysis.bound_report(kernel, md, args.C, p, emb, args.mc_samples, _seed(args)).as_row()
                    )
    for fam in args.theta_family:
        tf = analysis.ThetaFamily(fam, k=args.theta_k, q=args.q)
        for n in args.sizes:
            theta = analysis.theta_bound(tf, n)
            for eps in args.epsilons:
                try:
                    sc = analysis.sample_complexity(theta, n, eps, strict=False)
                except analysis.AnalysisError as exc:
                    log.warning("skipping %s n=%d eps=%g: %s", fam, n, eps, exc)
                    continue
                complexity.append({"family": fam, **sc.__dict__})
    out = getattr(args, "out", None)
    if out and Path(out).suffix not in (".json", ".jsonl"):
        base = Path(out)
        if reports:
            analysis.write_reports(reports, base)
        if complexity:
            target = base.with_name(base.stem + "_complexity" + base.suffix) if reports else base
            analysis.write_reports(complexity, target)
        return
    _emit({"bounds": reports, "sample_complexity": complexity}, out)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="prefrank", description="Graph-structured ranking from pairwise preferences.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-graph", parents=[common], help="generate a synthetic graph")
    _graph_flags(p)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("gen-pref", parents=[common], help="generate a preference vector for a graph")
    _graph_flags(p)
    p.add_argument("--task", choices=[t.value for t in Task], default="FR")
    p.add_argument("--levels", type=int, default=10, help="rating levels d for OR")
    p.add_argument("--br-prob", type=float, default=0.8, help="P(+1) for cluster one in the BR protocol")
    p.add_argument(
        "--protocol",
        choices=("auto", "adjacency", "two-cluster"),
        default="auto",
        help="auto: two-cluster protocol for two-cluster graphs, adjacency scores otherwise",
    )
    p.add_argument("--graph-out", help="also write the graph used")
    p.set_defaults(func=cmd_gen_pref)

    p = sub.add_parser("ingest", parents=[common], help="cut a libsvm-format dataset into graph/preference subsets")
    p.add_argument("feature_file")
    p.add_argument("--subset-size", type=int, default=40)
    p.add_argument("--subsets", type=int, default=10)
    p.add_argument("--task", choices=[t.value for t in Task], default="FR")
    p.set_defaults(func=cmd_ingest)

    for name, helptext in (("rank", "run Pref-Rank"), ("baseline", "run a baseline ranker")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--graph", required=True)
        p.add_argument("--pref", required=True)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--f", type=float, help="fraction of pairs to sample")
        src.add_argument("--sample", help="k,y CSV of observed pairs")
        p.add_argument("--C", type=float, default=DEFAULT_C)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--scores-out", help="write all pair scores")
        p.add_argument("--sample-out", help="write the sampled pairs")
        if name == "rank":
            p.add_argument("--embedding", choices=EMBEDDINGS, default="LS-Kron")
            p.set_defaults(func=cmd_rank)
        else:
            p.add_argument("--method", choices=("rc", "gr"), default="rc")
            p.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
            p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("experiment", parents=[common], help="sweep the sampling fraction and write metrics CSV")
    _graph_flags(p)
    p.add_argument("--task", choices=[t.value for t in Task])
    p.add_argument("--levels", type=int)
    p.add_argument("--br-prob", type=float)
    p.add_argument("--fractions", type=float, nargs="+")
    p.add_argument("--repeats", type=int)
    p.add_argument("--C", type=float)
    p.add_argument("--algorithms", nargs="+", help=f"any of {', '.join(experiment.ALGORITHMS)} or an embedding")
    p.add_argument("--jobs", type=int)
    p.add_argument("--fresh-instance", action="store_true", help="new graph and preference per trial")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", parents=[common], help="Rademacher bounds and sample-complexity tables")
    _graph_flags(p)
    p.add_argument("--embedding", nargs="+", choices=EMBEDDINGS, default=["LS-Kron", "LS-PD"])
    p.add_argument("--generic", action="store_true", help="also report the eigenvalue-based Kronecker bound")
    p.add_argument("--C", type=float, default=DEFAULT_C)
    p.add_argument("--p-values", type=float, nargs="+", default=[0.1, 0.25])
    p.add_argument("--mc-samples", type=int, default=analysis.MC_SAMPLES)
    p.add_argument("--theta-family", nargs="*", default=[], choices=[f.value for f in analysis.Family])
    p.add_argument("--theta-k", type=int)
    p.add_argument("--sizes", type=int, nargs="+", default=[100])
    p.add_argument("--epsilons", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    p.set_defaults(func=cmd_analyze)
    return parser


def _apply_config(parser, argv):
    """Use YAML values as option defaults; explicit flags still win."""
    pre, _ = parser.parse_known_args(argv)
    path = getattr(pre, "config", None)
    if not path or pre.command == "experiment":
        return parser.parse_args(argv)
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a mapping")
    subparser = parser._subparsers._group_actions[0].choices[pre.command]
    known = {a.dest for a in subparser._actions}
    unknown = set(k.replace("-", "_") for k in data) - known
    if unknown:
        raise UsageError(f"{path}: unknown options {sorted(unknown)}")
    subparser.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"prefrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, yaml.YAMLError) as exc:
        print(f"prefrank: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (UsageError, experiment.ConfigError) as exc:
        print(f"prefrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("failure", exc_info=True)
        print(f"prefrank: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
