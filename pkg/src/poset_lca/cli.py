"""Command-line entry point: ``poset-lca <command> ...``.

Every command prints one JSON document (``match`` prints ``v partner`` lines
unless ``--json``), identical for identical arguments. Exit codes: 2 for bad
arguments or inputs, 3 when a stage still fails after retries, and for
``test-mono`` 0 on Accept and 1 on Reject.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .apps.corrector import correct_all, with_retries
from .apps.learner import draw_samples, learn_monotone_agnostic, learn_monotone_proper, recommended_samples
from .apps.tester import tolerant_test_cube, tolerant_test_poset
from .config import SCHEMA_VERSION, LearnerConfig, RunConfig, SorterConfig, TesterConfig
from .errors import PosetError, SizeError, StageFailure
from .labeling import (
    LabelOracle,
    count_ones,
    cube_function,
    distance_to_monotone_exact,
    is_monotone,
    labeling_distance,
    oracle_on,
    poset_function,
    read_labels,
)
from .matching import MatchingLCA
from .mis import MISLCA, WorkGraph, default_tau, random_bounded_graph, read_graph
from .poset import antichain, chain, format_poset, hypercube, random_dag, read_poset, truncated_hypercube
from .sorter import LocalSorter, global_sort, probe_query, stage_tau
from .tape import RandomTape, derive_seed

log = logging.getLogger("poset_lca")

EXACT_OPT_LIMIT = 1 << 12


class UsageError(Exception):
    pass


def _emit(doc: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def _seed(args) -> int:
    env = os.environ.get("POSET_LCA_SEED")
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"POSET_LCA_SEED must be an integer, got {env!r}")
    return args.seed


def _sorter_config(args) -> SorterConfig:
    cfg = SorterConfig()
    if getattr(args, "exact_kwise", None):
        cfg = replace(cfg, tape_mode="kwise", kwise=args.exact_kwise)
    if getattr(args, "extra_stage", False):
        cfg = replace(cfg, extra_stage=True)
    if getattr(args, "fallback_global", False):
        cfg = replace(cfg, fallback_global=True)
    return cfg


def _log_run(command: str, seed: int, cfg: RunConfig, probes: dict) -> None:
    log.info("%s seed=%d config=%s probes=%s", command, seed, cfg.digest(), json.dumps(probes, sort_keys=True))


def _ratio(fr: Fraction) -> float:
    return float(fr)


# -- poset and labels ---------------------------------------------------------


def _load_poset(args):
    chosen = [a for a in ("poset", "hypercube", "truncated") if getattr(args, a, None) is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --poset, --hypercube, --truncated")
    if args.poset is not None:
        return read_poset(args.poset)
    if args.hypercube is not None:
        return hypercube(args.hypercube)
    try:
        n, eps = args.truncated.split(":")
        return truncated_hypercube(int(n), float(eps))
    except ValueError as exc:
        raise UsageError(f"--truncated expects n:eps, got {args.truncated!r} ({exc})")


def _load_labels(args, poset, seed: int) -> LabelOracle:
    if (args.labels is None) == (args.function is None):
        raise UsageError("give exactly one of --labels, --function")
    if args.labels is not None:
        return LabelOracle.from_array(read_labels(args.labels, len(poset)))
    return poset_function(args.function, poset, seed)


def _poset_summary(poset) -> dict:
    return {"elements": len(poset), "height": poset.height, "degree_bound": poset.degree_bound}


def _add_poset_args(p) -> None:
    p.add_argument("--poset", help="poset file: N, then one Hasse edge 'u v' per line")
    p.add_argument("--hypercube", type=int, metavar="N")
    p.add_argument("--truncated", metavar="N:EPS", help="middle weight band of {0,1}^N")
    p.add_argument("--labels", help="label file: 'element bit' per line")
    p.add_argument("--function", help="majority | parity | threshold:k | random:p | ...")


def _add_sorter_args(p) -> None:
    p.add_argument("--exact-kwise", type=int, metavar="K", help="k-wise independent tape instead of the PRF tape")
    p.add_argument("--extra-stage", action="store_true")
    p.add_argument("--fallback-global", action="store_true", help="no cap on undecided components")


# -- commands -----------------------------------------------------------------


def cmd_gen(args) -> int:
    seed = _seed(args)
    if args.random_dag is not None:
        text = format_poset(args.random_dag, random_dag(args.random_dag, args.edge_prob, seed))
    elif args.chain is not None:
        p = chain(args.chain)
        text = format_poset(len(p), p.edges())
    elif args.antichain is not None:
        text = format_poset(args.antichain, [])
    elif args.random_graph is not None:
        n = args.random_graph
        edges = random_bounded_graph(n, args.max_degree, args.edge_attempts or 4 * n, seed)
        text = format_poset(n, edges)
    else:
        raise UsageError("gen needs one of --random-dag, --chain, --antichain, --random-graph")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sort(args) -> int:
    seed = _seed(args)
    cfg = _sorter_config(args)
    poset = _load_poset(args)
    f = _load_labels(args, poset, seed)
    run_cfg = RunConfig(sorter=cfg)
    doc = {"command": "sort", "seed": seed, "config_hash": run_cfg.digest(), "poset": _poset_summary(poset)}
    if args.glob:
        labels = global_sort(poset, f, args.matcher, seed, cfg).labels
        doc["engine"] = "global"
        doc["labels"] = labels
        doc.update(_readout_checks(poset, f, labels))
        _log_run("sort", seed, run_cfg, {"label_probes": f.probes})
        _emit(doc)
        return 0
    doc["engine"] = "local"
    doc["tau"] = stage_tau(poset, cfg)
    if args.all:
        sorter = LocalSorter(poset, f, seed, cfg)
        labels = sorter.readout()
        doc["labels"] = labels
        doc.update(_readout_checks(poset, f, labels))
        if args.global_check:
            ref = global_sort(poset, f, "lca", seed, cfg).labels
            doc["global_check"] = {"matcher": "lca", "agree": ref == labels}
        totals = sorter.report(-1, -1).as_dict()
        probes = {k: totals[k] for k in ("poset_probes", "label_probes", "tape_bits")}
        reports = [dict(totals, element=None, value=None)]
    else:
        if not args.query:
            raise UsageError("sort needs --query X (repeatable) or --all")
        values, reports = {}, []
        for x in args.query:
            if x not in poset:
                raise UsageError(f"element {x} is not in the poset")
            rep = probe_query(poset, f, x, seed, cfg)
            values[str(x)] = rep.value
            reports.append(rep.as_dict())
        doc["values"] = values
        probes = {k: sum(r[k] for r in reports) for k in ("poset_probes", "label_probes", "tape_bits")}
    doc["probes"] = probes
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "seed": seed, "queries": reports}, fh, sort_keys=True, indent=1)
    _log_run("sort", seed, run_cfg, probes)
    _emit(doc)
    return 0


def _readout_checks(poset, f, labels) -> dict:
    out = {
        "monotone": is_monotone(poset, labels),
        "ones_preserved": count_ones(poset, f) == sum(labels),
        "distance_to_input": _ratio(labeling_distance(poset, f, labels)),
    }
    if len(poset) <= EXACT_OPT_LIMIT:
        out["opt"] = _ratio(distance_to_monotone_exact(poset, f))
    return out


def cmd_correct(args) -> int:
    seed = _seed(args)
    cfg = _sorter_config(args)
    poset = _load_poset(args)
    f = _load_labels(args, poset, seed)
    labels, used, failures = correct_all(poset, f, seed, cfg, engine=args.engine, max_retries=TesterConfig().max_retries)
    run_cfg = RunConfig(sorter=cfg)
    doc = {
        "command": "correct",
        "seed": seed,
        "seed_used": used,
        "stage_failures": failures,
        "config_hash": run_cfg.digest(),
        "engine": args.engine,
        "poset": _poset_summary(poset),
        "labels": labels,
    }
    doc.update(_readout_checks(poset, f, labels))
    _log_run("correct", seed, run_cfg, {"label_probes": f.probes})
    _emit(doc)
    return 0


def _graph_and_tape(args, seed: int):
    graph = read_graph(args.graph)
    mode, k = ("kwise", args.exact_kwise) if args.exact_kwise else ("prf", 16)
    return graph, RandomTape(seed, mode, k), RunConfig(sorter=replace(SorterConfig(), tape_mode=mode, kwise=k))


def cmd_mis(args) -> int:
    seed = _seed(args)
    graph, tape, run_cfg = _graph_and_tape(args, seed)
    tau = args.tau or default_tau(graph.degree_bound)
    lca = MISLCA(graph, tape, tau, 0, None if args.no_cap else args.max_component)
    targets = list(graph.vertices) if args.all or not args.query else args.query
    members = {v: int(lca.member(v)) for v in targets}
    probes = {"neighbor_probes": graph.probes, "tape_bits": 64 * tape.reads}
    doc = {"command": "mis", "seed": seed, "config_hash": run_cfg.digest(), "tau": tau, "probes": probes, "largest_undecided_component": lca.largest_component}
    if args.all or not args.query:
        doc["members"] = sorted(v for v, b in members.items() if b)
    else:
        doc["values"] = {str(v): b for v, b in members.items()}
    _log_run("mis", seed, run_cfg, probes)
    _emit(doc)
    return 0


def cmd_match(args) -> int:
    seed = _seed(args)
    graph, tape, run_cfg = _graph_and_tape(args, seed)
    lca = MatchingLCA(graph, tape, args.tau, 0, None if args.no_cap else args.max_component)
    targets = list(graph.vertices) if args.all or args.vertex is None else args.vertex
    partners = {v: lca.partner(v) for v in targets}
    probes = {"neighbor_probes": graph.probes, "tape_bits": 64 * tape.reads}
    _log_run("match", seed, run_cfg, probes)
    if args.json:
        _emit({"command": "match", "seed": seed, "config_hash": run_cfg.digest(), "tau": lca.tau, "partners": {str(v): p for v, p in partners.items()}, "probes": probes})
    else:
        sys.stdout.write("".join(f"{v} {p}\n" for v, p in partners.items()))
    return 0


def cmd_test_mono(args) -> int:
    seed = _seed(args)
    cfg = _sorter_config(args)
    tcfg = TesterConfig()
    run_cfg = RunConfig(sorter=cfg, tester=tcfg)
    if args.poset is not None:
        poset = read_poset(args.poset)
        f = _load_labels(args, poset, seed)
        verdict = tolerant_test_poset(poset, f, args.eps, None, args.trials_delta, seed, tcfg, cfg, args.engine)
        domain = {"poset": _poset_summary(poset)}
    else:
        if args.n is None or args.function is None:
            raise UsageError("test-mono needs --n and --function (or --poset with labels)")
        fn = cube_function(args.function, args.n, seed)
        verdict = tolerant_test_cube(args.n, fn, args.eps, args.trials_delta, seed, tcfg, cfg, args.engine)
        domain = {"n": args.n, "function": args.function}
    doc = {"command": "test-mono", "seed": seed, "config_hash": run_cfg.digest(), "eps": args.eps, "engine": args.engine, **domain, **verdict.as_dict()}
    _log_run("test-mono", seed, run_cfg, {"samples": verdict.samples_used})
    _emit(doc)
    return 0 if verdict.accepted else 1


def cmd_learn(args) -> int:
    seed = _seed(args)
    lcfg = LearnerConfig()
    cfg = _sorter_config(args)
    run_cfg = RunConfig(sorter=cfg, learner=lcfg)
    n = args.n
    g = cube_function(args.target, n, seed)
    m = args.samples or recommended_samples(n, args.eps, lcfg)
    samples = draw_samples(g, n, m, derive_seed(seed, 0x5A), args.noise)
    learn = learn_monotone_agnostic if args.agnostic else learn_monotone_proper
    out = learn(samples, n, args.eps, seed, lcfg, cfg, args.engine)
    doc = {"command": "learn", "seed": seed, "config_hash": run_cfg.digest(), "target": args.target, "samples": m, "noise": args.noise, "agnostic": args.agnostic, **out.summary()}
    if out.table is not None:
        truth = np.fromiter((g(x) for x in range(1 << n)), dtype=np.int8, count=1 << n)
        dist = float(np.mean(out.table != truth))
        doc["error_vs_target"] = dist
        # error against labels flipped independently with probability noise
        doc["error_vs_noisy"] = args.noise + (1 - 2 * args.noise) * dist
        doc["improper_error_vs_target"] = float(np.mean(out.improper.values != truth))
    _log_run("learn", seed, run_cfg, {"samples": m})
    _emit(doc)
    return 0


def bench_cell(n: int, eps: float, function: str, queries: int, seed: int, cfg: SorterConfig) -> dict:
    """Cold-cache probe counts for sampled queries on the truncated cube."""
    band = truncated_hypercube(n, eps)
    fn = cube_function(function, n, derive_seed(seed, n))
    f = oracle_on(band, fn)
    rng = np.random.default_rng(derive_seed(seed, n, 1))
    picks = sorted(int(x) for x in rng.choice(len(band), size=min(queries, len(band)), replace=False))
    rows = []
    for x in picks:
        f.reset()
        rows.append(probe_query(band, f, x, seed, cfg).as_dict())
    stages = []
    n_stages = len(rows[0]["stage_breakdown"]) if rows else 0
    for i in range(n_stages):
        per = [r["stage_breakdown"][i] for r in rows]
        stages.append(
            {
                "stage": i,
                "k": per[0]["k"],
                "max_label_evals": max(p["label_evals"] for p in per),
                "mean_label_evals": sum(p["label_evals"] for p in per) / len(per),
                "max_partner_queries": max(p["partner_queries"] for p in per),
                "mean_partner_queries": sum(p["partner_queries"] for p in per) / len(per),
                "max_line_vertices_simulated": max(p["line_vertices_simulated"] for p in per),
            }
        )
    # partner queries needed at stage i per query at stage i+1: the recursion's fan-out
    for a, b in zip(stages, stages[1:]):
        a["blowup_from_next"] = a["mean_partner_queries"] / b["mean_partner_queries"] if b["mean_partner_queries"] else None
    worst = max((r["label_probes"] + r["poset_probes"] for r in rows), default=0)
    return {
        "n": n,
        "eps": eps,
        "function": function,
        "elements": len(band),
        "weights": [band.lo, band.hi],
        "height": band.height,
        "degree_bound": band.degree_bound,
        "tau": stage_tau(band, cfg),
        "queries": rows,
        "max_label_probes": max((r["label_probes"] for r in rows), default=0),
        "max_poset_probes": max((r["poset_probes"] for r in rows), default=0),
        "max_label_probes_below_elements": all(r["label_probes"] < len(band) for r in rows),
        "worst_total_probes": worst,
        "stage_table": stages,
    }


def cmd_bench(args) -> int:
    seed = _seed(args)
    cfg = _sorter_config(args)
    run_cfg = RunConfig(sorter=cfg)
    ns = [int(v) for v in args.n.split(",")]
    cells = [bench_cell(n, args.eps, args.function, args.queries, seed, cfg) for n in ns]
    _log_run("bench", seed, run_cfg, {str(c["n"]): c["max_label_probes"] for c in cells})
    if args.format == "csv":
        sys.stdout.write("n,elements,element,value,label_probes,poset_probes,tape_bits\n")
        for c in cells:
            for r in c["queries"]:
                sys.stdout.write(f"{c['n']},{c['elements']},{r['element']},{r['value']},{r['label_probes']},{r['poset_probes']},{r['tape_bits']}\n")
    else:
        _emit({"command": "bench", "seed": seed, "config_hash": run_cfg.digest(), "cells": cells})
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "seed": seed, "cells": cells}, fh, sort_keys=True, indent=1)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="poset-lca", description="Local sorting of 0/1 labels on posets and its applications.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log run details to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a poset or graph file")
    p.add_argument("--random-dag", type=int, metavar="N")
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--chain", type=int, metavar="N")
    p.add_argument("--antichain", type=int, metavar="N")
    p.add_argument("--random-graph", type=int, metavar="N")
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--edge-attempts", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sort", help="sorted labels at queried elements")
    _add_poset_args(p)
    _add_sorter_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--query", type=int, action="append")
    p.add_argument("--all", action="store_true")
    p.add_argument("--global", dest="glob", action="store_true", help="run every stage over the whole poset")
    p.add_argument("--matcher", default="lca", choices=["lca", "greedy", "shuffled", "adversarial"], help="matcher for --global")
    p.add_argument("--global-check", action="store_true", help="with --all, compare against the global run on the same seed")
    p.add_argument("--report", help="write per-query probe report JSON here")
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("correct", help="monotone correction of a whole labeling")
    _add_poset_args(p)
    _add_sorter_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", default="local", choices=["local", "global"])
    p.set_defaults(func=cmd_correct)

    for name, func in (("mis", cmd_mis), ("match", cmd_match)):
        p = sub.add_parser(name, help=f"{'maximal independent set' if name == 'mis' else 'maximal matching'} LCA on a graph file")
        p.add_argument("--graph", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tau", type=int)
        p.add_argument("--exact-kwise", type=int, metavar="K")
        p.add_argument("--max-component", type=int, default=SorterConfig().max_component)
        p.add_argument("--no-cap", action="store_true")
        p.add_argument("--all", action="store_true")
        if name == "mis":
            p.add_argument("--query", type=int, action="append")
        else:
            p.add_argument("--vertex", type=int, action="append")
            p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("test-mono", help="tolerant monotonicity test")
    p.add_argument("--n", type=int)
    p.add_argument("--function")
    p.add_argument("--poset")
    p.add_argument("--labels")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials-delta", type=float)
    p.add_argument("--engine", default="local", choices=["local", "global"])
    p.add_argument("--seed", type=int, default=0)
    _add_sorter_args(p)
    p.set_defaults(func=cmd_test_mono, hypercube=None, truncated=None)

    p = sub.add_parser("learn", help="proper monotone learner")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--agnostic", action="store_true")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--samples", type=int)
    p.add_argument("--engine", default="local", choices=["local", "global"])
    p.add_argument("--seed", type=int, default=0)
    _add_sorter_args(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("bench", help="per-query probe counts on truncated cubes")
    p.add_argument("--n", default="10,12,14", help="comma-separated dimensions")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--function", default="majority+flip:0.01")
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--report")
    _add_sorter_args(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, PosetError, SizeError, ValueError, KeyError, OSError) as exc:
        print(f"poset-lca {args.command}: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        print(f"poset-lca {args.command}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
