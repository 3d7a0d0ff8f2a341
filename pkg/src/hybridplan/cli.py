"""Command-line front end: planarity tests, differential fuzzing, benchmark.

Exit codes: 0 planar, 1 not planar, 2 input/usage error, 3 precondition
violated (e.g. frame graph not biconnected).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from dataclasses import dataclass, field

from .errors import (
    INFEASIBLE,
    BudgetExceeded,
    FrameNotBiconnected,
    HybridPlanError,
    NotBiconnected,
)
from . import generators, hybrid, oracle, svg
from .graph import clustered_from_json, clustered_to_json, graph_from_json
from .onefixed import OneFixedConstraint, test_one_fixed_planarity
from .simfpq import instance_from_json

log = logging.getLogger("hybridplan")

EXIT_PLANAR = 0
EXIT_NOT_PLANAR = 1
EXIT_INPUT_ERROR = 2
EXIT_PRECONDITION = 3


@dataclass
class RunReport:
    verdict: str  # planar | not-planar | error
    timings_ms: dict[str, float] = field(default_factory=dict)
    stats: dict[str, object] = field(default_factory=dict)
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "timingsMs": {k: round(v, 3) for k, v in sorted(
                self.timings_ms.items())},
            "stats": dict(sorted(self.stats.items())),
            "seed": self.seed,
        }


def _budget_from_args(args) -> oracle.OracleBudget:
    return oracle.OracleBudget(
        max_clusters=args.budget_clusters,
        max_cluster_size=args.budget_cluster_size,
        max_edges=args.budget_edges,
        max_states=args.budget_states,
    )


def _witness_json(w: hybrid.Witness) -> dict:
    return {
        "frameRotation": {
            str(v): list(order) for v, order in sorted(w.frame_rotation.items())
        },
        "clusters": [
            {
                "id": layout.cluster,
                "sigma": layout.sigma,
                "sideOrders": {
                    str(s): [[v, list(es)] for v, es in runs]
                    for s, runs in sorted(layout.side_orders.items())
                },
                "pairOrders": {
                    f"{s1}-{s2}": list(perm)
                    for (s1, s2), perm in sorted(layout.pair_orders.items())
                },
            }
            for layout in sorted(w.clusters, key=lambda c: c.cluster)
        ],
        "expandedGraph": {
            "vertices": list(w.expanded.vertices),
            "edges": [{"id": e, "u": u, "v": v} for e, u, v in w.expanded.edges],
            "rotation": {
                str(v): list(order)
                for v, order in sorted(w.expanded_rotation.items())
            },
        },
    }


def _emit(args, report: RunReport, witness=None) -> None:
    if args.witness and witness is not None:
        with open(args.witness, "w") as fh:
            json.dump(_witness_json(witness), fh, sort_keys=True, indent=1)
            fh.write("\n")
    if args.svg and witness is not None:
        with open(args.svg, "w") as fh:
            fh.write(svg.render(witness))
    if args.format == "json":
        print(json.dumps(report.to_json(), sort_keys=True))
    else:
        print(f"verdict: {report.verdict}")
        for stage, ms in sorted(report.timings_ms.items()):
            print(f"  {stage}: {ms:.1f} ms")


def _load_clustered(path: str):
    with open(path) as fh:
        return clustered_from_json(json.load(fh))


def _run_hybrid(args, tester, oracle_fn) -> int:
    try:
        fcg = _load_clustered(args.input)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read instance: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    report = RunReport("error")
    report.stats["n"] = len(fcg.graph.vertices)
    report.stats["clusters"] = len(fcg.cluster_vertices())
    try:
        t0 = time.perf_counter()
        if args.oracle:
            verdict = oracle_fn(fcg, budget=_budget_from_args(args))
            report.timings_ms["oracle"] = (time.perf_counter() - t0) * 1e3
            report.verdict = "planar" if verdict else "not-planar"
            _emit(args, report)
            return EXIT_PLANAR if verdict else EXIT_NOT_PLANAR
        result = tester(fcg)
        report.timings_ms["test"] = (time.perf_counter() - t0) * 1e3
    except FrameNotBiconnected as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except HybridPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if result is INFEASIBLE:
        report.verdict = "not-planar"
        _emit(args, report)
        return EXIT_NOT_PLANAR
    report.verdict = "planar"
    report.stats["expandedVertices"] = len(result.expanded.vertices)
    _emit(args, report, witness=result)
    return EXIT_PLANAR


def _cmd_test_constrained(args) -> int:
    try:
        with open(args.input) as fh:
            data = json.load(fh)
        g = graph_from_json(data["graph"])
        constraints = {}
        for key, cdata in data.get("constraints", {}).items():
            inst = instance_from_json(cdata)
            constraints[int(key)] = OneFixedConstraint(inst, cdata["source"])
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read instance: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    report = RunReport("error")
    try:
        t0 = time.perf_counter()
        rot = test_one_fixed_planarity(g, constraints)
        report.timings_ms["test"] = (time.perf_counter() - t0) * 1e3
    except NotBiconnected as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except HybridPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if rot is INFEASIBLE:
        report.verdict = "not-planar"
        _emit(args, report)
        return EXIT_NOT_PLANAR
    report.verdict = "planar"
    report.stats["rotation"] = {
        str(v): list(order) for v, order in sorted(rot.items())
    }
    _emit(args, report)
    return EXIT_PLANAR


# ---------------------------------------------------------------------------
# Differential fuzzing
# ---------------------------------------------------------------------------


def _fuzz_kind(kind: str):
    if kind == "rcint":
        return (generators.random_nodetrix_instance, hybrid.test_rci_nt,
                oracle.oracle_rci)
    if kind == "polylink":
        return (generators.random_polylink_instance, hybrid.test_polylink,
                oracle.oracle_polylink)
    raise ValueError(kind)


def _minimize(fcg, disagrees) -> object:
    """Greedily drop inter-cluster edges while the disagreement persists."""
    from .graph import FlatClusteredGraph, Graph

    current = fcg
    improved = True
    while improved:
        improved = False
        inter = [e for e, _, _ in current.graph.edges
                 if current.is_inter_cluster(e)]
        for drop in inter:
            edges = tuple(t for t in current.graph.edges if t[0] != drop)
            g = Graph(current.graph.vertices, edges)
            sides = tuple(s for s in current.sides if s.edge != drop)
            cand = FlatClusteredGraph(g, current.clusters, sides,
                                      current.polylink)
            try:
                if disagrees(cand):
                    current = cand
                    improved = True
                    break
            except HybridPlanError:
                continue
    return current


def _cmd_fuzz(args) -> int:
    gen, tester, oracle_fn = _fuzz_kind(args.kind)
    rng = random.Random(args.seed)
    budget = _budget_from_args(args)

    from .errors import InternalError

    def disagrees(fcg) -> bool:
        try:
            want = oracle_fn(fcg, budget=budget)
        except BudgetExceeded:
            return False
        try:
            got = tester(fcg)
        except FrameNotBiconnected:
            return False
        except InternalError:
            return True  # a loud invariant failure is a finding too
        return (got is not INFEASIBLE) != want

    done = 0
    skipped = 0
    t0 = time.perf_counter()
    while done < args.trials:
        fcg = gen(rng, max_clusters=budget.max_clusters,
                  max_cluster_size=budget.max_cluster_size,
                  max_edges=budget.max_edges)
        try:
            want = oracle_fn(fcg, budget=budget)
        except BudgetExceeded:
            skipped += 1
            continue
        try:
            got = tester(fcg)
            bad = (got is not INFEASIBLE) != want
        except InternalError:
            bad = True
        if bad:
            small = _minimize(fcg, disagrees)
            path = args.out or "fuzz-counterexample.json"
            with open(path, "w") as fh:
                json.dump(clustered_to_json(small), fh, sort_keys=True,
                          indent=1)
            print(f"DISAGREEMENT after {done} trials; reproducer: {path}")
            return 1
        done += 1
    dt = time.perf_counter() - t0
    print(f"{done} trials, 0 disagreements, {skipped} skipped "
          f"(over budget), {dt:.1f}s, seed {args.seed}")
    return 0


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------


def _cmd_bench(args) -> int:
    family = generators.BENCH_FAMILIES.get(args.family)
    if family is None:
        print(f"error: unknown family {args.family!r}; choose from "
              f"{sorted(generators.BENCH_FAMILIES)}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    sizes = []
    n = 8
    while n <= args.max:
        sizes.append(n)
        n *= 2
    rows = []
    print("n,ms")
    for n in sizes:
        fcg = family(n)
        t0 = time.perf_counter()
        hybrid.test_rci_nt(fcg)
        ms = (time.perf_counter() - t0) * 1e3
        rows.append((n, ms))
        print(f"{n},{ms:.2f}")
    if len(rows) >= 2:
        import numpy as np

        xs = np.log([r[0] for r in rows])
        ys = np.log([max(r[1], 1e-3) for r in rows])
        slope = float(np.polyfit(xs, ys, 1)[0])
        print(f"# fitted log-log slope: {slope:.3f}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--witness", help="write the witness JSON here")
    p.add_argument("--svg", help="write an SVG rendering here")
    p.add_argument("--oracle", action="store_true",
                   help="decide by the brute-force oracle (size-guarded)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_budget(p)


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-clusters", type=int, default=4)
    p.add_argument("--budget-cluster-size", type=int, default=3)
    p.add_argument("--budget-edges", type=int, default=8)
    p.add_argument("--budget-states", type=int, default=10_000_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridplan",
        description="constrained and hybrid planarity testing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test-constrained",
                       help="1-fixed constrained planarity of a plain graph")
    p.add_argument("input", help="JSON file with graph and constraints")
    _add_common(p)
    p.set_defaults(func=_cmd_test_constrained)

    for name, tester, ofn in (
        ("test-rcint", hybrid.test_rci_nt, oracle.oracle_rci),
        ("test-polylink", hybrid.test_polylink, oracle.oracle_polylink),
        ("test-clique", hybrid.test_clique_planarity_fixed_sides, None),
    ):
        p = sub.add_parser(name)
        p.add_argument("input", help="clustered graph JSON file")
        _add_common(p)

        def runner(args, tester=tester, ofn=ofn):
            if ofn is None and args.oracle:
                def clique_oracle(fcg, budget):
                    return oracle.oracle_polylink(
                        hybrid.clique_to_polylink(fcg), budget=budget)
                return _run_hybrid(args, tester, clique_oracle)
            return _run_hybrid(args, tester, ofn)

        p.set_defaults(func=runner)

    p = sub.add_parser("fuzz", help="differential test vs the oracle")
    p.add_argument("--kind", choices=("rcint", "polylink"), default="rcint")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="counterexample path")
    _add_budget(p)
    p.set_defaults(func=_cmd_fuzz)

    p = sub.add_parser("bench", help="scaling benchmark, CSV of (n, ms)")
    p.add_argument("--family", default="cycle-of-clusters")
    p.add_argument("--max", type=int, default=64)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("HYBRIDPLAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
