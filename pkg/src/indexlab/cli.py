"""indexlab command line: build, check, solve and simulate, reporting JSON.

Exit codes: 0 success, 1 a verification failed, 2 bad input or usage,
3 a search budget ran out.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import extensions, graph as graphs, indexcode, minrank as mr, ramsey, selftest
from .gf import parse_field_spec
from .graph import BudgetExhausted, Graph
from .matrix import FFMatrix, rank

EXIT_OK, EXIT_FAILED, EXIT_BAD_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class VerificationFailed(Exception):
    """Carries a report whose check did not pass."""

    def __init__(self, results: dict):
        super().__init__("verification failed")
        self.results = results


class OutOfBudget(Exception):
    """Carries the best result found before the search budget ran out."""

    def __init__(self, results: dict):
        super().__init__("budget exhausted")
        self.results = results


class Run:
    """Collects digests of every file read plus counters for the report."""

    def __init__(self) -> None:
        self.inputs: dict[str, str] = {}
        self.counters: dict[str, int] = {}

    def read_json(self, path: str):
        data = Path(path).read_bytes()
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return json.loads(data)

    def graph(self, path: str) -> Graph:
        return Graph.from_json(self.read_json(path))

    def matrix(self, path: str, field: str | None = None) -> FFMatrix:
        m = FFMatrix.from_json(self.read_json(path))
        if field is not None and parse_field_spec(field) != m.field:
            raise ValueError(f"matrix is over GF({m.field}), flag says GF({field})")
        return m


def write_json(path: str, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True) + "\n")


# -- subcommands ------------------------------------------------------------------------

def cmd_construct(args, run: Run) -> dict:
    if args.epsilon is not None:
        params = ramsey.find_params(args.p, args.q, Fraction(args.epsilon))
    else:
        if args.k is None or args.l is None:
            raise ValueError("give --k and --l, or --epsilon")
        params = ramsey.RamseyParams.from_exponents(args.p, args.q, args.k, args.l)
    inst = ramsey.build_ramsey_graph(params, args.r, vertex_cap=args.vertex_cap, graph_cap=args.graph_cap)
    out = {"params": inst.params.to_json(), "n": inst.n}
    if args.rank_only:
        d = inst.params.pk - 1
        out["rank_p_M"] = ramsey.inclusion_rank(inst.r, inst.s, d, parse_field_spec(str(inst.params.p)))
        out["rank_bound"] = math.comb(inst.r, d)
        return out
    pq = ramsey.build_PQ(inst)
    rep = ramsey.verify_construction(inst, pq)
    out["verification"] = rep.to_json()
    written = []
    if args.emit_graph:
        write_json(args.emit_graph, inst.graph.to_json())
        written.append(args.emit_graph)
    if args.emit_matrices:
        d = Path(args.emit_matrices)
        d.mkdir(parents=True, exist_ok=True)
        for name, obj in (("graph.json", inst.graph), ("P.json", pq.P), ("Q.json", pq.Q)):
            write_json(str(d / name), obj.to_json())
            written.append(str(d / name))
    if written:
        out["written"] = sorted(written)
    if not rep.passed:
        raise VerificationFailed(out)
    return out


def cmd_minrank(args, run: Run) -> dict:
    g = run.graph(args.graph)
    f = parse_field_spec(args.field)
    if args.method == "bounds":
        b = mr.minrank_bounds(g)
        return {"field": str(f), **b.to_json()}
    res = mr.exact_minrank(g, f, args.budget, use_bounds=not args.no_bounds)
    run.counters["search_nodes"] = res.nodes
    out = {"field": str(f), **res.to_json()}
    if args.witness:
        write_json(args.witness, res.witness.to_json())
    if not res.optimal:
        raise OutOfBudget(out)
    return out


def cmd_ell(args, run: Run) -> dict:
    g = run.graph(args.graph)
    if args.method == "confusion":
        res = indexcode.exact_ell(g, cap=args.max_n, budget=args.budget)
        return {"method": "confusion", "ell": res.value, "colors_used": max(res.coloring) + 1}
    if args.method == "linear":
        res = indexcode.exact_linear_ell(g, n_cap=min(args.max_n, 4))
        return {"method": "linear", "ell": res.value, "encoder_rows": res.encoder}
    b = mr.minrank_bounds(g)
    return {"method": "bounds", "lower": b.lower, "upper": b.upper, "alpha": b.alpha, "mais": b.mais}


def cmd_verify(args, run: Run) -> dict:
    g = run.graph(args.graph)
    m = run.matrix(args.matrix, args.field)
    bad = mr.represents_check(m, g)
    out = {"field": str(m.field), "n": g.n, "rank": rank(m), "violations": len(bad),
           "first_violations": [v._asdict() for v in bad[:10]]}
    if args.complement_matrix:
        q = run.matrix(args.complement_matrix)
        qbad = mr.represents_check(q, graphs.complement(g))
        out["complement"] = {"field": str(q.field), "rank": rank(q), "violations": len(qbad)}
        if q.rows and out["complement"]["rank"]:
            out["complement"]["minrank_lower_bound"] = -(-g.n // out["complement"]["rank"])
        bad = bad + qbad
    if bad:
        raise VerificationFailed(out)
    return out


def cmd_code(args, run: Run) -> dict:
    g = run.graph(args.graph)
    m = run.matrix(args.matrix, args.field)
    code = indexcode.code_from_matrix(g, m)
    out = {"field": str(m.field), "rank": code.rank, "length_bits": code.length_bits}
    if args.encode is not None:
        res = indexcode.run_protocol(code, args.encode, trace=args.trace)
        out["codeword"] = res.transcript["codeword"]
        if args.trace:
            out["transcript"] = res.transcript
    if args.decode is not None:
        if args.receiver is None or args.side is None:
            raise ValueError("--decode needs --receiver and --side")
        side = [int(c) for c in args.side]
        out["decoded"] = code.decode(args.receiver, args.decode, side)
    if args.simulate:
        sim = indexcode.simulate(code, args.trials, args.seed)
        out["simulation"] = sim
        if sim["failures"]:
            raise VerificationFailed(out)
    return out


def cmd_graph(args, run: Run) -> dict:
    gs = [run.graph(p) for p in args.graph]
    op = args.op
    if op == "info":
        g = gs[0]
        out = {"n": g.n, "edges": g.num_edges(), "undirected": g.is_undirected()}
        if g.n <= graphs.DEFAULT_ALPHA_CAP:
            out["alpha"] = graphs.independence_number(g)
        if g.n <= graphs.DEFAULT_MAIS_CAP:
            out["mais"] = graphs.mais(g)
        if g.n <= graphs.DEFAULT_COVER_CAP:
            out["clique_cover"] = graphs.clique_cover_number(g)
        return out
    if op == "complement":
        res = graphs.complement(gs[0])
    elif op == "reverse":
        res = gs[0].reverse()
    elif op in ("strong", "product"):
        if len(gs) != 2:
            raise ValueError("strong product takes exactly two graphs")
        res = graphs.strong_product(*gs)
    elif op == "blowup":
        res = graphs.blow_up(gs[0], args.t)
    elif op == "compose":
        res = graphs.compose(gs)
    elif op == "union":
        res = graphs.disjoint_union(gs)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(op)
    if args.write:
        write_json(args.write, res.to_json())
    return {"op": op, "graph": res.to_json()}


def cmd_p4(args, run: Run) -> dict:
    inst = extensions.P4Instance.from_json(run.read_json(args.instance))
    f = parse_field_spec(args.field)
    g_ind, g_cl = extensions.build_gind_gcl(inst)
    if args.action == "bounds":
        return {"m": inst.m, "n": inst.n, "field": str(f),
                "minrank_g_cl": mr.minrank(g_cl, f, args.budget),
                "minrank_g_ind": mr.minrank(g_ind, f, args.budget),
                "g_ind": g_ind.to_json(), "g_cl": g_cl.to_json()}
    res = extensions.p4_minrank(inst, f, args.budget)
    run.counters["search_nodes"] = res.nodes
    out = {"m": inst.m, "n": inst.n, "field": str(f), **res.to_json()}
    if not res.optimal:
        raise OutOfBudget(out)
    return out


def cmd_selftest(args, run: Run) -> dict:
    numbers = selftest.ALL_CHECKS if args.all else (
        tuple(int(x) for x in args.checks.split(",")) if args.checks else selftest.DEFAULT_CHECKS)
    unknown = [k for k in numbers if k not in selftest.CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}")
    results = selftest.run_selftest(numbers, args.inject_fault, args.threads)
    for r in results:
        print(r.line(), file=sys.stderr)
    out = {"checks": [r.to_json() for r in results], "passed": all(r.passed for r in results)}
    if args.inject_fault:
        out["injected_fault"] = args.inject_fault
    run.timing_extra = {f"check_{r.number}": round(r.seconds, 3) for r in results}
    if not out["passed"]:
        raise VerificationFailed(out)
    return out


# -- parser -----------------------------------------------------------------------------

def default_threads() -> int:
    env = os.environ.get("INDEXLAB_THREADS")
    if env:
        return int(env)
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="print a readable table instead of JSON")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: $INDEXLAB_THREADS or all cores)")

    p = argparse.ArgumentParser(prog="indexlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("construct", parents=[common], help="build and verify the set-system graph")
    s.add_argument("family", nargs="?", choices=("ramsey",), default="ramsey")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--epsilon", help="pick the smallest k with q^l < p^k < (1+epsilon) q^l")
    s.add_argument("--r", type=int, help="ground set size (default p^(3k))")
    s.add_argument("--vertex-cap", type=int, default=ramsey.DEFAULT_VERTEX_CAP)
    s.add_argument("--graph-cap", type=int, default=ramsey.DEFAULT_GRAPH_CAP)
    s.add_argument("--rank-only", action="store_true", help="only stream the rank of the GF(p) inclusion matrix")
    s.add_argument("--emit-graph", metavar="PATH", help="write the graph JSON here")
    s.add_argument("--emit-matrices", metavar="DIR", help="write graph.json, P.json and Q.json into DIR")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("minrank", parents=[common], help="exact minrank or its combinatorial bounds")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("-f", "--field", default="2")
    s.add_argument("--method", choices=("exact", "bounds"), default="exact")
    s.add_argument("--budget", type=int, default=mr.DEFAULT_BUDGET)
    s.add_argument("--no-bounds", action="store_true", help="search from rank 1 without combinatorial bounds")
    s.add_argument("-w", "--witness", help="write the witness matrix here")
    s.set_defaults(func=cmd_minrank)

    s = sub.add_parser("ell", parents=[common], help="optimal index code length")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("--method", choices=("confusion", "linear", "bounds"), default="confusion")
    s.add_argument("--max-n", type=int, default=indexcode.DEFAULT_ELL_CAP)
    s.add_argument("--budget", type=int, default=5_000_000)
    s.set_defaults(func=cmd_ell)

    s = sub.add_parser("verify", parents=[common], help="check that a matrix represents a graph")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("-f", "--field")
    s.add_argument("--complement-matrix", help="also check this matrix against the complement")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("code", parents=[common], help="linear index code from a representing matrix")
    s.add_argument("-g", "--graph", required=True)
    s.add_argument("-m", "--matrix", required=True)
    s.add_argument("-f", "--field")
    s.add_argument("--encode", metavar="BITSTRING")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--decode", metavar="CODEWORD")
    s.add_argument("--receiver", type=int)
    s.add_argument("--side", metavar="BITS", help="side bits in increasing neighbour order")
    s.add_argument("--simulate", action="store_true")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_code)

    s = sub.add_parser("graph", parents=[common], help="graph operations")
    s.add_argument("op", choices=("info", "complement", "reverse", "strong", "product", "blowup", "compose", "union"))
    s.add_argument("-g", "--graph", action="append", required=True, help="repeat for multi-graph ops")
    s.add_argument("--t", type=int, default=2, help="blow-up factor")
    s.add_argument("-w", "--write", help="write the resulting graph here")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("p4", parents=[common], help="shared-request instances")
    s.add_argument("action", choices=("minrank", "bounds"))
    s.add_argument("-i", "--instance", required=True)
    s.add_argument("-f", "--field", default="2")
    s.add_argument("--budget", type=int, default=mr.DEFAULT_BUDGET)
    s.set_defaults(func=cmd_p4)

    s = sub.add_parser("selftest", parents=[common], help="run the certified checks")
    s.add_argument("--checks", help="comma-separated check numbers")
    s.add_argument("--all", action="store_true", help="run every check, including the slow ones")
    s.add_argument("--inject-fault", choices=selftest.FAULTS)
    s.set_defaults(func=cmd_selftest)
    return p


def render_pretty(report: dict) -> str:
    lines = [f"indexlab {report['command'][0] if report['command'] else ''}  status={report['status']}"]

    def walk(prefix: str, obj) -> None:
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            for i, item in enumerate(obj):
                walk(f"{prefix}[{i}]", item)
        else:
            text = json.dumps(obj)
            lines.append(f"  {prefix:<40} {text if len(text) < 80 else text[:77] + '...'}")

    walk("", report["results"])
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    if args.threads is None:
        args.threads = default_threads()
    run = Run()
    run.timing_extra = {}
    start = time.perf_counter()
    status, code, results = "ok", EXIT_OK, {}
    try:
        results = args.func(args, run)
    except VerificationFailed as exc:
        status, code, results = "verification-failed", EXIT_FAILED, exc.results
    except indexcode.ProtocolFailure as exc:
        status, code, results = "verification-failed", EXIT_FAILED, {"error": str(exc)}
    except OutOfBudget as exc:
        status, code, results = "budget-exhausted", EXIT_BUDGET, exc.results
    except BudgetExhausted as exc:
        status, code = "budget-exhausted", EXIT_BUDGET
        results = {"error": str(exc), "nodes": exc.nodes}
    except (ValueError, KeyError, OSError) as exc:
        status, code, results = "bad-input", EXIT_BAD_INPUT, {"error": f"{type(exc).__name__}: {exc}"}
    report = {
        "report": {"command": argv, "inputs": run.inputs, "status": status, "exit_code": code,
                   "results": results, "counters": run.counters},
        "timing": {"wall_seconds": round(time.perf_counter() - start, 3), "threads": args.threads,
                   **run.timing_extra},
    }
    text = render_pretty(report["report"]) if args.pretty else json.dumps(report, sort_keys=True, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
