"""Command-line entry point: ``stalloc <command> [options]``.

Exit status is 0 on success, 1 when ``--strict`` is given and the result is a
negative domain answer (no unsplit stable assignment, a failed check, a failed
verification), and 2 on bad input. Diagnostics go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .errors import StallocError
from .fractional import solve_fractional_stable, with_dummy
from .io import (
    allocation_from_json,
    allocation_to_json,
    assignment_from_json,
    generate_instance,
    parse_instance,
    random_small_instances,
    serialize_instance,
)
from .model import (
    Allocation,
    Instance,
    StabilityMode,
    UnsplitAssignment,
    format_edge,
    stability_report,
    total_congestion,
    total_size,
)
from .oracle import DEFAULT_LIMIT, enumerate_relaxed_stable, verify_structure
from .rounding import round_to_unsplit
from .solvers import decide_unsplit_existence, solve_job_optimal, solve_machine_optimal


class UsageError(Exception):
    """Bad command-line input that is not an instance problem."""


def _common() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-i", "--input", default=argparse.SUPPRESS, help="instance file (default: stdin)")
    p.add_argument("-o", "--output", default=argparse.SUPPRESS, help="result file (default: stdout)")
    p.add_argument("--strict", action="store_true", default=argparse.SUPPRESS,
                   help="exit 1 on negative domain results")
    p.add_argument("--trace", action="store_true", default=argparse.SUPPRESS,
                   help="include the proposal log in the output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="stalloc", parents=[common],
                                     description="Relaxed unsplittable stable allocation solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="compute an assignment or allocation")
    p.add_argument("--algorithm", choices=("jopt", "mopt", "fractional", "round"), default="mopt")
    p.add_argument("--seed-allocation", metavar="FILE",
                   help="stable allocation to start rounding from (default: the fractional solver's)")
    p.add_argument("--through-dangerous", action="store_true",
                   help="let rounding paths continue through over-full machines with enough slack")

    sub.add_parser("decide", parents=[common], help="does a capacity-respecting unsplit stable assignment exist")

    p = sub.add_parser("check", parents=[common], help="check feasibility and stability of a solution")
    p.add_argument("--assignment", required=True, metavar="FILE")
    p.add_argument("--mode", choices=("fractional", "relaxed"), default="relaxed")

    p = sub.add_parser("enumerate", parents=[common], help="list all relaxed unsplit stable assignments")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    p = sub.add_parser("verify", parents=[common], help="check solver guarantees against brute force")
    p.add_argument("--random", type=int, metavar="N", help="verify N random small instances instead of -i")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=6)
    p.add_argument("--machines", type=int, default=4)
    p.add_argument("--max-quantity", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    p = sub.add_parser("gen", parents=[common], help="write a random instance")
    p.add_argument("--jobs", type=int, required=True)
    p.add_argument("--machines", type=int, required=True)
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--max-capacity", type=int, default=3)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _result(instance: Instance, x: UnsplitAssignment, counters: dict, trace=None) -> dict:
    out = {
        "assignment": x.as_dict(instance),
        "size": total_size(instance, x),
        "congestion": total_congestion(instance, x),
        "counters": counters,
    }
    if trace is not None:
        out["trace"] = [list(t) for t in trace]
    return out


def _cmd_solve(args, instance: Instance) -> tuple[dict, bool]:
    if args.algorithm in ("mopt", "jopt"):
        solve = solve_machine_optimal if args.algorithm == "mopt" else solve_job_optimal
        x, tr = solve(instance, trace=args.trace)
        return _result(instance, x, tr.counters(), tr.proposals if args.trace else None), True
    full = instance if instance.dummy_machine is not None else with_dummy(instance)
    if args.algorithm == "fractional":
        alloc = solve_fractional_stable(full)
        return {
            "allocation": allocation_to_json(alloc),
            "size": total_size(full, alloc),
            "congestion": total_congestion(full, alloc),
            "counters": {},
        }, True
    seed = None
    if args.seed_allocation:
        seed = allocation_from_json(full, _load_json(args.seed_allocation))
    log: list = []
    observer = (lambda a, rot: log.append([rot.kind.value, [format_edge(p) for p, _ in rot.steps]])) \
        if args.trace else None
    res = round_to_unsplit(full, seed, through_dangerous=args.through_dangerous, observer=observer)
    base = instance.without_dummy()
    return _result(base, res.assignment, {"augmentation_count": res.augmentation_count},
                   log if args.trace else None), True


def _cmd_decide(args, instance: Instance) -> tuple[dict, bool]:
    d = decide_unsplit_existence(instance)
    out: dict = {"exists": d.exists, "min_congestion": d.min_congestion}
    if d.exists:
        out["assignment"] = d.assignment.as_dict(instance.without_dummy())
    out["counters"] = d.trace.counters()
    return out, d.exists


def _cmd_check(args, instance: Instance) -> tuple[dict, bool]:
    data = _load_json(args.assignment)
    if args.mode == "relaxed":
        x = assignment_from_json(instance, data)
        mode = StabilityMode.RELAXED_UNSPLIT
    else:
        has_edges = any(":" in str(k) for k in data.get("allocation", data))
        x = allocation_from_json(instance, data) if has_edges else Allocation.from_assignment(
            instance, assignment_from_json(instance, data))
        mode = StabilityMode.FRACTIONAL
    rep = stability_report(instance, x, mode)
    out = {
        "mode": mode.value,
        "ok": rep.ok,
        "feasibility_violations": [v._asdict() for v in rep.feasibility_violations],
        "blocking_edges": [format_edge(e) for e in rep.blocking_edges],
    }
    return out, rep.ok


def _cmd_enumerate(args, instance: Instance) -> tuple[dict, bool]:
    base = instance.without_dummy()
    sols = enumerate_relaxed_stable(base, args.limit)
    rows = [_result(base, x, {}) for x in sols]
    for row in rows:
        del row["counters"]
    return {"count": len(rows), "solutions": rows}, True


def _verify_one(item: tuple[int, Instance, int]) -> tuple[int, dict[str, str], dict]:
    idx, instance, limit = item
    rep = verify_structure(instance, limit)
    failures = {n: {"detail": c.detail, "counterexample": c.counterexample}
                for n, c in rep.checks.items() if not c.passed}
    return idx, rep.summary(), failures


def _cmd_verify(args, instance: Instance | None) -> tuple[dict, bool]:
    if args.random is None:
        _, summary, failures = _verify_one((0, instance, args.limit))
        return {"checks": summary, "failures": failures}, not failures
    items = [(n, inst, args.limit) for n, inst in enumerate(random_small_instances(
        args.random, args.seed, args.jobs, args.machines, args.max_quantity))]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_verify_one, items, chunksize=8))
    else:
        results = [_verify_one(it) for it in items]
    passed: dict[str, int] = {}
    failed = []
    for idx, summary, failures in sorted(results, key=lambda r: r[0]):
        for name, verdict in summary.items():
            passed[name] = passed.get(name, 0) + (verdict == "pass")
        if failures:
            failed.append({"instance": idx, "instance_json": items[idx][1].to_raw(), "failures": failures})
    return {"instances": len(items), "passed": passed, "failures": failed}, not failed


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    for name in ("input", "output"):
        setattr(args, name, getattr(args, name, None))
    for name in ("strict", "trace"):
        setattr(args, name, getattr(args, name, False))

    try:
        if args.command == "gen":
            inst = generate_instance(args.jobs, args.machines, args.max_size, args.max_capacity,
                                     args.density, args.seed)
            _emit(serialize_instance(inst), args.output, stdout)
            return 0
        instance = None
        if not (args.command == "verify" and args.random is not None):
            instance = parse_instance(_read(args.input))
        handler = {
            "solve": _cmd_solve,
            "decide": _cmd_decide,
            "check": _cmd_check,
            "enumerate": _cmd_enumerate,
            "verify": _cmd_verify,
        }[args.command]
        result, positive = handler(args, instance)
    except (StallocError, UsageError, OSError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("line", "column"):
            if hasattr(exc, attr):
                diag[attr] = getattr(exc, attr)
        print(json.dumps(diag), file=stderr)
        return 2
    _emit(json.dumps(result, indent=2) + "\n", args.output, stdout)
    return 1 if args.strict and not positive else 0


def _emit(text: str, path: str | None, stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main() -> None:
    sys.exit(run())
