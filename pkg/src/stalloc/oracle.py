"""Brute-force ground truth for small instances.

The enumerators walk every candidate assignment (or integral allocation) job
by job and keep the ones the model checkers accept. Pruning only ever removes
subtrees that cannot contain a feasible stable completion, and every leaf is
re-checked with the full checkers, so the output does not depend on the
pruning being clever. Nothing here calls the solvers; :func:`verify_structure`
compares the solvers against these sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MissingDummy, SearchSpaceTooLarge
from .fractional import solve_fractional_stable, with_dummy
from .model import (
    Allocation,
    Instance,
    Preference,
    Saturation,
    UnsplitAssignment,
    _amounts,
    _fractional_blocking,
    _relaxed_blocking,
    _relaxed_violations,
    check_fractional_feasibility,
    classify_machines,
    job_position,
    lex_compare_machine,
    total_congestion,
    total_size,
)
from .rounding import round_to_unsplit
from .solvers import decide_unsplit_existence, solve_job_optimal, solve_machine_optimal

DEFAULT_LIMIT = 10**7


def enumerate_relaxed_stable(instance: Instance, limit: int = DEFAULT_LIMIT) -> list[UnsplitAssignment]:
    """All relaxed unsplit stable assignments, in canonical order.

    Canonical order is lexicographic over jobs in declaration order, each job's
    options ordered by machine declaration index with "unassigned" last.
    """
    instance = instance.without_dummy()
    ix = instance.ix
    space = math.prod(len(p) + 1 for p in ix.jprefs)
    if space > limit:
        raise SearchSpaceTooLarge(f"{space} candidate assignments exceed the limit {limit}")
    n_jobs = len(ix.job_ids)
    options = [sorted(p) + [-1] for p in ix.jprefs]
    assigned = [-1] * n_jobs
    load = [0] * len(ix.machine_ids)
    held: list[list[int]] = [[] for _ in ix.machine_ids]
    found: list[list[int]] = []

    def relaxed_ok(k: int) -> bool:
        worst = max(held[k], key=ix.mrank[k].__getitem__)
        return load[k] - ix.size[worst] < ix.cap[k]

    def may_still_fill(i: int) -> bool:
        # every machine i prefers to its choice must end up filled by better jobs
        k0 = assigned[i]
        stop = ix.jrank[i][k0] if k0 >= 0 else len(ix.jprefs[i])
        for k in ix.jprefs[i][:stop]:
            r = ix.mrank[k][i]
            best_case = 0
            for j in ix.mprefs[k][:r]:
                if j > i or assigned[j] == k:
                    best_case += ix.size[j]
            if best_case < ix.cap[k]:
                return False
        return True

    def walk(i: int) -> None:
        if i == n_jobs:
            if not _relaxed_violations(ix, assigned) and not _relaxed_blocking(ix, assigned):
                found.append(list(assigned))
            return
        for k in options[i]:
            assigned[i] = k
            if k >= 0:
                load[k] += ix.size[i]
                held[k].append(i)
                # relaxed infeasibility is inherited by every superset
                if relaxed_ok(k) and may_still_fill(i):
                    walk(i + 1)
                held[k].pop()
                load[k] -= ix.size[i]
            elif may_still_fill(i):
                walk(i + 1)
        assigned[i] = -1

    walk(0)
    jobs, machines = ix.job_ids, ix.machine_ids
    return [
        UnsplitAssignment((jobs[i], machines[k]) for i, k in enumerate(a) if k >= 0) for a in found
    ]


def enumerate_fractional_stable(instance: Instance, limit: int = DEFAULT_LIMIT) -> list[Allocation]:
    """All integral stable allocations that place every job in full.

    ``limit`` caps the number of search nodes visited, not the raw product of
    edge ranges; that product is astronomically large even for tiny instances
    while the pruned tree stays small.
    """
    if instance.dummy_machine is None:
        raise MissingDummy("enumerate_fractional_stable needs the dummy-extended instance")
    ix = instance.ix
    n_jobs, n_m = len(ix.job_ids), len(ix.machine_ids)
    d = ix.dummy
    x: dict[tuple[int, int], int] = {}
    load = [0] * n_m
    nodes = 0
    found: list[dict[tuple[int, int], int]] = []
    no_limit = [len(p) for p in ix.mprefs]

    def vectors(i: int, thr: list[int]):
        real = [k for k in ix.jprefs[i] if k != d]
        caps = []
        for k in real:
            if ix.mrank[k][i] > thr[k]:
                caps.append(0)
            else:
                caps.append(min(ix.edge_cap(i, k), ix.size[i], ix.cap[k] - load[k]))
        out = [0] * len(real)

        def rec(t: int, left: int):
            if t == len(real):
                if left <= ix.edge_cap(i, d):
                    yield real, out, left
                return
            for a in range(min(caps[t], left), -1, -1):
                out[t] = a
                yield from rec(t + 1, left - a)
            out[t] = 0

        yield from rec(0, ix.size[i])

    def saturation_possible(i: int, k: int) -> bool:
        r = ix.mrank[k][i]
        best_case = 0
        for j in ix.mprefs[k][: r + 1]:
            if j <= i:
                best_case += x.get((j, k), 0)
            else:
                best_case += min(ix.edge_cap(j, k), ix.size[j])
        return best_case >= ix.cap[k]

    def walk(i: int, thr: list[int]) -> None:
        nonlocal nodes
        if i == n_jobs:
            amounts = {e: a for e, a in x.items() if a}
            if not _fractional_blocking(ix, amounts):
                found.append(amounts)
            return
        for real, amounts, rest in vectors(i, thr):
            nodes += 1
            if nodes > limit:
                raise SearchSpaceTooLarge(f"fractional enumeration visited more than {limit} nodes")
            for k, a in zip(real, amounts):
                x[(i, k)] = a
                load[k] += a
            x[(i, d)] = rest
            ok, new_thr = True, thr
            prefix = 0
            for k in ix.jprefs[i]:
                prefix += x[(i, k)]
                if k == d or x[(i, k)] >= ix.edge_cap(i, k) or prefix >= ix.size[i]:
                    continue
                # i wants more of k, so k must be filled by jobs it ranks >= i
                r = ix.mrank[k][i]
                if not saturation_possible(i, k):
                    ok = False
                    break
                if r < new_thr[k]:
                    if any(x.get((j, k), 0) for j in ix.mprefs[k][r + 1:] if j < i):
                        ok = False
                        break
                    if new_thr is thr:
                        new_thr = list(thr)
                    new_thr[k] = r
            if ok:
                walk(i + 1, new_thr)
            for k, a in zip(real, amounts):
                load[k] -= a
                del x[(i, k)]
            del x[(i, d)]

    walk(0, no_limit)
    jobs, machines = ix.job_ids, ix.machine_ids
    out = []
    for amounts in found:
        alloc = Allocation({(jobs[i], machines[k]): a for (i, k), a in amounts.items()})
        if not check_fractional_feasibility(instance, alloc).feasibility_violations:
            out.append(alloc)
    return out


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: dict | None = None


@dataclass
class TheoremReport:
    checks: dict[str, CheckResult] = field(default_factory=dict)
    solutions: list[UnsplitAssignment] = field(default_factory=list)
    x_mopt: UnsplitAssignment | None = None
    x_jopt: UnsplitAssignment | None = None
    rounded: UnsplitAssignment | None = None
    observations: dict[str, list[str]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def add(self, name: str, failure: str | None, counterexample: dict | None = None) -> None:
        self.checks[name] = CheckResult(name, failure is None, failure or "", counterexample)

    def summary(self) -> dict[str, str]:
        return {n: "pass" if c.passed else "fail" for n, c in self.checks.items()}


def _first(items):
    return next(iter(items), None)


def verify_structure(instance: Instance, limit: int = DEFAULT_LIMIT) -> TheoremReport:
    """Check the structural guarantees of the solvers against the oracle sets.

    Every check is recorded by name; a failing check carries a description and,
    where one exists, a counterexample solution.
    """
    instance = instance.without_dummy()
    rep = TheoremReport()
    sols = enumerate_relaxed_stable(instance, limit)
    rep.solutions = sols
    sol_set = set(sols)
    x_mopt, tr_m = solve_machine_optimal(instance)
    x_jopt, tr_j = solve_job_optimal(instance)
    rep.x_mopt, rep.x_jopt = x_mopt, x_jopt
    n_edges = instance.n_edges
    jobs, machines = instance.job_ids, instance.machine_ids

    def cx(x: UnsplitAssignment) -> dict:
        return {"assignment": x.as_dict(instance)}

    missing = [name for name, x in (("x_mopt", x_mopt), ("x_jopt", x_jopt)) if x not in sol_set]
    rep.add("solvers_relaxed_stable", f"{missing} not relaxed stable" if missing else None)

    size = {x: total_size(instance, x) for x in sols}
    s_m, s_j = total_size(instance, x_mopt), total_size(instance, x_jopt)
    bad = _first(x for x in sols if not s_m <= size[x] <= s_j)
    rep.add("cardinality_extremes",
            None if bad is None else f"|x|={size[bad]} outside [{s_m}, {s_j}]",
            None if bad is None else cx(bad))

    failure, example = None, None
    for x in sols:
        for m in machines:
            if lex_compare_machine(instance, x_mopt, x, m) is Preference.PREFERS_X2:
                failure, example = f"machine {m} prefers another solution to x_mopt", x
            elif lex_compare_machine(instance, x_jopt, x, m) is Preference.PREFERS_X1:
                failure, example = f"machine {m} prefers x_jopt to another solution", x
            if failure:
                break
        for j in jobs if failure is None else ():
            pos = job_position(instance, x, j)
            if job_position(instance, x_jopt, j) > pos:
                failure, example = f"job {j} does better than in x_jopt", x
            elif job_position(instance, x_mopt, j) < pos:
                failure, example = f"job {j} does worse than in x_mopt", x
            if failure:
                break
        if failure:
            break
    rep.add("optimal_pessimal_duality", failure, cx(example) if example else None)

    cong = {x: total_congestion(instance, x) for x in sols}
    c_m = total_congestion(instance, x_mopt)
    bad = _first(x for x in sols if cong[x] < c_m)
    rep.add("minimum_congestion", None if bad is None else f"congestion {cong[bad]} < {c_m}",
            None if bad is None else cx(bad))

    def loads(x):
        out = dict.fromkeys(machines, 0)
        for j, m in x.items():
            out[m] += instance.size(j)
        return out

    l_m, l_j = loads(x_mopt), loads(x_jopt)
    under = [m for m in machines if l_m[m] < instance.capacity(m)]
    over = [m for m in machines if l_j[m] > instance.capacity(m)]
    failure, example = None, None
    for x in sols:
        lx = loads(x)
        m = _first(m for m in under if lx[m] > l_m[m])
        if m is not None:
            failure, example = f"under-filled {m} holds more elsewhere ({lx[m]} > {l_m[m]})", x
            break
        m = _first(m for m in over if lx[m] < instance.capacity(m))
        if m is not None:
            failure, example = f"{m} over-capacitated in x_jopt but under-filled elsewhere", x
            break
    rep.add("rural_hospital_variant", failure, cx(example) if example else None)

    failure, example = None, None
    for x in sols:
        j = _first(j for j in jobs if x_jopt.get(j) is None and x.get(j) is not None)
        j = j or _first(j for j in jobs if x_mopt.get(j) is not None and x.get(j) is None)
        if j is not None:
            failure, example = f"job {j} changes matched status", x
            break
    rep.add("jobs_side_status", failure, cx(example) if example else None)

    decision = decide_unsplit_existence(instance)
    feasible = [x for x in sols if cong[x] == 0]
    failure = None
    if decision.exists != bool(feasible):
        failure = f"decision says exists={decision.exists}, oracle finds {len(feasible)}"
    elif decision.exists and decision.assignment not in feasible:
        failure = "witness is not a zero-congestion stable assignment"
    elif sols and decision.min_congestion != min(cong.values()):
        failure = f"min congestion {decision.min_congestion} != oracle {min(cong.values())}"
    rep.add("unsplit_decision", failure)

    bounds = []
    if tr_m.proposal_count > n_edges:
        bounds.append(f"machine-proposing made {tr_m.proposal_count} > {n_edges} proposals")
    if tr_j.proposal_count > n_edges:
        bounds.append(f"job-proposing made {tr_j.proposal_count} > {n_edges} proposals")

    full = with_dummy(instance)
    seed = solve_fractional_stable(full)
    fracs = enumerate_fractional_stable(full, limit)

    # the rounder must land in the solution set from any stable starting point
    failure = example = None
    for start in [seed] + fracs:
        rounded, augs = round_to_unsplit(full, start)
        if rep.rounded is None:
            rep.rounded = rounded
        if augs > 2 * n_edges:
            bounds.append(f"rounding used {augs} > 2*{n_edges} augmentations")
        if rounded not in sol_set:
            failure, example = "rounding left the solution set", rounded
            break
    rep.add("rounding_in_solution_set", failure, cx(example) if failure else None)
    rep.add("complexity_counters", "; ".join(bounds) or None)

    # the variant that walks through dangerous machines is not sound; record where it strays
    strayed, _ = round_to_unsplit(full, seed, through_dangerous=True)
    rep.observations["through_dangerous_strays"] = [] if strayed in sol_set else [
        str(strayed.as_dict(instance))]

    failure = None
    if seed not in set(fracs):
        failure = "fractional solver output is not among the enumerated stable allocations"
    else:
        ref = _machine_vector(full, seed)
        odd = _first(f for f in fracs if _machine_vector(full, f) != ref)
        if odd is not None:
            failure = f"machine loads differ between stable allocations: {odd!r}"
        else:
            failure = _fractional_structure(full, seed)
    rep.add("fractional_rural_hospital", failure)

    empty_somewhere = {m for x in sols for m in machines if loads(x)[m] == 0}
    used_somewhere = {m for x in sols for m in machines if loads(x)[m] > 0}
    rep.observations["occupancy_varies"] = sorted(empty_somewhere & used_somewhere)
    rep.observations["sizes"] = sorted({str(s) for s in size.values()})
    return rep


def _machine_vector(instance: Instance, allocation: Allocation) -> tuple[int, ...]:
    loads = [0] * len(instance.machine_ids)
    for (_, k), a in _amounts(instance, allocation).items():
        loads[k] += a
    return tuple(loads)


def _fractional_structure(instance: Instance, allocation: Allocation) -> str | None:
    """Popular machines are saturated, and each has at most one positive proposal edge, its worst."""
    ix = instance.ix
    status = classify_machines(instance, allocation)
    for m, st in status.items():
        if st.popular and st.saturation is not Saturation.SATURATED:
            return f"popular machine {m} is not saturated"
    amounts = _amounts(instance, allocation)
    worst = [-1] * len(ix.job_ids)
    for (i, k) in amounts:
        worst[i] = max(worst[i], ix.jrank[i][k])
    for k, prefs in enumerate(ix.mprefs):
        positive = [i for i in prefs if amounts.get((i, k), 0) > 0]
        proposals = [i for i in positive if ix.jrank[i][k] < worst[i]]
        if len(proposals) > 1:
            return f"machine {ix.machine_ids[k]} has {len(proposals)} positive proposal edges"
        if proposals and positive[-1] != proposals[0]:
            return f"positive proposal edge into {ix.machine_ids[k]} is not its worst positive edge"
    return None
