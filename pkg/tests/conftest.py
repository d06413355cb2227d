from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from stalloc import Instance, Job, Machine, load_fixture

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make(jobs, machines, edge_capacities=None) -> Instance:
    """Build from (id, size, prefs) / (id, capacity, prefs) triples."""
    return Instance(
        tuple(Job(j, q, tuple(p)) for j, q, p in jobs),
        tuple(Machine(m, q, tuple(p)) for m, q, p in machines),
        edge_capacities or {},
    )


@pytest.fixture
def tiny() -> Instance:
    return make([("j1", 1, ["m1"])], [("m1", 1, ["j1"])])


@pytest.fixture
def fig1() -> Instance:
    return load_fixture("fig1")


@pytest.fixture
def fig2ul() -> Instance:
    return load_fixture("fig2ul")


@st.composite
def instances(draw, max_jobs=5, max_machines=4, max_quantity=3, allow_zero_capacity=True):
    """Random valid instances with strict, mutually consistent lists."""
    n_j = draw(st.integers(0, max_jobs))
    n_m = draw(st.integers(1, max_machines))
    jobs = [f"j{i + 1}" for i in range(n_j)]
    machines = [f"m{k + 1}" for k in range(n_m)]
    edges = draw(st.sets(st.tuples(st.sampled_from(jobs), st.sampled_from(machines)))) if n_j else set()
    jprefs = {j: [m for (jj, m) in sorted(edges) if jj == j] for j in jobs}
    mprefs = {m: [j for (j, mm) in sorted(edges) if mm == m] for m in machines}
    jprefs = {j: draw(st.permutations(p)) for j, p in jprefs.items()}
    mprefs = {m: draw(st.permutations(p)) for m, p in mprefs.items()}
    low = 0 if allow_zero_capacity else 1
    return make(
        [(j, draw(st.integers(1, max_quantity)), jprefs[j]) for j in jobs],
        [(m, draw(st.integers(low, max_quantity)), mprefs[m]) for m in machines],
    )


def brute_relaxed(inst: Instance) -> set:
    """Every relaxed unsplit stable assignment, by plain product enumeration.

    Deliberately naive: re-derives feasibility and blocking from the
    definitions instead of calling the library checkers.
    """
    from itertools import product

    from stalloc import UnsplitAssignment

    size = {j: inst.size(j) for j in inst.job_ids}
    out = set()
    for choice in product(*[list(inst.job_prefs(j)) + [None] for j in inst.job_ids]):
        x = dict(zip(inst.job_ids, choice))
        on = {m: [j for j in inst.machine_prefs(m) if x[j] == m] for m in inst.machine_ids}
        if any(on[m] and sum(size[j] for j in on[m][:-1]) >= inst.capacity(m) for m in on):
            continue
        blocked = False
        for j in inst.job_ids:
            prefs = inst.job_prefs(j)
            cut = prefs.index(x[j]) if x[j] is not None else len(prefs)
            for m in prefs[:cut]:
                mp = inst.machine_prefs(m)
                better = sum(size[k] for k in on[m] if mp.index(k) < mp.index(j))
                if better < inst.capacity(m):
                    blocked = True
                    break
            if blocked:
                break
        if not blocked:
            out.add(UnsplitAssignment({j: m for j, m in x.items() if m is not None}))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
