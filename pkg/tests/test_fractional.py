from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given

from conftest import instances, make
from stalloc import (
    Allocation,
    blocking_edges,
    check_fractional_feasibility,
    classify_machines,
    enumerate_fractional_stable,
    solve_fractional_stable,
    with_dummy,
)
from stalloc.errors import DummyAlreadyPresent, MissingDummy
from stalloc.model import Saturation


def brute_fractional(full) -> set:
    """All integral stable allocations placing every job, from the definitions."""
    edges = list(full.edges())
    ranges = [range(full.edge_capacity(j, m) + 1) for j, m in edges]
    out = set()
    for amounts in product(*ranges):
        x = dict(zip(edges, amounts))
        if any(sum(a for (j, _), a in x.items() if j == jj) != full.size(jj) for jj in full.job_ids):
            continue
        load = {m: sum(a for (_, mm), a in x.items() if mm == m) for m in full.machine_ids}
        if any(load[m] > full.capacity(m) for m in full.real_machine_ids):
            continue
        stable = True
        for (j, m), a in x.items():
            if m == full.dummy_machine or a >= full.edge_capacity(j, m):
                continue
            jp, mp = full.job_prefs(j), full.machine_prefs(m)
            j_full = sum(x[(j, n)] for n in jp[: jp.index(m) + 1]) >= full.size(j)
            m_full = sum(x[(k, m)] for k in mp[: mp.index(j) + 1]) >= full.capacity(m)
            if not j_full and not m_full:
                stable = False
                break
        if stable:
            out.add(Allocation(x))
    return out


def test_with_dummy_examples(tiny, fig1):
    t = with_dummy(tiny)
    assert t.dummy_machine == "m_d" and t.capacity("m_d") == 1
    assert t.job_prefs("j1") == ("m1", "m_d")
    assert with_dummy(fig1).capacity("m_d") == 3
    empty = with_dummy(make([], [("m1", 1, [])]))
    assert empty.capacity("m_d") == 0
    with pytest.raises(DummyAlreadyPresent):
        with_dummy(t)


def test_dummy_id_avoids_collisions():
    inst = make([("j1", 1, ["m_d"])], [("m_d", 1, ["j1"])])
    assert with_dummy(inst).dummy_machine == "m_d_"


def test_without_dummy_round_trip(fig1):
    assert with_dummy(fig1).without_dummy().to_raw() == fig1.to_raw()


def test_solver_needs_dummy(fig1):
    with pytest.raises(MissingDummy):
        solve_fractional_stable(fig1)


def test_fig1_unique_fractional(fig1):
    full = with_dummy(fig1)
    expected = Allocation({("j2", "m1"): 1, ("j2", "m2"): 1, ("j1", "m_d"): 1})
    assert solve_fractional_stable(full) == expected
    assert enumerate_fractional_stable(full) == [expected]
    assert brute_fractional(full) == {expected}


def test_tiny_fractional(tiny):
    full = with_dummy(tiny)
    assert solve_fractional_stable(full) == Allocation({("j1", "m1"): 1})
    assert enumerate_fractional_stable(full) == [Allocation({("j1", "m1"): 1})]


def test_fig2ul_fractional(fig2ul):
    full = with_dummy(fig2ul)
    x = solve_fractional_stable(full)
    assert x == Allocation({("j2", "m1"): 1, ("j3", "m2"): 1, ("j3", "m1"): 1, ("j1", "m_d"): 2})
    sols = enumerate_fractional_stable(full)
    assert sols and x in sols
    loads = {tuple(s.machine_load(m) for m in full.machine_ids) for s in sols}
    assert len(loads) == 1


def test_edge_capacities_below_size_are_honoured():
    inst = make(
        [("j1", 3, ["m1", "m2"])],
        [("m1", 3, ["j1"]), ("m2", 3, ["j1"])],
        {("j1", "m1"): 1},
    )
    x = solve_fractional_stable(with_dummy(inst))
    assert x == Allocation({("j1", "m1"): 1, ("j1", "m2"): 2})


def _check_output(full, x):
    assert all(x.job_load(j) == full.size(j) for j in full.job_ids)
    assert check_fractional_feasibility(full, x).ok
    assert blocking_edges(full, x, "fractional") == []
    for m, status in classify_machines(full, x).items():
        if status.popular:
            assert status.saturation is Saturation.SATURATED, m


@given(instances(max_jobs=5, max_machines=3, max_quantity=3))
def test_solver_output_is_stable_and_complete(inst):
    full = with_dummy(inst)
    _check_output(full, solve_fractional_stable(full))


@given(instances(max_jobs=3, max_machines=2, max_quantity=2))
def test_enumeration_matches_brute_force(inst):
    full = with_dummy(inst)
    sols = enumerate_fractional_stable(full)
    assert set(sols) == brute_fractional(full)
    assert len(set(sols)) == len(sols)
    x = solve_fractional_stable(full)
    assert x in sols
    ref = [x.machine_load(m) for m in full.machine_ids]
    for s in sols:
        assert [s.machine_load(m) for m in full.machine_ids] == ref
        assert [s.job_load(j) for j in full.job_ids] == [x.job_load(j) for j in full.job_ids]
