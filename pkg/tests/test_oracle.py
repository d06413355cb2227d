from __future__ import annotations

import pytest
from hypothesis import given

from conftest import brute_relaxed, instances, make
from stalloc import (
    UnsplitAssignment,
    enumerate_fractional_stable,
    enumerate_relaxed_stable,
    load_fixture,
    verify_structure,
    with_dummy,
)
from stalloc import oracle
from stalloc.errors import MissingDummy, SearchSpaceTooLarge
from stalloc.io import FIXTURES

XS = UnsplitAssignment({"j1": "m1", "j2": "m1", "j3": "m2"})
XD = UnsplitAssignment({"j3": "m1", "j2": "m2"})


def test_enumeration_examples(tiny, fig1, fig2ul):
    assert enumerate_relaxed_stable(fig2ul) == [XS, XD]
    assert enumerate_relaxed_stable(fig1) == [UnsplitAssignment({"j2": "m1"})]
    assert enumerate_relaxed_stable(tiny) == [UnsplitAssignment({"j1": "m1"})]


def test_search_space_limits(fig2ul):
    # 2 * 3 * 3 candidate maps
    assert enumerate_relaxed_stable(fig2ul, limit=18)
    with pytest.raises(SearchSpaceTooLarge):
        enumerate_relaxed_stable(fig2ul, limit=17)
    with pytest.raises(SearchSpaceTooLarge):
        enumerate_fractional_stable(with_dummy(fig2ul), limit=3)


def test_fractional_enumeration_needs_dummy(fig1):
    with pytest.raises(MissingDummy):
        enumerate_fractional_stable(fig1)


@given(instances(max_jobs=6, max_machines=4))
def test_enumeration_matches_brute_force(inst):
    sols = enumerate_relaxed_stable(inst)
    assert set(sols) == brute_relaxed(inst)
    assert len(set(sols)) == len(sols)
    # canonical order: by machine index per job in declaration order, unassigned last
    machines = inst.machine_ids

    def key(x):
        return [machines.index(x[j]) if j in x else len(machines) for j in inst.job_ids]

    assert sols == sorted(sols, key=key)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_verify(name):
    rep = verify_structure(load_fixture(name))
    assert rep.passed, {n: c.detail for n, c in rep.checks.items() if not c.passed}
    assert set(rep.summary().values()) == {"pass"}


def test_fig2ul_report(fig2ul):
    rep = verify_structure(fig2ul)
    assert (rep.x_mopt, rep.x_jopt) == (XD, XS)
    assert rep.observations["sizes"] == ["3", "5"]


def test_fig2ll_machine_occupancy_varies():
    rep = verify_structure(load_fixture("fig2ll"))
    assert rep.passed and rep.observations["occupancy_varies"] == ["m1"]


def test_verify_flags_a_wrong_solver(monkeypatch, fig2ul):
    real = oracle.solve_machine_optimal

    def swapped(instance, *a, **kw):
        x, tr = oracle.solve_job_optimal(instance, *a, **kw)
        return x, tr

    monkeypatch.setattr(oracle, "solve_machine_optimal", swapped)
    rep = verify_structure(fig2ul)
    assert not rep.passed
    failing = {n for n, c in rep.checks.items() if not c.passed}
    assert "cardinality_extremes" in failing or "optimal_pessimal_duality" in failing
    assert any(c.counterexample for c in rep.checks.values() if not c.passed)
    monkeypatch.setattr(oracle, "solve_machine_optimal", real)


def test_verify_flags_a_wrong_rounder(monkeypatch, fig1):
    from stalloc.rounding import RoundingResult

    monkeypatch.setattr(oracle, "round_to_unsplit",
                        lambda inst, seed=None, **kw: RoundingResult(UnsplitAssignment(), 0))
    rep = verify_structure(fig1)
    assert not rep.checks["rounding_in_solution_set"].passed


def test_zero_job_instance():
    inst = make([], [("m1", 2, [])])
    assert enumerate_relaxed_stable(inst) == [UnsplitAssignment()]
    assert verify_structure(inst).passed
