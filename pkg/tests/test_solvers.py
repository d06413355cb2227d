from __future__ import annotations

import pytest
from hypothesis import given

from conftest import brute_relaxed, instances, make
from stalloc import (
    UnsplitAssignment,
    blocking_edges,
    check_relaxed_unsplit_feasibility,
    decide_unsplit_existence,
    lex_compare_machine,
    job_position,
    solve_job_optimal,
    solve_machine_optimal,
    total_congestion,
    total_size,
    with_dummy,
)
from stalloc import _kernels
from stalloc.model import Preference

BACKENDS = sorted(_kernels.BACKENDS)
XS = UnsplitAssignment({"j1": "m1", "j2": "m1", "j3": "m2"})
XD = UnsplitAssignment({"j3": "m1", "j2": "m2"})


@pytest.mark.parametrize("backend", BACKENDS)
def test_machine_optimal_examples(backend, tiny, fig1, fig2ul):
    assert solve_machine_optimal(fig2ul, backend=backend)[0] == XD
    x, _ = solve_machine_optimal(fig1, backend=backend)
    assert x == UnsplitAssignment({"j2": "m1"}) and total_congestion(fig1, x) == 1
    assert solve_machine_optimal(tiny, backend=backend)[0] == UnsplitAssignment({"j1": "m1"})


@pytest.mark.parametrize("backend", BACKENDS)
def test_job_optimal_examples(backend, tiny, fig1, fig2ul):
    x, _ = solve_job_optimal(fig2ul, backend=backend)
    assert x == XS and total_size(fig2ul, x) == 5
    x, tr = solve_job_optimal(fig1, backend=backend, trace=True)
    assert x == UnsplitAssignment({"j2": "m1"})
    assert tr.eviction_count == 1  # j2 pushes j1 out of m1
    assert solve_job_optimal(tiny, backend=backend)[0] == UnsplitAssignment({"j1": "m1"})


def test_decide_examples(tiny, fig1, fig2ul):
    d = decide_unsplit_existence(fig2ul)
    assert d.exists and d.assignment == XD and d.min_congestion == 0
    d = decide_unsplit_existence(fig1)
    assert not d.exists and d.min_congestion == 1
    assert decide_unsplit_existence(tiny).exists


def test_solvers_ignore_dummy(fig2ul):
    assert solve_machine_optimal(with_dummy(fig2ul))[0] == XD
    assert solve_job_optimal(with_dummy(fig2ul))[0] == XS


def test_mopt_trace_matches_hand_run(fig2ul):
    _, tr = solve_machine_optimal(fig2ul, trace=True)
    # m1 takes j3 and is full; m2 takes j2 and is full
    assert tr.proposals == (("m1", "j3", True), ("m2", "j2", True))
    assert tr.proposal_count == len(tr.proposals) <= fig2ul.n_edges


def test_zero_capacity_and_empty_instances():
    inst = make([("j1", 1, ["m1"])], [("m1", 0, ["j1"])])
    assert solve_machine_optimal(inst)[0] == UnsplitAssignment()
    assert solve_job_optimal(inst)[0] == UnsplitAssignment()
    empty = make([], [("m1", 1, [])])
    assert solve_machine_optimal(empty)[0] == UnsplitAssignment()
    assert decide_unsplit_existence(empty).exists


def _replay_mopt(inst, proposals):
    """Each job's machine rank only improves along the reversed run."""
    rank = {}
    for m, j, accepted in proposals:
        if accepted:
            r = inst.job_rank(j, m)
            assert r < rank.get(j, len(inst.job_prefs(j)))
            rank[j] = r


def _replay_jopt(inst, proposals):
    """A job proposes strictly down its list."""
    last = {}
    for j, m, _ in proposals:
        r = inst.job_rank(j, m)
        assert r > last.get(j, -1)
        last[j] = r


@given(instances(max_jobs=6, max_machines=4))
def test_solvers_against_brute_force(inst):
    sols = brute_relaxed(inst)
    x_m, tr_m = solve_machine_optimal(inst, trace=True)
    x_j, tr_j = solve_job_optimal(inst, trace=True)
    assert x_m in sols and x_j in sols
    for x in (x_m, x_j):
        assert check_relaxed_unsplit_feasibility(inst, x).ok
        assert blocking_edges(inst, x, "relaxed_unsplit") == []
    assert tr_m.proposal_count <= inst.n_edges and tr_j.proposal_count <= inst.n_edges
    _replay_mopt(inst, tr_m.proposals)
    _replay_jopt(inst, tr_j.proposals)
    for x in sols:
        assert total_size(inst, x_m) <= total_size(inst, x) <= total_size(inst, x_j)
        assert total_congestion(inst, x_m) <= total_congestion(inst, x)
        for m in inst.machine_ids:
            assert lex_compare_machine(inst, x_m, x, m) is not Preference.PREFERS_X2
            assert lex_compare_machine(inst, x_j, x, m) is not Preference.PREFERS_X1
        for j in inst.job_ids:
            assert job_position(inst, x_j, j) <= job_position(inst, x, j) <= job_position(inst, x_m, j)
    d = decide_unsplit_existence(inst)
    assert d.exists == any(total_congestion(inst, x) == 0 for x in sols)


@given(instances(max_jobs=8, max_machines=5, max_quantity=4))
def test_backends_agree(inst):
    results = {b: (solve_machine_optimal(inst, trace=True, backend=b),
                   solve_job_optimal(inst, trace=True, backend=b)) for b in BACKENDS}
    first = results[BACKENDS[0]]
    for other in results.values():
        assert other == first
