from __future__ import annotations

import pytest
from hypothesis import given

from conftest import brute_relaxed, instances, make
from stalloc import (
    Allocation,
    Rotation,
    RotationKind,
    UnsplitAssignment,
    check_relaxed_unsplit_feasibility,
    compute_pointers,
    enumerate_fractional_stable,
    find_rotation,
    round_to_unsplit,
    solve_fractional_stable,
    validate_instance,
    with_dummy,
)
from stalloc.errors import NotFullyAllocated, UnstableInput, UnsupportedEdgeCapacity, ZeroEpsilon
from stalloc.rounding import apply_rotation, rotation_epsilon


@pytest.fixture
def fig1_full(fig1):
    return with_dummy(fig1)


def test_fig1_pointers(fig1_full):
    p = compute_pointers(fig1_full, solve_fractional_stable(fig1_full))
    assert p.refusal == {"j1": ("j1", "m_d"), "j2": ("j2", "m2")}
    assert p.proposal_edges == {"j1": (("j1", "m1"),), "j2": (("j2", "m1"),)}
    assert p.popular == {"m1"} and p.dangerous == set()
    assert p.positive_proposal == {"m1": ("j2", "m1")}


def test_fig1_rotation_sequence(fig1_full):
    x = solve_fractional_stable(fig1_full)
    rot = find_rotation(fig1_full, x, compute_pointers(fig1_full, x))
    assert rot == Rotation(((("j2", "m1"), ("j2", "m2")),), RotationKind.UNPOPULAR, "m2")
    x = apply_rotation(fig1_full, x, rot)
    assert x == Allocation({("j2", "m1"): 2, ("j1", "m_d"): 1})
    p = compute_pointers(fig1_full, x)
    # m1 is over full and its only proposal edge j1m1 carries nothing
    assert p.dangerous == {"m1"} and not p.positive_proposal
    assert find_rotation(fig1_full, x, p) is None


def test_fig1_round(fig1):
    res = round_to_unsplit(fig1)
    assert res.assignment == UnsplitAssignment({"j2": "m1"}) and res.augmentation_count == 1


def test_fig2ul_round_reaches_the_larger_solution(fig2ul):
    res = round_to_unsplit(fig2ul)
    assert res.assignment == UnsplitAssignment({"j1": "m1", "j2": "m1", "j3": "m2"})
    assert res.augmentation_count == 2


def test_unsplit_seed_has_no_rotation(fig2ul):
    full = with_dummy(fig2ul)
    seed = Allocation({("j3", "m1"): 2, ("j2", "m2"): 1, ("j1", "m_d"): 2})
    assert find_rotation(full, seed, compute_pointers(full, seed)) is None
    assert round_to_unsplit(full, seed) == (UnsplitAssignment({"j3": "m1", "j2": "m2"}), 0)


def test_epsilon_rules():
    x = Allocation({("a", "r1"): 3, ("b", "r2"): 1, ("c", "r3"): 2, ("d", "r4"): 4})
    cycle = Rotation(((("a", "p"), ("a", "r1")), (("b", "q"), ("b", "r2")), (("c", "s"), ("c", "r3"))),
                     RotationKind.CYCLE)
    assert rotation_epsilon(x, cycle) == 1
    capped = Rotation(((("d", "p"), ("d", "r4")),), RotationKind.DANGEROUS, "r4", slack=1)
    assert rotation_epsilon(x, capped) == 1


def test_zero_epsilon_is_an_error(fig1_full):
    bogus = Rotation(((("j1", "m1"), ("j2", "m1")),), RotationKind.UNPOPULAR, "m1")
    with pytest.raises(ZeroEpsilon):
        apply_rotation(fig1_full, Allocation({("j2", "m2"): 2, ("j1", "m_d"): 1}), bogus)


def test_seed_must_be_complete_and_stable(fig1_full):
    with pytest.raises(NotFullyAllocated):
        compute_pointers(fig1_full, Allocation({("j2", "m1"): 1}))
    with pytest.raises(UnstableInput):
        # j2 sits on m2 although m1 would take it
        round_to_unsplit(fig1_full, Allocation({("j2", "m2"): 2, ("j1", "m_d"): 1}))


def test_edge_capacity_below_size_unsupported():
    inst = make([("j1", 2, ["m1"])], [("m1", 2, ["j1"])], {("j1", "m1"): 1})
    with pytest.raises(UnsupportedEdgeCapacity):
        round_to_unsplit(inst)


def _position(full, x, j):
    return [x.get((j, m), 0) for m in full.job_prefs(j)]


def _run_checked(inst, seed=None, **kw):
    """Round while checking the per-augmentation invariants."""
    full = with_dummy(inst)
    seed = seed if seed is not None else solve_fractional_stable(full)
    prev = [seed]
    rotations = []

    def observe(x, rot):
        before = prev[-1]
        rotations.append(rot)
        for j in full.job_ids:
            assert x.job_load(j) == full.size(j)
            # lexicographic position never worsens: first difference gains mass
            diff = [(b, a) for b, a in zip(_position(full, x, j), _position(full, before, j)) if b != a]
            assert not diff or diff[0][0] > diff[0][1]
        for m in full.real_machine_ids:
            on = [(full.machine_rank(m, j), a) for (j, mm), a in x.items() if mm == m]
            if on:
                assert sum(a for _, a in on) - max(on)[1] < full.capacity(m)
        prev.append(x)

    res = round_to_unsplit(full, seed, observer=observe, **kw)
    return res, rotations, prev


@given(instances(max_jobs=5, max_machines=4, max_quantity=3))
def test_rounding_invariants_and_oracle(inst):
    res, rots, states = _run_checked(inst)
    assert res.augmentation_count == len(rots) <= 2 * inst.n_edges
    assert check_relaxed_unsplit_feasibility(inst, res.assignment).ok
    assert res.assignment in brute_relaxed(inst)
    # the reference engine recomputes everything and must take the same steps
    ref, ref_rots, ref_states = _run_checked(inst, incremental=False)
    assert ref == res and ref_rots == rots and ref_states == states


@given(instances(max_jobs=4, max_machines=3, max_quantity=2))
def test_rounding_from_every_stable_seed(inst):
    full = with_dummy(inst)
    sols = brute_relaxed(inst)
    for seed in enumerate_fractional_stable(full):
        res, _, _ = _run_checked(inst, seed)
        assert res.assignment in sols


THROUGH_DANGEROUS_CX = {
    "jobs": [
        {"id": "j1", "size": 1, "prefs": ["m3", "m1"]},
        {"id": "j2", "size": 3, "prefs": ["m2", "m3", "m1"]},
        {"id": "j3", "size": 1, "prefs": ["m2"]},
        {"id": "j4", "size": 2, "prefs": ["m1", "m2"]},
        {"id": "j5", "size": 3, "prefs": ["m3", "m1"]},
        {"id": "j6", "size": 2, "prefs": ["m3", "m1"]},
    ],
    "machines": [
        {"id": "m1", "capacity": 3, "prefs": ["j1", "j2", "j4", "j6", "j5"]},
        {"id": "m2", "capacity": 2, "prefs": ["j2", "j4", "j3"]},
        {"id": "m3", "capacity": 2, "prefs": ["j5", "j1", "j2", "j6"]},
    ],
}


def test_walking_through_dangerous_machines_breaks_feasibility():
    inst = validate_instance(THROUGH_DANGEROUS_CX)
    good = round_to_unsplit(inst)
    assert good.assignment in brute_relaxed(inst)
    bad = round_to_unsplit(inst, through_dangerous=True)
    # the path crosses over-full m1 and piles j6 on top of it
    assert bad.assignment["j6"] == "m1"
    assert not check_relaxed_unsplit_feasibility(inst, bad.assignment).ok


@given(instances(max_jobs=5, max_machines=4, max_quantity=3))
def test_through_dangerous_engines_agree(inst):
    a = round_to_unsplit(inst, through_dangerous=True)
    b = round_to_unsplit(inst, through_dangerous=True, incremental=False)
    assert a == b
