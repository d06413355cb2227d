"""Rounding a fractional stable allocation to a relaxed unsplit stable one.

The state is a stable allocation in which every job is fully placed (a dummy
machine takes whatever is unassigned). Each job that is not wholly on its
first choice has a *refusal edge*, its worst positive edge, and *proposal
edges*, all edges it ranks above that. Machines with incoming proposal edges
are popular; an over-full machine whose incoming proposal edges are all empty
is dangerous.

Starting from a machine with a positive incoming proposal edge, a rotation
alternates proposal edges and refusal edges until it closes a cycle or hits
an unpopular or dangerous machine. Shifting the largest feasible amount along
it, again and again, ends in an unsplit allocation.

:func:`compute_pointers`, :func:`find_rotation` and :func:`apply_rotation` are
the from-scratch building blocks. :func:`round_to_unsplit` runs the same
procedure on an incrementally maintained state by default.
"""

from __future__ import annotations

import enum
import heapq
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    InconsistentPointers,
    NotFullyAllocated,
    UnstableInput,
    UnsupportedEdgeCapacity,
    ZeroEpsilon,
)
from .fractional import solve_fractional_stable, with_dummy
from .model import (
    Allocation,
    Edge,
    Instance,
    UnsplitAssignment,
    _amounts,
    _fractional_blocking,
    check_fractional_feasibility,
    format_edge,
)


class RotationKind(str, enum.Enum):
    CYCLE = "cycle"
    UNPOPULAR = "unpopular"
    DANGEROUS = "dangerous"


@dataclass(frozen=True)
class Rotation:
    """Alternating ``(proposal edge, refusal edge)`` steps.

    The refusal edge of step ``i`` leads into the machine of step ``i + 1``'s
    proposal edge. Paths record the machine they stop at; a dangerous endpoint
    also records its overload ``slack = x(m) - q(m)``.
    """

    steps: tuple[tuple[Edge, Edge], ...]
    kind: RotationKind
    end_machine: str | None = None
    slack: int = 0


@dataclass(frozen=True)
class PointerState:
    refusal: dict[str, Edge]
    proposal_edges: dict[str, tuple[Edge, ...]]
    popular: frozenset[str]
    dangerous: frozenset[str]
    positive_proposal: dict[str, Edge]


class RoundingResult(NamedTuple):
    assignment: UnsplitAssignment
    augmentation_count: int


def _require_unit_edges(instance: Instance) -> None:
    for (j, m), c in instance.edge_capacities.items():
        if c != instance.size(j):
            raise UnsupportedEdgeCapacity(
                f"rounding needs c(jm) = q(j); {format_edge((j, m))} has {c}"
            )


def _job_states(instance: Instance, amounts: dict[tuple[int, int], int]) -> list[int]:
    """Rank of each job's worst positive edge; 0 means no refusal edge."""
    ix = instance.ix
    worst = [-1] * len(ix.job_ids)
    load = [0] * len(ix.job_ids)
    for (i, k), a in amounts.items():
        load[i] += a
        worst[i] = max(worst[i], ix.jrank[i][k])
    for i, l in enumerate(load):
        if l != ix.size[i]:
            raise NotFullyAllocated(f"job {ix.job_ids[i]!r} holds {l} of {ix.size[i]}")
    return worst


def compute_pointers(instance: Instance, allocation: Allocation) -> PointerState:
    """Refusal/proposal edges and machine flags for ``allocation``, from scratch."""
    ix = instance.ix
    amounts = _amounts(instance, allocation)
    rpos = _job_states(instance, amounts)
    jobs, machines = ix.job_ids, ix.machine_ids
    load = [0] * len(machines)
    for (_, k), a in amounts.items():
        load[k] += a

    refusal, proposal_edges = {}, {}
    incoming: list[list[int]] = [[] for _ in machines]
    for i, r in enumerate(rpos):
        if r <= 0:
            continue
        prefs = ix.jprefs[i]
        refusal[jobs[i]] = (jobs[i], machines[prefs[r]])
        proposal_edges[jobs[i]] = tuple((jobs[i], machines[k]) for k in prefs[:r])
        for k in prefs[:r]:
            incoming[k].append(i)

    popular, dangerous, positive = set(), set(), {}
    for k, inc in enumerate(incoming):
        pos = [i for i in inc if amounts.get((i, k), 0) > 0]
        if len(pos) > 1:
            raise UnstableInput(
                f"machine {machines[k]!r} has {len(pos)} positive incoming proposal edges"
            )
        if inc:
            popular.add(machines[k])
        if pos:
            positive[machines[k]] = (jobs[pos[0]], machines[k])
        elif k != ix.dummy and load[k] > ix.cap[k]:
            dangerous.add(machines[k])
    return PointerState(refusal, proposal_edges, frozenset(popular), frozenset(dangerous), positive)


def find_rotation(
    instance: Instance,
    allocation: Allocation,
    pointers: PointerState,
    through_dangerous: bool = False,
) -> Rotation | None:
    """Next rotation, or ``None`` once no machine has a positive proposal edge.

    With ``through_dangerous`` a dangerous machine only ends the path when its
    overload is below the smallest refusal amount collected so far; otherwise
    the path continues through it like any popular machine.
    """
    ix = instance.ix
    starts = [m for m in instance.machine_ids if m in pointers.positive_proposal]
    if not starts:
        return None
    incoming: dict[str, list[str]] = {}
    for j, edges in pointers.proposal_edges.items():
        for _, m in edges:
            incoming.setdefault(m, []).append(j)

    def next_step(edge: Edge) -> tuple[Edge, Edge]:
        j = edge[0]
        r = pointers.refusal.get(j)
        if r is None:
            raise InconsistentPointers(f"proposal edge {format_edge(edge)} without refusal edge")
        return edge, r

    m0 = starts[0]
    steps = [next_step(pointers.positive_proposal[m0])]
    visited = {m0: 0}
    low = allocation.get(steps[0][1], 0)
    while True:
        m = steps[-1][1][1]
        if m in visited:
            return Rotation(tuple(steps[visited[m]:]), RotationKind.CYCLE)
        if m not in pointers.popular:
            return Rotation(tuple(steps), RotationKind.UNPOPULAR, m)
        if m in pointers.dangerous:
            slack = allocation.machine_load(m) - instance.capacity(m)
            if not through_dangerous or slack < low:
                return Rotation(tuple(steps), RotationKind.DANGEROUS, m, slack)
        cands = incoming.get(m)
        if not cands:
            raise InconsistentPointers(f"popular machine {m!r} has no incoming proposal edge")
        k = ix.mpos[m]
        best = min(cands, key=lambda j: ix.mrank[k][ix.jpos[j]])
        visited[m] = len(steps)
        steps.append(next_step((best, m)))
        low = min(low, allocation.get(steps[-1][1], 0))


def rotation_epsilon(allocation: Allocation, rotation: Rotation) -> int:
    eps = min(allocation.get(r, 0) for _, r in rotation.steps)
    if rotation.kind is RotationKind.DANGEROUS:
        eps = min(eps, rotation.slack)
    return eps


def apply_rotation(instance: Instance, allocation: Allocation, rotation: Rotation) -> Allocation:
    """Shift the largest admissible amount from refusal edges to proposal edges."""
    eps = rotation_epsilon(allocation, rotation)
    if eps < 1:
        raise ZeroEpsilon(f"rotation {rotation} admits no augmentation")
    deltas: dict[Edge, int] = {}
    for p, r in rotation.steps:
        deltas[p] = deltas.get(p, 0) + eps
        deltas[r] = deltas.get(r, 0) - eps
    return allocation.updated(deltas)


class _Rounder:
    """Incrementally maintained pointer state over machine/job indices.

    A job's refusal edge only ever moves to better-ranked edges, so proposal
    edge sets only shrink. That makes every per-machine "best proposal edge"
    pointer monotone, and the whole run costs O(|E|) pointer work plus the
    rotation lengths.
    """

    def __init__(self, instance: Instance, amounts: dict[tuple[int, int], int]):
        ix = self.ix = instance.ix
        self.x = dict(amounts)
        n_m = len(ix.machine_ids)
        self.load = [0] * n_m
        for (_, k), a in amounts.items():
            self.load[k] += a
        self.rpos = _job_states(instance, amounts)
        self.prop_count = [0] * n_m
        self.pos_prop: list[set[int]] = [set() for _ in range(n_m)]
        for i, r in enumerate(self.rpos):
            for k in ix.jprefs[i][:max(r, 0)]:
                self.prop_count[k] += 1
                if self.x.get((i, k), 0) > 0:
                    self.pos_prop[k].add(i)
        for k, pos in enumerate(self.pos_prop):
            if len(pos) > 1:
                raise UnstableInput(f"machine {ix.machine_ids[k]!r} has several positive proposal edges")
        self.best_ptr = [0] * n_m
        self.heap = [k for k in range(n_m) if self.pos_prop[k]]
        heapq.heapify(self.heap)

    def is_proposal(self, i: int, k: int) -> bool:
        return self.ix.jrank[i][k] < self.rpos[i]

    def refusal_machine(self, i: int) -> int:
        return self.ix.jprefs[i][self.rpos[i]]

    def best_proposal(self, k: int) -> int:
        prefs = self.ix.mprefs[k]
        p = self.best_ptr[k]
        while not self.is_proposal(prefs[p], k):
            p += 1
        self.best_ptr[k] = p
        return prefs[p]

    def dangerous(self, k: int) -> bool:
        return k != self.ix.dummy and self.load[k] > self.ix.cap[k] and not self.pos_prop[k]

    def find(self, through_dangerous: bool):
        """Rotation as (steps of (job, proposal machine, refusal machine), kind, end, slack)."""
        heap = self.heap
        while heap and not self.pos_prop[heap[0]]:
            heapq.heappop(heap)
        if not heap:
            return None
        m0 = heap[0]
        if len(self.pos_prop[m0]) != 1:
            raise InconsistentPointers(f"machine {self.ix.machine_ids[m0]!r} has several positive proposal edges")
        (i0,) = self.pos_prop[m0]
        steps = [(i0, m0, self.refusal_machine(i0))]
        visited = {m0: 0}
        low = self.x[(i0, steps[0][2])]
        while True:
            m = steps[-1][2]
            if m in visited:
                return steps[visited[m]:], RotationKind.CYCLE, -1, 0
            if not self.prop_count[m]:
                return steps, RotationKind.UNPOPULAR, m, 0
            if self.dangerous(m):
                slack = self.load[m] - self.ix.cap[m]
                if not through_dangerous or slack < low:
                    return steps, RotationKind.DANGEROUS, m, slack
            i = self.best_proposal(m)
            visited[m] = len(steps)
            steps.append((i, m, self.refusal_machine(i)))
            low = min(low, self.x[(i, steps[-1][2])])

    def augment(self, steps, kind, slack) -> int:
        x, ix = self.x, self.ix
        eps = min(x[(i, kr)] for i, _, kr in steps)
        if kind is RotationKind.DANGEROUS:
            eps = min(eps, slack)
        if eps < 1:
            raise ZeroEpsilon("rotation admits no augmentation")
        for i, kp, kr in steps:
            if not x.get((i, kp)):
                self.pos_prop[kp].add(i)
                heapq.heappush(self.heap, kp)
            x[(i, kp)] = x.get((i, kp), 0) + eps
            self.load[kp] += eps
            x[(i, kr)] -= eps
            self.load[kr] -= eps
            if x[(i, kr)]:
                continue
            del x[(i, kr)]
            prefs = ix.jprefs[i]
            old = self.rpos[i]
            new = old - 1
            while (i, prefs[new]) not in x:
                new -= 1
            self.rpos[i] = new
            for k in prefs[new:old]:
                self.prop_count[k] -= 1
                self.pos_prop[k].discard(i)
        return eps


def _check_seed(instance: Instance, seed: Allocation) -> None:
    report = check_fractional_feasibility(instance, seed)
    if report.feasibility_violations:
        raise UnstableInput(f"seed allocation is infeasible: {report.feasibility_violations}")
    if _fractional_blocking(instance.ix, _amounts(instance, seed)):
        raise UnstableInput("seed allocation has blocking edges")


def round_to_unsplit(
    instance: Instance,
    seed: Allocation | None = None,
    *,
    through_dangerous: bool = False,
    incremental: bool = True,
    observer: Callable[[Allocation, Rotation], None] | None = None,
) -> RoundingResult:
    """Round a fractional stable allocation to a relaxed unsplit stable assignment.

    ``instance`` may come with or without its dummy machine; ``seed`` must be a
    stable allocation on the dummy-extended instance that places every job in
    full. Without a seed, :func:`solve_fractional_stable` supplies one.
    ``observer`` is called with the allocation after each augmentation.
    """
    full = instance if instance.dummy_machine is not None else with_dummy(instance)
    _require_unit_edges(full)
    if seed is None:
        seed = solve_fractional_stable(full)
    else:
        _check_seed(full, seed)

    count = 0
    if incremental:
        state = _Rounder(full, _amounts(full, seed))
        ids_j, ids_m = full.job_ids, full.machine_ids
        while (found := state.find(through_dangerous)) is not None:
            steps, kind, end, slack = found
            state.augment(steps, kind, slack)
            count += 1
            if observer is not None:
                rot = Rotation(
                    tuple(((ids_j[i], ids_m[kp]), (ids_j[i], ids_m[kr])) for i, kp, kr in steps),
                    kind, ids_m[end] if end >= 0 else None, slack,
                )
                observer(_to_allocation(full, state.x), rot)
        final = _to_allocation(full, state.x)
    else:
        final = seed
        while True:
            rot = find_rotation(full, final, compute_pointers(full, final), through_dangerous)
            if rot is None:
                break
            final = apply_rotation(full, final, rot)
            count += 1
            if observer is not None:
                observer(final, rot)

    assignment = UnsplitAssignment.from_allocation(full, final)
    return RoundingResult(assignment, count)


def _to_allocation(instance: Instance, x: dict[tuple[int, int], int]) -> Allocation:
    jobs, machines = instance.job_ids, instance.machine_ids
    return Allocation({(jobs[i], machines[k]): a for (i, k), a in x.items()})


__all__ = [
    "PointerState", "Rotation", "RotationKind", "RoundingResult",
    "apply_rotation", "compute_pointers", "find_rotation", "round_to_unsplit", "rotation_epsilon",
]
