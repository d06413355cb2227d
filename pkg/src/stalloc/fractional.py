"""Fractional stable allocations with every job fully placed.

A dummy machine of unbounded use sits last on every job's list, so a stable
allocation with ``x(j) = q(j)`` for all jobs always exists. The solver here is
quantity-based deferred acceptance; it is pseudo-polynomial, which is fine for
integral inputs of moderate size.
"""

from __future__ import annotations

import bisect
from collections import deque

from .errors import DummyAlreadyPresent, InvalidDummy, MissingDummy
from .model import Allocation, Instance, Job, Machine

DUMMY_ID = "m_d"


def with_dummy(instance: Instance, dummy_id: str = DUMMY_ID) -> Instance:
    """Append the sentinel machine that absorbs all unassigned load."""
    if instance.dummy_machine is not None:
        raise DummyAlreadyPresent(f"instance already has dummy {instance.dummy_machine!r}")
    taken = set(instance.job_ids) | set(instance.machine_ids)
    while dummy_id in taken:
        dummy_id += "_"
    jobs = tuple(Job(j.id, j.size, j.prefs + (dummy_id,)) for j in instance.jobs)
    dummy = Machine(dummy_id, sum(j.size for j in instance.jobs), tuple(instance.job_ids))
    return Instance(jobs, instance.machines + (dummy,), instance.edge_capacities, dummy_id)


def solve_fractional_stable(instance: Instance) -> Allocation:
    """Job-proposing deferred acceptance over amounts.

    Pending jobs (FIFO, declaration order) offer their unplaced amount to their
    current machine, capped by the edge capacity. An over-full machine trims
    its worst held edges; once it has trimmed a job it refuses that job and
    every job it ranks lower. Trimmed amounts return to their jobs' pools.
    """
    if instance.dummy_machine is None:
        raise MissingDummy("fractional solving needs a dummy machine; call with_dummy first")
    ix = instance.ix
    n_jobs, n_machines = len(ix.job_ids), len(ix.machine_ids)
    x: dict[tuple[int, int], int] = {}
    load = [0] * n_machines
    pending = list(ix.size)
    ptr = [0] * n_jobs
    no_cut = max((len(p) for p in ix.mprefs), default=0)
    refuse_from = [no_cut] * n_machines
    held: list[list[tuple[int, int]]] = [[] for _ in range(n_machines)]  # (rank, job), ascending
    queue = deque(range(n_jobs))
    queued = [True] * n_jobs

    while queue:
        i = queue.popleft()
        queued[i] = False
        prefs = ix.jprefs[i]
        while pending[i] > 0:
            if ptr[i] >= len(prefs):
                raise InvalidDummy(f"job {ix.job_ids[i]!r} ran out of machines; dummy edge too small")
            k = prefs[ptr[i]]
            r = ix.mrank[k][i]
            have = x.get((i, k), 0)
            room = ix.edge_cap(i, k) - have
            if r >= refuse_from[k] or room <= 0:
                ptr[i] += 1
                continue
            amount = min(pending[i], room)
            if not have:
                bisect.insort(held[k], (r, i))
            x[(i, k)] = have + amount
            pending[i] -= amount
            load[k] += amount
            if k == ix.dummy:
                continue
            while load[k] > ix.cap[k]:
                rw, iw = held[k][-1]
                cut = min(x[(iw, k)], load[k] - ix.cap[k])
                x[(iw, k)] -= cut
                load[k] -= cut
                pending[iw] += cut
                refuse_from[k] = min(refuse_from[k], rw)
                if not x[(iw, k)]:
                    del x[(iw, k)]
                    held[k].pop()
                if iw != i and not queued[iw]:
                    queue.append(iw)
                    queued[iw] = True

    jobs, machines = ix.job_ids, ix.machine_ids
    return Allocation({(jobs[i], machines[k]): a for (i, k), a in x.items()})
