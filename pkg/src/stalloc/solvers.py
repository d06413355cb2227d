"""Job-optimal and machine-optimal relaxed unsplit stable assignments.

Both solvers make full-size proposals only, so every intermediate state is
unsplit. The machine-proposing variant starts with every job unassigned and
lets under-filled machines propose down their lists; its output is
machine-optimal, job-pessimal, of minimum total size, and of minimum total
congestion. The job-proposing variant is its mirror image and yields the
job-optimal, maximum-size assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernels
from .model import Instance, StabilityMode, UnsplitAssignment, blocking_edges, total_congestion


@dataclass(frozen=True)
class SolverTrace:
    """Proposal log and counters of one solver run.

    ``proposals`` holds ``(proposer, target, accepted)`` identifier triples and
    is only filled when the solver is asked to record it.
    """

    proposal_count: int
    rejection_count: int
    eviction_count: int = 0
    proposals: tuple[tuple[str, str, bool], ...] = field(default=(), repr=False)

    def counters(self) -> dict[str, int]:
        return {
            "proposal_count": self.proposal_count,
            "rejection_count": self.rejection_count,
            "eviction_count": self.eviction_count,
        }


def _to_assignment(instance: Instance, assigned: list[int]) -> UnsplitAssignment:
    jobs, machines = instance.job_ids, instance.machine_ids
    return UnsplitAssignment((jobs[i], machines[k]) for i, k in enumerate(assigned) if k >= 0)


def solve_machine_optimal(
    instance: Instance, trace: bool = False, backend: str | None = None
) -> tuple[UnsplitAssignment, SolverTrace]:
    """Reversed (machine-proposing) relaxed unsplit Gale-Shapley in O(|E|).

    Machines below capacity are served from a FIFO queue in declaration order.
    Each proposal offers the job's whole size; the job moves only if it
    strictly prefers the proposer, and the machine it leaves rejoins the queue.
    A dummy machine, if present, is ignored.
    """
    instance = instance.without_dummy()
    c = instance.csr
    kernel = _kernels.get(backend)
    assigned, proposals, rejections, events = kernel.reversed_gs(
        c.sizes, c.caps, c.m_ptr, c.m_adj, c.m_jrank, trace
    )
    log = ()
    if trace:
        jobs, machines = instance.job_ids, instance.machine_ids
        log = tuple((machines[m], jobs[j], bool(a)) for m, j, a in events)
    return _to_assignment(instance, assigned), SolverTrace(proposals, rejections, 0, log)


def solve_job_optimal(
    instance: Instance, trace: bool = False, backend: str | None = None
) -> tuple[UnsplitAssignment, SolverTrace]:
    """Job-proposing relaxed unsplit Gale-Shapley.

    A machine accepts a proposal iff the load it already holds from jobs it
    ranks above the proposer is below its capacity. After accepting, it evicts
    its worst holder for as long as the remaining holders still reach capacity;
    evicted jobs continue down their lists.
    """
    instance = instance.without_dummy()
    c = instance.csr
    kernel = _kernels.get(backend)
    assigned, proposals, rejections, evictions, events = kernel.job_gs(
        c.sizes, c.caps, c.m_ptr, c.m_adj, c.j_ptr, c.j_adj, c.j_mpos, trace
    )
    log = ()
    if trace:
        jobs, machines = instance.job_ids, instance.machine_ids
        log = tuple((jobs[j], machines[m], bool(a)) for j, m, a in events)
    return _to_assignment(instance, assigned), SolverTrace(proposals, rejections, evictions, log)


@dataclass(frozen=True)
class UnsplitDecision:
    """Outcome of the unsplit existence test.

    ``assignment`` is always the machine-optimal relaxed solution; when
    ``exists`` is true it is a genuine (capacity-respecting) unsplit stable
    assignment, otherwise ``min_congestion`` is the least total congestion any
    relaxed unsplit stable assignment can reach.
    """

    exists: bool
    min_congestion: int
    assignment: UnsplitAssignment
    trace: SolverTrace


def decide_unsplit_existence(instance: Instance) -> UnsplitDecision:
    instance = instance.without_dummy()
    x, tr = solve_machine_optimal(instance)
    congestion = total_congestion(instance, x)
    # zero congestion makes x capacity-feasible; the blocking rule is the same
    exists = congestion == 0 and not blocking_edges(instance, x, StabilityMode.RELAXED_UNSPLIT)
    return UnsplitDecision(exists, congestion, x, tr)
