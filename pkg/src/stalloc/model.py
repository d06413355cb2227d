"""Instances, allocations, and the checkers that define feasibility and stability.

Everything here is integral. Jobs and machines are addressed by their string
identifiers at the API surface; internally an :class:`Instance` keeps an
index-based view (ranks, loads, CSR arrays) that the solvers and checkers share.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Integral
from typing import NamedTuple, Union

import numpy as np

from .errors import (
    AllocationError,
    AssignedToUnlistedMachine,
    AsymmetricPreference,
    DuplicateIdentifier,
    EdgeCapacityOnMissingEdge,
    InfeasibleInput,
    InvalidDummy,
    NegativeCapacity,
    NonPositiveSize,
    UnknownEdge,
    UnknownIdentifier,
    UnknownMachine,
)

Edge = tuple[str, str]


def format_edge(edge: Edge) -> str:
    return f"{edge[0]}:{edge[1]}"


def _is_int(value) -> bool:
    return isinstance(value, Integral) and not isinstance(value, bool)


@dataclass(frozen=True)
class Job:
    id: str
    size: int
    prefs: tuple[str, ...]


@dataclass(frozen=True)
class Machine:
    id: str
    capacity: int
    prefs: tuple[str, ...]


class _Index:
    """Integer view of a validated instance. Ranks are 0-based, 0 is best."""

    __slots__ = (
        "job_ids", "machine_ids", "jpos", "mpos", "jprefs", "mprefs",
        "jrank", "mrank", "size", "cap", "ecap", "dummy", "n_edges",
    )

    def edge_cap(self, i: int, k: int) -> int:
        return self.ecap.get((i, k), self.size[i])


@dataclass(frozen=True)
class Instance:
    """A bipartite preference system between jobs and machines.

    Construction validates every structural invariant; an ``Instance`` object
    that exists is a valid one. Use :func:`validate_instance` to build one
    from the plain-dict (JSON) shape.
    """

    jobs: tuple[Job, ...]
    machines: tuple[Machine, ...]
    edge_capacities: Mapping[Edge, int] = field(default_factory=dict)
    dummy_machine: str | None = None

    def __post_init__(self):
        jobs = tuple(Job(j.id, j.size, tuple(j.prefs)) for j in self.jobs)
        machines = tuple(Machine(m.id, m.capacity, tuple(m.prefs)) for m in self.machines)
        object.__setattr__(self, "jobs", jobs)
        object.__setattr__(self, "machines", machines)
        object.__setattr__(self, "edge_capacities", dict(self.edge_capacities))
        object.__setattr__(self, "_ix", _build_index(self))

    __hash__ = None  # type: ignore[assignment]

    @property
    def ix(self) -> _Index:
        return self._ix  # type: ignore[attr-defined]

    @property
    def job_ids(self) -> list[str]:
        return self.ix.job_ids

    @property
    def machine_ids(self) -> list[str]:
        return self.ix.machine_ids

    @property
    def real_machine_ids(self) -> list[str]:
        return [m for m in self.ix.machine_ids if m != self.dummy_machine]

    @property
    def n_edges(self) -> int:
        return self.ix.n_edges

    def size(self, job: str) -> int:
        return self.ix.size[self._job(job)]

    def capacity(self, machine: str) -> int:
        return self.ix.cap[self._machine(machine)]

    def job_prefs(self, job: str) -> tuple[str, ...]:
        return self.jobs[self._job(job)].prefs

    def machine_prefs(self, machine: str) -> tuple[str, ...]:
        return self.machines[self._machine(machine)].prefs

    def has_edge(self, job: str, machine: str) -> bool:
        i = self.ix.jpos.get(job)
        k = self.ix.mpos.get(machine)
        return i is not None and k is not None and k in self.ix.jrank[i]

    def edge_capacity(self, job: str, machine: str) -> int:
        i, k = self._edge(job, machine)
        return self.ix.edge_cap(i, k)

    def job_rank(self, job: str, machine: str) -> int:
        i, k = self._edge(job, machine)
        return self.ix.jrank[i][k]

    def machine_rank(self, machine: str, job: str) -> int:
        i, k = self._edge(job, machine)
        return self.ix.mrank[k][i]

    def edges(self) -> Iterator[Edge]:
        """All edges, ordered by job declaration then by the job's ranking."""
        for job in self.jobs:
            for m in job.prefs:
                yield (job.id, m)

    def without_dummy(self) -> Instance:
        if self.dummy_machine is None:
            return self
        d = self.dummy_machine
        return Instance(
            jobs=tuple(Job(j.id, j.size, tuple(m for m in j.prefs if m != d)) for j in self.jobs),
            machines=tuple(m for m in self.machines if m.id != d),
            edge_capacities={e: c for e, c in self.edge_capacities.items() if e[1] != d},
        )

    def to_raw(self) -> dict:
        raw: dict = {
            "jobs": [{"id": j.id, "size": j.size, "prefs": list(j.prefs)} for j in self.jobs],
            "machines": [
                {"id": m.id, "capacity": m.capacity, "prefs": list(m.prefs)} for m in self.machines
            ],
        }
        if self.edge_capacities:
            raw["edge_capacities"] = {
                format_edge(e): c for e, c in sorted(self.edge_capacities.items())
            }
        if self.dummy_machine is not None:
            raw["dummy_machine"] = self.dummy_machine
        return raw

    @cached_property
    def csr(self) -> "CSR":
        return _build_csr(self.ix)

    def _job(self, job: str) -> int:
        try:
            return self.ix.jpos[job]
        except KeyError:
            raise UnknownIdentifier(f"unknown job {job!r}") from None

    def _machine(self, machine: str) -> int:
        try:
            return self.ix.mpos[machine]
        except KeyError:
            raise UnknownMachine(f"unknown machine {machine!r}") from None

    def _edge(self, job: str, machine: str) -> tuple[int, int]:
        i = self.ix.jpos.get(job)
        k = self.ix.mpos.get(machine)
        if i is None or k is None or k not in self.ix.jrank[i]:
            raise UnknownEdge(f"no edge {job}:{machine}")
        return i, k


def _build_index(inst: Instance) -> _Index:
    ix = _Index()
    ix.job_ids = [j.id for j in inst.jobs]
    ix.machine_ids = [m.id for m in inst.machines]
    ix.jpos = {}
    for i, jid in enumerate(ix.job_ids):
        if not isinstance(jid, str):
            raise UnknownIdentifier(f"job identifier {jid!r} is not a string")
        if jid in ix.jpos:
            raise DuplicateIdentifier(f"duplicate job identifier {jid!r}")
        ix.jpos[jid] = i
    ix.mpos = {}
    for k, mid in enumerate(ix.machine_ids):
        if not isinstance(mid, str):
            raise UnknownIdentifier(f"machine identifier {mid!r} is not a string")
        if mid in ix.mpos:
            raise DuplicateIdentifier(f"duplicate machine identifier {mid!r}")
        if mid in ix.jpos:
            raise DuplicateIdentifier(f"identifier {mid!r} names both a job and a machine")
        ix.mpos[mid] = k

    ix.size = []
    for j in inst.jobs:
        if not _is_int(j.size) or j.size < 1:
            raise NonPositiveSize(f"job {j.id!r} has size {j.size!r}; sizes must be integers >= 1")
        ix.size.append(int(j.size))
    ix.cap = []
    for m in inst.machines:
        if not _is_int(m.capacity) or m.capacity < 0:
            raise NegativeCapacity(
                f"machine {m.id!r} has capacity {m.capacity!r}; capacities must be integers >= 0"
            )
        ix.cap.append(int(m.capacity))

    ix.jprefs, ix.jrank = _rank_lists(inst.jobs, ix.mpos, "job", "machine")
    ix.mprefs, ix.mrank = _rank_lists(inst.machines, ix.jpos, "machine", "job")

    for i, ranks in enumerate(ix.jrank):
        for k in ranks:
            if i not in ix.mrank[k]:
                raise AsymmetricPreference(
                    f"job {ix.job_ids[i]!r} lists machine {ix.machine_ids[k]!r} "
                    "but the machine does not list the job"
                )
    for k, ranks in enumerate(ix.mrank):
        for i in ranks:
            if k not in ix.jrank[i]:
                raise AsymmetricPreference(
                    f"machine {ix.machine_ids[k]!r} lists job {ix.job_ids[i]!r} "
                    "but the job does not list the machine"
                )
    ix.n_edges = sum(len(p) for p in ix.jprefs)

    ix.ecap = {}
    for edge, c in inst.edge_capacities.items():
        jid, mid = edge
        i = ix.jpos.get(jid)
        k = ix.mpos.get(mid)
        if i is None or k is None or k not in ix.jrank[i]:
            raise EdgeCapacityOnMissingEdge(f"edge capacity given for non-edge {jid}:{mid}")
        if not _is_int(c) or c < 1:
            raise NonPositiveSize(f"edge {jid}:{mid} has capacity {c!r}; must be an integer >= 1")
        ix.ecap[(i, k)] = int(c)

    ix.dummy = -1
    if inst.dummy_machine is not None:
        d = ix.mpos.get(inst.dummy_machine)
        if d is None:
            raise InvalidDummy(f"dummy machine {inst.dummy_machine!r} is not a machine")
        for i, prefs in enumerate(ix.jprefs):
            if not prefs or prefs[-1] != d:
                raise InvalidDummy(f"dummy machine is not last for job {ix.job_ids[i]!r}")
        if ix.cap[d] != sum(ix.size):
            raise InvalidDummy("dummy capacity must equal the total job size")
        if ix.mprefs[d] != list(range(len(ix.job_ids))):
            raise InvalidDummy("dummy preference list must hold every job in declaration order")
        ix.dummy = d
    return ix


def _rank_lists(agents, other_pos, side, other_side):
    prefs_out, ranks_out = [], []
    for agent in agents:
        idx, ranks = [], {}
        for r, other in enumerate(agent.prefs):
            o = other_pos.get(other)
            if o is None:
                raise UnknownIdentifier(f"{side} {agent.id!r} lists unknown {other_side} {other!r}")
            if o in ranks:
                raise DuplicateIdentifier(
                    f"{side} {agent.id!r} lists {other_side} {other!r} twice (ties are not allowed)"
                )
            ranks[o] = r
            idx.append(o)
        prefs_out.append(idx)
        ranks_out.append(ranks)
    return prefs_out, ranks_out


class CSR(NamedTuple):
    """Flat int64 arrays for the proposal kernels.

    Machine-side arrays are laid out per machine in preference order; ``m_jrank``
    holds the job-side rank of each such edge. Job-side arrays likewise, with
    ``j_mpos`` pointing at the same edge's slot in the machine-side layout.
    """

    sizes: np.ndarray
    caps: np.ndarray
    m_ptr: np.ndarray
    m_adj: np.ndarray
    m_jrank: np.ndarray
    j_ptr: np.ndarray
    j_adj: np.ndarray
    j_mpos: np.ndarray


def _build_csr(ix: _Index) -> CSR:
    n_j, n_m = len(ix.job_ids), len(ix.machine_ids)
    m_ptr = np.zeros(n_m + 1, dtype=np.int64)
    m_ptr[1:] = np.cumsum([len(p) for p in ix.mprefs])
    j_ptr = np.zeros(n_j + 1, dtype=np.int64)
    j_ptr[1:] = np.cumsum([len(p) for p in ix.jprefs])
    m_adj = np.fromiter((i for p in ix.mprefs for i in p), dtype=np.int64, count=ix.n_edges)
    j_adj = np.fromiter((k for p in ix.jprefs for k in p), dtype=np.int64, count=ix.n_edges)
    m_owner = np.repeat(np.arange(n_m, dtype=np.int64), np.diff(m_ptr))
    j_owner = np.repeat(np.arange(n_j, dtype=np.int64), np.diff(j_ptr))
    j_rank = np.arange(ix.n_edges, dtype=np.int64) - j_ptr[j_owner]
    # pair up the two layouts by sorting on the (job, machine) key
    m_key = m_adj * n_m + m_owner
    j_key = j_owner * n_m + j_adj
    m_order = np.argsort(m_key, kind="stable")
    j_order = np.argsort(j_key, kind="stable")
    m_jrank = np.empty(ix.n_edges, dtype=np.int64)
    m_jrank[m_order] = j_rank[j_order]
    j_mpos = np.empty(ix.n_edges, dtype=np.int64)
    j_mpos[j_order] = m_order
    return CSR(
        sizes=np.asarray(ix.size, dtype=np.int64),
        caps=np.asarray(ix.cap, dtype=np.int64),
        m_ptr=m_ptr, m_adj=m_adj, m_jrank=m_jrank,
        j_ptr=j_ptr, j_adj=j_adj, j_mpos=j_mpos,
    )


def validate_instance(raw: Union[Mapping, Instance]) -> Instance:
    """Build a validated :class:`Instance` from the plain-dict schema.

    Mismatched preference lists are reported, never pruned.
    """
    if isinstance(raw, Instance):
        return Instance(raw.jobs, raw.machines, raw.edge_capacities, raw.dummy_machine)
    try:
        jobs = tuple(Job(j["id"], j["size"], tuple(j.get("prefs", ()))) for j in raw["jobs"])
        machines = tuple(
            Machine(m["id"], m["capacity"], tuple(m.get("prefs", ()))) for m in raw["machines"]
        )
    except (KeyError, TypeError) as exc:
        raise UnknownIdentifier(f"malformed instance record: {exc!r}") from None
    ecaps: dict[Edge, int] = {}
    job_ids = {j.id for j in jobs}
    machine_ids = {m.id for m in machines}
    for key, c in (raw.get("edge_capacities") or {}).items():
        ecaps[_split_edge_key(key, job_ids, machine_ids)] = c
    return Instance(jobs, machines, ecaps, raw.get("dummy_machine"))


def _split_edge_key(key, job_ids, machine_ids) -> Edge:
    if isinstance(key, tuple):
        return key
    candidates = [
        (key[:p], key[p + 1:]) for p, ch in enumerate(key) if ch == ":"
    ]
    matches = [c for c in candidates if c[0] in job_ids and c[1] in machine_ids]
    if len(matches) == 1:
        return matches[0]
    if candidates:
        return candidates[0]
    raise EdgeCapacityOnMissingEdge(f"edge key {key!r} is not of the form 'job:machine'")


class Allocation(Mapping):
    """Immutable map edge -> positive integer amount. Absent edges carry zero."""

    __slots__ = ("_amounts",)

    def __init__(self, amounts: Union[Mapping[Edge, int], Iterable[tuple[Edge, int]]] = ()):
        items = amounts.items() if isinstance(amounts, Mapping) else amounts
        clean: dict[Edge, int] = {}
        for edge, amount in items:
            if not _is_int(amount) or amount < 0:
                raise AllocationError(f"amount on {format_edge(edge)} must be a non-negative integer")
            if amount:
                clean[tuple(edge)] = int(amount)  # type: ignore[index]
        self._amounts = clean

    def __getitem__(self, edge: Edge) -> int:
        return self._amounts[edge]

    def __iter__(self):
        return iter(self._amounts)

    def __len__(self) -> int:
        return len(self._amounts)

    def __eq__(self, other) -> bool:
        if isinstance(other, Allocation):
            return self._amounts == other._amounts
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._amounts.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{format_edge(e)}={a}" for e, a in self._amounts.items())
        return f"Allocation({body})"

    def amount(self, job: str, machine: str) -> int:
        return self._amounts.get((job, machine), 0)

    def job_load(self, job: str) -> int:
        return sum(a for (j, _), a in self._amounts.items() if j == job)

    def machine_load(self, machine: str) -> int:
        return sum(a for (_, m), a in self._amounts.items() if m == machine)

    def updated(self, deltas: Mapping[Edge, int]) -> Allocation:
        amounts = dict(self._amounts)
        for edge, d in deltas.items():
            amounts[edge] = amounts.get(edge, 0) + d
        return Allocation(amounts)

    @classmethod
    def from_assignment(cls, instance: Instance, assignment: UnsplitAssignment) -> Allocation:
        return cls({(j, m): instance.size(j) for j, m in assignment.items()})


class UnsplitAssignment(Mapping):
    """Immutable map job -> machine. Unassigned jobs are simply absent.

    ``get(job)`` returns ``None`` for an unassigned job, which is the canonical
    representation; a dummy machine never appears in an assignment.
    """

    __slots__ = ("_machine_of",)

    def __init__(self, mapping: Union[Mapping[str, str | None], Iterable[tuple[str, str | None]]] = ()):
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        self._machine_of = {j: m for j, m in items if m is not None}

    def __getitem__(self, job: str) -> str:
        return self._machine_of[job]

    def __iter__(self):
        return iter(self._machine_of)

    def __len__(self) -> int:
        return len(self._machine_of)

    def __eq__(self, other) -> bool:
        if isinstance(other, UnsplitAssignment):
            return self._machine_of == other._machine_of
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._machine_of.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{j}->{m}" for j, m in self._machine_of.items())
        return f"UnsplitAssignment({body})"

    def as_dict(self, instance: Instance) -> dict[str, str | None]:
        return {j: self._machine_of.get(j) for j in instance.job_ids}

    def to_allocation(self, instance: Instance) -> Allocation:
        return Allocation.from_assignment(instance, self)

    @classmethod
    def from_allocation(cls, instance: Instance, allocation: Allocation) -> UnsplitAssignment:
        """Inverse of :meth:`to_allocation`; amounts on the dummy machine mean unassigned."""
        out: dict[str, str] = {}
        for (j, m), a in allocation.items():
            instance._edge(j, m)
            if m == instance.dummy_machine:
                continue
            if a != instance.size(j):
                raise AllocationError(f"{format_edge((j, m))} carries {a}, not the full job size")
            if j in out:
                raise AllocationError(f"job {j!r} is split across machines")
            out[j] = m
        return cls(out)


class StabilityMode(str, enum.Enum):
    FRACTIONAL = "fractional"
    RELAXED_UNSPLIT = "relaxed_unsplit"


class Violation(NamedTuple):
    kind: str
    entity: str
    detail: str


@dataclass(frozen=True)
class StabilityReport:
    mode: StabilityMode
    feasibility_violations: tuple[Violation, ...] = ()
    blocking_edges: tuple[Edge, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.feasibility_violations and not self.blocking_edges


class Saturation(str, enum.Enum):
    UNDER = "under"
    SATURATED = "saturated"
    OVER_CAPACITATED = "over_capacitated"


class MachineStatus(NamedTuple):
    saturation: Saturation
    popular: bool


class Preference(str, enum.Enum):
    PREFERS_X1 = "prefers_x1"
    PREFERS_X2 = "prefers_x2"
    EQUAL = "equal"


AnyAllocation = Union[Allocation, UnsplitAssignment]


def _amounts(instance: Instance, x: AnyAllocation) -> dict[tuple[int, int], int]:
    """Index-keyed amounts; raises UnknownEdge for edges outside the instance."""
    if isinstance(x, UnsplitAssignment):
        x = Allocation.from_assignment(instance, x)
    out = {}
    for (j, m), a in x.items():
        out[instance._edge(j, m)] = a
    return out


def _assigned(instance: Instance, x: AnyAllocation) -> list[int]:
    """Machine index per job (-1 when unassigned); checks every listing."""
    if isinstance(x, Allocation):
        x = UnsplitAssignment.from_allocation(instance, x)
    ix = instance.ix
    out = [-1] * len(ix.job_ids)
    for j, m in x.items():
        i = ix.jpos.get(j)
        if i is None:
            raise UnknownIdentifier(f"unknown job {j!r}")
        k = ix.mpos.get(m)
        if k is None or k not in ix.jrank[i]:
            raise AssignedToUnlistedMachine(f"job {j!r} is assigned to {m!r}, which it does not list")
        if k != ix.dummy:
            out[i] = k
    return out


def total_size(instance: Instance, x: AnyAllocation) -> int:
    """|x|: total amount on edges to real machines."""
    d = instance.ix.dummy
    return sum(a for (_, k), a in _amounts(instance, x).items() if k != d)


def _machine_loads(instance: Instance, amounts) -> list[int]:
    loads = [0] * len(instance.ix.machine_ids)
    for (_, k), a in amounts.items():
        loads[k] += a
    return loads


def total_congestion(instance: Instance, x: AnyAllocation) -> int:
    ix = instance.ix
    loads = _machine_loads(instance, _amounts(instance, x))
    return sum(max(0, loads[k] - ix.cap[k]) for k in range(len(loads)) if k != ix.dummy)


def check_fractional_feasibility(instance: Instance, x: AnyAllocation) -> StabilityReport:
    ix = instance.ix
    amounts = _amounts(instance, x)
    out: list[Violation] = []
    job_loads = [0] * len(ix.job_ids)
    for (i, k), a in sorted(amounts.items()):
        c = ix.edge_cap(i, k)
        if a > c:
            out.append(Violation("edge_capacity", format_edge((ix.job_ids[i], ix.machine_ids[k])),
                                 f"{a} > {c}"))
        job_loads[i] += a
    for i, load in enumerate(job_loads):
        if load > ix.size[i]:
            out.append(Violation("job_size", ix.job_ids[i], f"{load} > {ix.size[i]}"))
    for k, load in enumerate(_machine_loads(instance, amounts)):
        if k != ix.dummy and load > ix.cap[k]:
            out.append(Violation("machine_capacity", ix.machine_ids[k], f"{load} > {ix.cap[k]}"))
    return StabilityReport(StabilityMode.FRACTIONAL, tuple(out))


def _relaxed_violations(ix: _Index, assigned: list[int]) -> list[Violation]:
    load = [0] * len(ix.machine_ids)
    worst = [-1] * len(ix.machine_ids)
    for i, k in enumerate(assigned):
        if k < 0:
            continue
        load[k] += ix.size[i]
        if worst[k] < 0 or ix.mrank[k][i] > ix.mrank[k][worst[k]]:
            worst[k] = i
    out = []
    for k, w in enumerate(worst):
        if w >= 0 and load[k] - ix.size[w] >= ix.cap[k]:
            out.append(Violation(
                "relaxed_capacity", ix.machine_ids[k],
                f"load {load[k]} without worst job {ix.job_ids[w]!r} is {load[k] - ix.size[w]}"
                f" >= capacity {ix.cap[k]}",
            ))
    return out


def check_relaxed_unsplit_feasibility(instance: Instance, x: AnyAllocation) -> StabilityReport:
    """Each machine must drop strictly below capacity once its worst assignee leaves."""
    violations = _relaxed_violations(instance.ix, _assigned(instance, x))
    return StabilityReport(StabilityMode.RELAXED_UNSPLIT, tuple(violations))


def _relaxed_blocking(ix: _Index, assigned: list[int]) -> list[tuple[int, int]]:
    held: list[list[int]] = [[] for _ in ix.machine_ids]
    for i, k in enumerate(assigned):
        if k >= 0:
            held[k].append(i)
    out = []
    for i, prefs in enumerate(ix.jprefs):
        k0 = assigned[i]
        stop = ix.jrank[i][k0] if k0 >= 0 else len(prefs)
        for k in prefs[:stop]:
            if k == ix.dummy:
                continue
            r = ix.mrank[k][i]
            better = sum(ix.size[h] for h in held[k] if ix.mrank[k][h] < r)
            if better < ix.cap[k]:
                out.append((i, k))
    return out


def _fractional_blocking(ix: _Index, amounts: dict[tuple[int, int], int]) -> list[tuple[int, int]]:
    job_prefix: dict[tuple[int, int], int] = {}
    for i, prefs in enumerate(ix.jprefs):
        acc = 0
        for k in prefs:
            acc += amounts.get((i, k), 0)
            job_prefix[(i, k)] = acc
    mach_prefix: dict[tuple[int, int], int] = {}
    for k, prefs in enumerate(ix.mprefs):
        acc = 0
        for i in prefs:
            acc += amounts.get((i, k), 0)
            mach_prefix[(i, k)] = acc
    out = []
    for i, prefs in enumerate(ix.jprefs):
        for k in prefs:
            if k == ix.dummy:
                continue
            if amounts.get((i, k), 0) >= ix.edge_cap(i, k):
                continue
            if job_prefix[(i, k)] >= ix.size[i] or mach_prefix[(i, k)] >= ix.cap[k]:
                continue
            out.append((i, k))
    return out


def blocking_edges(instance: Instance, x: AnyAllocation, mode: StabilityMode | str) -> list[Edge]:
    """Edges that block ``x`` under ``mode``, in job order then job rank.

    ``x`` must already be feasible in the matching sense (fractional or
    relaxed unsplit); otherwise :class:`InfeasibleInput` is raised.
    """
    mode = StabilityMode(mode)
    ix = instance.ix
    if mode is StabilityMode.FRACTIONAL:
        report = check_fractional_feasibility(instance, x)
        if report.feasibility_violations:
            raise InfeasibleInput(f"allocation is not feasible: {report.feasibility_violations}")
        found = _fractional_blocking(ix, _amounts(instance, x))
    else:
        assigned = _assigned(instance, x)
        violations = _relaxed_violations(ix, assigned)
        if violations:
            raise InfeasibleInput(f"assignment is not relaxed-feasible: {violations}")
        found = _relaxed_blocking(ix, assigned)
    return [(ix.job_ids[i], ix.machine_ids[k]) for i, k in found]


def stability_report(instance: Instance, x: AnyAllocation, mode: StabilityMode | str) -> StabilityReport:
    """Feasibility violations, plus blocking edges when ``x`` is feasible."""
    mode = StabilityMode(mode)
    if mode is StabilityMode.FRACTIONAL:
        feas = check_fractional_feasibility(instance, x)
    else:
        feas = check_relaxed_unsplit_feasibility(instance, x)
    if feas.feasibility_violations:
        return feas
    return StabilityReport(mode, (), tuple(blocking_edges(instance, x, mode)))


def lex_compare_machine(instance: Instance, x1: AnyAllocation, x2: AnyAllocation, machine: str) -> Preference:
    """Which of two unsplit assignments ``machine`` prefers, lexicographically.

    The side owning the machine's best-ranked edge in the symmetric difference
    wins; an empty difference means the machine is indifferent.
    """
    k = instance.ix.mpos.get(machine)
    if k is None:
        raise UnknownMachine(f"unknown machine {machine!r}")
    a1, a2 = _assigned(instance, x1), _assigned(instance, x2)
    s1 = {i for i, m in enumerate(a1) if m == k}
    s2 = {i for i, m in enumerate(a2) if m == k}
    diff = s1 ^ s2
    if not diff:
        return Preference.EQUAL
    best = min(diff, key=instance.ix.mrank[k].__getitem__)
    return Preference.PREFERS_X1 if best in s1 else Preference.PREFERS_X2


def job_position(instance: Instance, x: AnyAllocation, job: str) -> int:
    """Rank of the job's machine in ``x``; unassigned ranks after every listed machine."""
    i = instance._job(job)
    k = _assigned(instance, x)[i]
    return instance.ix.jrank[i][k] if k >= 0 else len(instance.ix.jprefs[i])


def classify_machines(instance: Instance, x: AnyAllocation) -> dict[str, MachineStatus]:
    ix = instance.ix
    amounts = _amounts(instance, x)
    loads = _machine_loads(instance, amounts)
    job_loads = [0] * len(ix.job_ids)
    worst_rank = [-1] * len(ix.job_ids)
    for (i, k), a in amounts.items():
        job_loads[i] += a
        worst_rank[i] = max(worst_rank[i], ix.jrank[i][k])
    popular = [False] * len(ix.machine_ids)
    for i, prefs in enumerate(ix.jprefs):
        # unallocated load sits below every listed machine
        limit = len(prefs) if job_loads[i] < ix.size[i] else worst_rank[i]
        for k in prefs[:max(limit, 0)]:
            popular[k] = True
    out = {}
    for k, mid in enumerate(ix.machine_ids):
        if loads[k] > ix.cap[k]:
            sat = Saturation.OVER_CAPACITATED
        elif loads[k] == ix.cap[k]:
            sat = Saturation.SATURATED
        else:
            sat = Saturation.UNDER
        out[mid] = MachineStatus(sat, popular[k] and k != ix.dummy)
    return out
