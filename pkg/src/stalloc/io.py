"""JSON instance format, canonical serialization, and random instance generation.

Instance schema::

    {"jobs": [{"id": str, "size": int, "prefs": [str, ...]}, ...],
     "machines": [{"id": str, "capacity": int, "prefs": [str, ...]}, ...],
     "edge_capacities": {"<job>:<machine>": int, ...}}      # optional

The serializer is canonical: fixed field order, one agent per line, edge
capacity keys sorted, trailing newline. ``serialize(parse(text)) == text`` for
any text the serializer produced.
"""

from __future__ import annotations

import json
import random
from collections.abc import Iterator, Mapping
from importlib import resources

from .errors import InstanceSyntaxError, InvalidParameters
from .model import (
    Allocation,
    Instance,
    Job,
    Machine,
    UnsplitAssignment,
    _split_edge_key,
    format_edge,
    validate_instance,
)

FIXTURES = ("fig1", "fig2ul", "fig2ll", "fig2mid", "fig2r")


def parse_instance(text: str) -> Instance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(raw, Mapping) or "jobs" not in raw or "machines" not in raw:
        raise InstanceSyntaxError("top level must be an object with 'jobs' and 'machines'", 1, 1)
    return validate_instance(raw)


def _line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def serialize_instance(instance: Instance) -> str:
    raw = instance.to_raw()
    parts = ["{"]
    sections = []
    for key in ("jobs", "machines"):
        rows = ",\n".join(f"    {_line(row)}" for row in raw[key])
        sections.append(f'  "{key}": [\n{rows}\n  ]' if rows else f'  "{key}": []')
    if "edge_capacities" in raw:
        rows = ",\n".join(f"    {_line(k)}: {v}" for k, v in raw["edge_capacities"].items())
        sections.append(f'  "edge_capacities": {{\n{rows}\n  }}')
    if "dummy_machine" in raw:
        sections.append(f'  "dummy_machine": {_line(raw["dummy_machine"])}')
    parts.append(",\n".join(sections))
    parts.append("}")
    return "\n".join(parts) + "\n"


def load_fixture(name: str) -> Instance:
    """One of the bundled figure instances (provenance in fixtures/README.md)."""
    return parse_instance(fixture_text(name))


def fixture_text(name: str) -> str:
    return resources.files("stalloc").joinpath("fixtures", f"{name}.json").read_text("utf-8")


def generate_instance(
    n_jobs: int,
    n_machines: int,
    max_size: int,
    max_capacity: int,
    density: float,
    seed: int,
) -> Instance:
    """Random instance: each job-machine pair is an edge with probability ``density``.

    Sizes and capacities are uniform in ``[1, max]``; both sides rank their
    edges in uniformly random order. Identical arguments give identical
    instances.
    """
    if min(n_jobs, n_machines, max_size, max_capacity) < 1 or not 0 < density <= 1:
        raise InvalidParameters(
            "need positive counts and bounds and 0 < density <= 1, got "
            f"{(n_jobs, n_machines, max_size, max_capacity, density)}"
        )
    rng = random.Random(seed)
    job_ids = [f"j{i + 1}" for i in range(n_jobs)]
    machine_ids = [f"m{k + 1}" for k in range(n_machines)]
    sizes = [rng.randint(1, max_size) for _ in job_ids]
    caps = [rng.randint(1, max_capacity) for _ in machine_ids]
    job_edges: list[list[str]] = [[] for _ in job_ids]
    machine_edges: list[list[str]] = [[] for _ in machine_ids]
    for i in range(n_jobs):
        for k in range(n_machines):
            if density >= 1 or rng.random() < density:
                job_edges[i].append(machine_ids[k])
                machine_edges[k].append(job_ids[i])
    for prefs in job_edges:
        rng.shuffle(prefs)
    for prefs in machine_edges:
        rng.shuffle(prefs)
    return Instance(
        tuple(Job(j, s, tuple(p)) for j, s, p in zip(job_ids, sizes, job_edges)),
        tuple(Machine(m, c, tuple(p)) for m, c, p in zip(machine_ids, caps, machine_edges)),
    )


def random_small_instances(
    count: int,
    seed: int = 0,
    max_jobs: int = 6,
    max_machines: int = 4,
    max_quantity: int = 3,
) -> Iterator[Instance]:
    """Deterministic stream of small instances for oracle comparisons."""
    rng = random.Random(seed)
    for _ in range(count):
        yield generate_instance(
            rng.randint(1, max_jobs),
            rng.randint(1, max_machines),
            max_quantity,
            max_quantity,
            rng.choice((0.5, 0.7, 0.85, 1.0)),
            rng.getrandbits(32),
        )


def assignment_to_json(instance: Instance, x: UnsplitAssignment) -> dict[str, str | None]:
    return x.as_dict(instance)


def assignment_from_json(instance: Instance, data: Mapping) -> UnsplitAssignment:
    """Accepts a bare ``{job: machine|null}`` map or a result object holding one."""
    if "assignment" in data and isinstance(data["assignment"], Mapping):
        data = data["assignment"]
    return UnsplitAssignment({j: m for j, m in data.items() if m is not None})


def allocation_to_json(x: Allocation) -> dict[str, int]:
    return {format_edge(e): a for e, a in x.items()}


def allocation_from_json(instance: Instance, data: Mapping) -> Allocation:
    """Accepts ``{"job:machine": amount}`` or a result object with an ``allocation`` key."""
    if "allocation" in data and isinstance(data["allocation"], Mapping):
        data = data["allocation"]
    jobs, machines = set(instance.job_ids), set(instance.machine_ids)
    return Allocation({_split_edge_key(k, jobs, machines): a for k, a in data.items()})
