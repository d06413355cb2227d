"""Relaxed unsplittable stable allocation: solvers, rounding and a brute-force oracle."""

from __future__ import annotations

from . import errors
from .errors import AllocationError, InstanceError, RoundingError, StallocError
from .fractional import DUMMY_ID, solve_fractional_stable, with_dummy
from .io import generate_instance, load_fixture, parse_instance, random_small_instances, serialize_instance
from .model import (
    Allocation,
    Instance,
    Job,
    Machine,
    MachineStatus,
    Preference,
    Saturation,
    StabilityMode,
    StabilityReport,
    UnsplitAssignment,
    Violation,
    blocking_edges,
    check_fractional_feasibility,
    check_relaxed_unsplit_feasibility,
    classify_machines,
    job_position,
    lex_compare_machine,
    stability_report,
    total_congestion,
    total_size,
    validate_instance,
)
from .oracle import TheoremReport, enumerate_fractional_stable, enumerate_relaxed_stable, verify_structure
from .rounding import Rotation, RotationKind, compute_pointers, find_rotation, round_to_unsplit
from .solvers import (
    SolverTrace,
    UnsplitDecision,
    decide_unsplit_existence,
    solve_job_optimal,
    solve_machine_optimal,
)

__version__ = "0.1.0"
