"""Exception hierarchy for instance validation and solver preconditions."""

from __future__ import annotations


class StallocError(Exception):
    """Base class for every error raised by this package."""


class InstanceError(StallocError, ValueError):
    """The instance violates a structural invariant."""


class DuplicateIdentifier(InstanceError):
    pass


class UnknownIdentifier(InstanceError):
    pass


class AsymmetricPreference(InstanceError):
    pass


class NonPositiveSize(InstanceError):
    pass


class NegativeCapacity(InstanceError):
    pass


class EdgeCapacityOnMissingEdge(InstanceError):
    pass


class InvalidDummy(InstanceError):
    pass


class DummyAlreadyPresent(InstanceError):
    pass


class MissingDummy(InstanceError):
    pass


class InstanceSyntaxError(InstanceError):
    """Malformed instance text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class AllocationError(StallocError, ValueError):
    pass


class UnknownEdge(AllocationError):
    pass


class UnknownMachine(AllocationError):
    pass


class AssignedToUnlistedMachine(AllocationError):
    pass


class InfeasibleInput(AllocationError):
    pass


class NotFullyAllocated(AllocationError):
    pass


class UnstableInput(AllocationError):
    pass


class UnsupportedEdgeCapacity(AllocationError):
    pass


class RoundingError(StallocError, RuntimeError):
    """Internal inconsistency in the rotation machinery."""


class InconsistentPointers(RoundingError):
    pass


class ZeroEpsilon(RoundingError):
    pass


class SearchSpaceTooLarge(StallocError):
    pass


class InvalidParameters(StallocError, ValueError):
    pass
