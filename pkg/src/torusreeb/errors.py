"""Exception types shared across the package.

The service layer maps these onto stable process exit codes / HTTP error
payloads, so new failure modes should subclass one of the four categories
below rather than raising bare ValueErrors.
"""

from __future__ import annotations


class TorusReebError(Exception):
    """Base class for all package errors."""


# -- ingestion / parsing (exit code 1) --------------------------------------

class IngestionError(TorusReebError):
    pass


class FieldSyntaxError(IngestionError):
    """Raised by the expression parser; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class NotPeriodic(IngestionError):
    pass


class InvalidResolution(IngestionError):
    pass


class NonFiniteField(IngestionError):
    pass


# -- degenerate input (exit code 2) ------------------------------------------

class DegenerateError(TorusReebError):
    pass


class DegenerateCritical(DegenerateError):
    pass


# -- topology / precondition violations (exit code 3) ------------------------

class TopologyError(TorusReebError):
    pass


class CriticalLevel(TopologyError):
    pass


class NoCrossing(TopologyError):
    pass


class MultipleCycles(TopologyError):
    pass


class NoCycle(TopologyError):
    pass


class NotInvariant(TopologyError):
    pass


class UnsupportedField(TopologyError):
    pass


class NonBijective(TopologyError):
    pass


class NotFixedOnCurves(TopologyError):
    pass


class NotDiffeo(TopologyError):
    pass


class NotCurvePreserving(TopologyError):
    pass


class NonUniformShift(TopologyError):
    pass


class DiscontinuousLift(TopologyError):
    pass


class NotInDelta(TopologyError):
    pass


class DomainError(TopologyError):
    pass


# -- group algebra misuse (exit code 3 as well) -------------------------------

class MixedContext(TorusReebError):
    pass


class WrongContext(TorusReebError):
    pass


class NotAbelian(TorusReebError):
    pass


class InvalidIndex(TorusReebError):
    pass


# -- verification (exit code 4) -----------------------------------------------

class VerificationFailure(TorusReebError):
    pass


EXIT_INGESTION = 1
EXIT_DEGENERATE = 2
EXIT_TOPOLOGY = 3
EXIT_VERIFICATION = 4


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, IngestionError):
        return EXIT_INGESTION
    if isinstance(exc, DegenerateError):
        return EXIT_DEGENERATE
    if isinstance(exc, VerificationFailure):
        return EXIT_VERIFICATION
    return EXIT_TOPOLOGY
