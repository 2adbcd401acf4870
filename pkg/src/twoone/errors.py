"""Exception hierarchy.

Every error raised on purpose by the library derives from ``TwoOneError`` so
the CLI can map domain failures to exit status 1 in one place.
"""


class TwoOneError(Exception):
    """Base class for domain errors."""


class OutsideDomain(TwoOneError):
    """An element outside the structure's domain was evaluated."""


class StructureViolation(TwoOneError):
    """Some element was found to have three or more preimages."""


class OracleViolation(TwoOneError):
    """A bounded search contradicted a supplied oracle value."""


class MissingOracle(TwoOneError):
    """An operation needs an oracle the structure does not carry."""


class NotCyclic(TwoOneError):
    """An element claimed to be cyclic does not return to itself."""


class CyclicRoot(TwoOneError):
    """A tree operation was given a cyclic root where a non-cyclic one is required."""


class NotATree(TwoOneError):
    """A slice over a cyclic root was passed where a genuine tree is needed."""


class DepthMismatch(TwoOneError):
    """Two truncations of different depth were compared."""


class TooLarge(TwoOneError):
    """Input exceeds the size limit of a brute-force routine."""


class OracleMismatch(TwoOneError):
    """Paired elements disagree on branching, so the inputs are not isomorphic."""


class SeparationFailure(TwoOneError):
    """No separating level was found within the configured cap."""


class IncompleteMatching(TwoOneError):
    """Cycles of some length could not be paired between two structures."""

    def __init__(self, message, unmatched_a=(), unmatched_b=()):
        super().__init__(message)
        self.unmatched_a = list(unmatched_a)
        self.unmatched_b = list(unmatched_b)


class UnknownIndex(TwoOneError):
    """A registry index outside ``0..len-1`` was simulated."""


class ElementBudgetExceeded(TwoOneError):
    """A construction stage would allocate more elements than allowed."""


class SpecError(TwoOneError):
    """A structure or registry file is malformed."""
