"""Exception types shared across the package.

The class names double as the error identifiers listed in the CLI docs:
each names the violated contract, not the module that raised it.
"""


class PoissonKitaevError(Exception):
    """Base class for all package errors."""


# --- graph structure ---

class UnknownReference(PoissonKitaevError):
    """An edge, vertex or face id does not exist in the graph."""


class UnknownVertex(UnknownReference):
    pass


class UnknownFace(UnknownReference):
    pass


class NotAFacePath(PoissonKitaevError):
    """A declared face path is not a maximal-right-turn cycle of the graph."""


class UncoveredEdgeSide(PoissonKitaevError):
    """The declared faces do not cover every edge side exactly once."""


class Disconnected(PoissonKitaevError):
    """The underlying graph is not connected."""


class NonIntegerGenus(PoissonKitaevError):
    """Euler characteristic bookkeeping produced a non-integer genus."""


class InvalidSite(PoissonKitaevError):
    """A (vertex, face) pair does not satisfy the site condition."""


class NotASite(InvalidSite):
    pass


class PreconditionViolated(PoissonKitaevError):
    """A graph move was attempted on a configuration that does not admit it."""


class MoveReplayError(PoissonKitaevError):
    """A move script could not be replayed on the given graph or point."""


class InvalidPath(PoissonKitaevError):
    """A word in the thickened-graph generators does not chain up."""


class NotClosed(InvalidPath):
    """A path expected to be a loop has distinct endpoints."""


# --- group backends ---

class SingularPairing(PoissonKitaevError):
    """The bilinear pairing between the two subalgebras is degenerate."""


class FactorizationFailed(PoissonKitaevError):
    """Numerical breakdown while splitting g into its two subgroup factors."""


class LogOutOfRange(PoissonKitaevError):
    """Group logarithm requested outside the backend's injectivity radius."""


class NotInPlusSubgroup(PoissonKitaevError):
    pass


class NotInMinusSubgroup(PoissonKitaevError):
    pass


# --- phase-space operations ---

class NotPaired(PoissonKitaevError):
    """Operation requires a paired graph (every vertex and face in a site)."""


class NotFlatAtVertex(PoissonKitaevError):
    """Hypothesis of a flat-subspace identity is not met at the given point."""


class NoFreeSite(PoissonKitaevError):
    """Flat sampling needs a vertex and adjacent face without constraints."""


class NoUniqueSolution(PoissonKitaevError):
    """A holonomy constraint does not determine the unknown edge uniquely."""


# --- numerical harness ---

class DimensionMismatch(PoissonKitaevError):
    """A field or tensor was used with an engine of different dimension."""


class HypothesisUnmet(PoissonKitaevError):
    """A named property check does not apply to the given graph/backend."""
