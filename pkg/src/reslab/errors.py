"""Exception hierarchy for reslab.

Everything raised on purpose derives from ReslabError so the CLI can map
failures to exit codes without fishing through library exceptions.
"""


class ReslabError(Exception):
    """Base class for all reslab errors."""


# --- configuration / potential construction ---

class ParseError(ReslabError):
    """Malformed config text or core-term grammar."""


class InvalidPotential(ParseError):
    """Spec parses but violates a structural requirement (tail exponent
    range, no finite global minimum, infeasible glue)."""


class OutsideAnalyticityCone(ReslabError):
    """Requested rotation angle exceeds the analyticity half-angle."""


class InsideCore(ReslabError):
    """Complex continuation requested at a radius the contour never maps."""


class FitFailed(ReslabError):
    """Tail fit impossible (vanishing or non-monotone data)."""


class HypothesesNotVerified(ReslabError):
    """A quantity was requested from a report whose checks did not pass."""


# --- well analysis ---

class NoMinimum(ReslabError):
    """F has no local minimum on the scanned domain."""


class TieAtGlobalMin(ReslabError):
    """Two minima at the same depth; the global minimum must be unique."""


class OutOfDomain(ReslabError):
    pass


class TooLarge(ReslabError):
    """Brute-force enumeration refused (grid beyond the feasible size)."""


class DegenerateDepths(ReslabError):
    """Two critical depths coincide; strict ordering is assumed."""


class QuadratureFailure(ReslabError):
    pass


# --- operator assembly ---

class GridTooCoarse(ReslabError):
    pass


class ConeViolation(OutsideAnalyticityCone):
    """Contour angle outside the verified cone at assembly time."""


class TruncationTooTight(ReslabError):
    """Truncation radius does not damp the outgoing wave enough."""


# --- solvers ---

class ClusterUnresolved(ReslabError):
    """Eigenvalue gap at the end of the requested window below tolerance."""


class SingularShift(ReslabError):
    pass


class NoConvergence(ReslabError):
    pass


class ResonanceNotFound(ReslabError):
    """No converged eigenvalue inside the seed disk (per-seed, not fatal)."""


# --- symbol scans ---

class EmptyGrid(ReslabError):
    pass


class RegionEmpty(ReslabError):
    """Non-trapping scan region is empty (spectral parameter too large)."""


# --- pipeline ---

class InsufficientPoints(ReslabError):
    pass


class NonPositiveEigenvalue(ReslabError):
    pass


class IoError(ReslabError):
    pass
