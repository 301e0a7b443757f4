"""Exception types shared across the package.

Every error raised on a bad input or a violated invariant derives from
:class:`NbcutoffError`, so callers can catch one base class at the boundary
(the CLI maps them to exit code 2).
"""


class NbcutoffError(Exception):
    """Base class for all package-specific errors."""


# --- degree sequences ---------------------------------------------------


class OddHalfEdgeCount(NbcutoffError):
    """The degree sum is odd, so no perfect matching of half-edges exists."""


class DegreeTooSmall(NbcutoffError):
    """A vertex has degree below 3 and small degrees were not allowed."""


class UnsupportedDegree(NbcutoffError):
    """A degree distribution puts mass below 3 without the override flag."""


class ParityRetriesExhausted(NbcutoffError):
    """Re-drawing the last degree never produced an even half-edge total."""


class QuantileOutOfRange(NbcutoffError):
    """Tail quantile requested at a probability outside (0, 1)."""


class DegenerateStats(NbcutoffError):
    """A statistic is undefined for this sequence (e.g. empty input)."""


class DegenerateSigma(NbcutoffError):
    """sigma^2 = 0 (regular sequence): the CLT-based check is undefined."""


# --- pairings -----------------------------------------------------------


class AlreadyPaired(NbcutoffError):
    """Attempted to pair a half-edge that already has a mate."""


class NoUnpairedLeft(NbcutoffError):
    """A mate was requested but no other unpaired half-edge remains."""


class OddResidue(NbcutoffError):
    """A partial pairing leaves an odd number of unpaired half-edges."""


class IncompletePairing(NbcutoffError):
    """An operation requiring a complete pairing got a partial one."""


class NotPaired(NbcutoffError):
    """A switch touched a half-edge with no mate."""


# --- walks --------------------------------------------------------------


class SymmetryViolation(NbcutoffError):
    """The transition kernel failed its exact symmetry check (a bug)."""


class MassConservationError(NbcutoffError):
    """A probability vector drifted away from total mass 1 during a step."""


class CurveTooShort(NbcutoffError):
    """The distance curve never dropped below the requested threshold."""


# --- orchestration ------------------------------------------------------


class BudgetExceeded(NbcutoffError):
    """The configured operation budget cannot cover the requested run."""
