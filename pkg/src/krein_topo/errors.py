"""Exception hierarchy for :mod:`krein_topo`.

Every failure mode that the library can detect has its own exception class so
that callers (and the command line front end) can react to it precisely.  All
classes derive from :class:`KreinTopoError`.
"""

from __future__ import annotations


class KreinTopoError(Exception):
    """Base class of all library errors."""


# --- krein-core -------------------------------------------------------------


class DimensionMismatch(KreinTopoError, ValueError):
    """Matrices that must act on the same space have different shapes."""


class SingularInput(KreinTopoError, ValueError):
    """A matrix that must be invertible is numerically singular."""


class DegenerateForm(KreinTopoError):
    """The Krein form restricted to a spectral subspace has a (near) zero eigenvalue."""


class NotIsolated(KreinTopoError):
    """A spectral cluster is not separated from the rest of the spectrum."""


class SymmetryViolated(KreinTopoError):
    """A symmetry relation that is required by the requested invariant fails."""


class InvalidSymmetry(KreinTopoError, ValueError):
    """A matrix offered as a symmetry is not a real unitary squaring to +-1."""


# --- normal forms -----------------------------------------------------------


class OddDimension(KreinTopoError, ValueError):
    """A block construction requires two blocks of equal size."""


class InconsistentSigns(KreinTopoError, ValueError):
    """Two symmetries neither commute nor anti-commute."""


class SingularBlock(KreinTopoError):
    """A block of a chiral reduction is numerically singular."""


# --- spectral ---------------------------------------------------------------


class IllConditioned(KreinTopoError):
    """A spectral projection is too ill conditioned to be trusted."""


class ConvergenceFailure(KreinTopoError):
    """An eigensolver or an invariant subspace computation failed."""


class BadParams(KreinTopoError, ValueError):
    """Invalid parameters for a matrix family or model constructor."""


# --- tight binding ----------------------------------------------------------


class StrongHypothesisFailed(KreinTopoError):
    """The hopping matrix A(k2) is not invertible.

    Attributes
    ----------
    k2 : float
        Quasi-momentum at which the failure was detected.
    singular_value : float
        Smallest singular value of A(k2).
    """

    def __init__(self, k2: float, singular_value: float):
        self.k2 = float(k2)
        self.singular_value = float(singular_value)
        super().__init__(
            f"A(k2) is singular at k2={self.k2:.6g} "
            f"(smallest singular value {self.singular_value:.3e})"
        )


class VerticalHypothesisFailed(KreinTopoError):
    """A vertical hopping coefficient a_n(k1) is not invertible."""

    def __init__(self, n: int, k1: float, singular_value: float):
        self.n = int(n)
        self.k1 = float(k1)
        self.singular_value = float(singular_value)
        super().__init__(
            f"a_n(k1) is singular at site n={self.n}, k1={self.k1:.6g} "
            f"(smallest singular value {self.singular_value:.3e})"
        )


# --- edge -------------------------------------------------------------------


class NotInGap(KreinTopoError):
    """The requested energy is not in a spectral gap of the bulk Hamiltonian."""


class WrongDimension(KreinTopoError):
    """The contracting subspace does not have dimension L."""

    def __init__(self, dimension: int, expected: int, k1: float | None = None):
        self.dimension = int(dimension)
        self.expected = int(expected)
        self.k1 = k1
        where = "" if k1 is None else f" at k1={k1:.6g}"
        super().__init__(
            f"contracting subspace has dimension {self.dimension}, "
            f"expected {self.expected}{where}"
        )


class NotLagrangian(KreinTopoError):
    """A frame does not span a Lagrangian plane (the edge unitary is ill defined)."""


class PhaseTrackingAmbiguous(KreinTopoError):
    """Eigenphases could not be followed continuously along the k1 grid."""


class FlatBandDetected(KreinTopoError):
    """An eigenphase branch is pinned at zero: a flat band of edge states."""


class NonIntegral(KreinTopoError):
    """A Chern number sum is too far from an integer."""

    def __init__(self, value: float, residual: float):
        self.value = float(value)
        self.residual = float(residual)
        super().__init__(
            f"plaquette sum {self.value:.6f} is not integral (residual {self.residual:.3e})"
        )
