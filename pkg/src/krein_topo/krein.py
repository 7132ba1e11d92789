"""Symmetries of finite dimensional Krein spaces and the inertia of unit eigenvalues.

A Krein space here is ``C^N`` with the indefinite form given by a real unitary
*fundamental symmetry* ``J_F`` with ``J_F^2 = +-1``.  A matrix ``T`` is
``J_F``-unitary when ``T* J_F T = J_F``.  Its eigenvalues on the unit circle
carry an inertia ``(nu_+, nu_-)``: the numbers of positive and negative
eigenvalues of the Hermitian form ``sqrt(eta_F) J_F`` restricted to the
generalized eigenspace.  Sums of these inertias give the global invariants
implemented at the bottom of this module.

Examples
--------
>>> import numpy as np
>>> from krein_topo.krein import Symmetry, krein_spectrum, global_signature
>>> J = Symmetry(np.diag([1.0, -1.0]))
>>> z = np.exp(1j * np.pi / 3)
>>> eigs = krein_spectrum(np.diag([z, z.conjugate()]), J)
>>> [(e.nu_plus, e.nu_minus) for e in eigs]
[(0, 1), (1, 0)]
>>> global_signature(eigs)
0
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from ._config import DEFAULT_TOL, Tolerances
from .errors import (
    DegenerateForm,
    DimensionMismatch,
    InconsistentSigns,
    InvalidSymmetry,
    NotIsolated,
    SingularInput,
    SymmetryViolated,
)
from .spectral import Cluster, SpectralDecomposition, _reordered_frame, decompose, unit_circle_spectrum

logger = logging.getLogger(__name__)

__all__ = [
    "Symmetry",
    "SymmetryKind",
    "SymmetryReport",
    "KreinEigenvalue",
    "InvariantSet",
    "as_symmetry",
    "check_symmetries",
    "hermitian_form",
    "inertia_of_cluster",
    "krein_spectrum",
    "global_signature",
    "signature_at",
    "secondary_invariant",
    "half_signature",
    "z2_signature",
    "invariants_for_kind",
    "check_inertia_reflection",
]

FLAVORS = ("fundamental", "real", "chiral")


# --- symmetries ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Symmetry:
    """A real unitary matrix squaring to ``+1`` or ``-1``.

    Parameters
    ----------
    matrix : array_like
        Square matrix.  Its imaginary part must vanish within ``tol.real``.
    square_sign : int, optional
        The sign ``eta`` with ``M^2 = eta 1``.  Inferred from the matrix when
        omitted.
    flavor : {"fundamental", "real", "chiral"}
        The role of the symmetry.  It only affects messages and reports.

    Raises
    ------
    InvalidSymmetry
        If the matrix is not square, not real, not unitary or does not square
        to ``square_sign``.
    """

    matrix: np.ndarray
    square_sign: Optional[int] = None
    flavor: str = "fundamental"
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidSymmetry(f"{self.flavor} symmetry must be square, got {M.shape}")
        if self.flavor not in FLAVORS:
            raise InvalidSymmetry(f"unknown flavor {self.flavor!r}")
        if np.max(np.abs(M.imag), initial=0.0) > self.tol.real:
            raise InvalidSymmetry(f"{self.flavor} symmetry is not real")
        M = M.real.astype(float)
        n = M.shape[0]
        if np.linalg.norm(M.T @ M - np.eye(n), ord=2) > self.tol.unitary:
            raise InvalidSymmetry(f"{self.flavor} symmetry is not unitary")
        sq = M @ M
        eta = self.square_sign
        if eta is None:
            eta = 1 if np.trace(sq) >= 0 else -1
            if n == 0:
                eta = 1
        if eta not in (1, -1):
            raise InvalidSymmetry(f"square sign must be +1 or -1, got {eta}")
        if np.linalg.norm(sq - eta * np.eye(n), ord=2) > self.tol.unitary:
            raise InvalidSymmetry(f"{self.flavor} symmetry does not square to {eta:+d}")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "square_sign", int(eta))

    @property
    def eta(self) -> int:
        return int(self.square_sign)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def as_symmetry(M, flavor: str = "fundamental", tol: Tolerances = DEFAULT_TOL) -> Symmetry:
    """Return ``M`` if it already is a :class:`Symmetry`, else wrap it."""
    if isinstance(M, Symmetry):
        return M
    return Symmetry(np.asarray(M), None, flavor, tol)


def _relation_sign(A: np.ndarray, B: np.ndarray, tol: float) -> int:
    """``+1`` if ``AB = BA``, ``-1`` if ``AB = -BA`` within ``tol``."""
    AB, BA = A @ B, B @ A
    if np.linalg.norm(AB - BA, ord=2) <= tol:
        return 1
    if np.linalg.norm(AB + BA, ord=2) <= tol:
        return -1
    raise InconsistentSigns("symmetries neither commute nor anti-commute")


@dataclass(frozen=True)
class SymmetryKind:
    """Sign data classifying a Krein space with optional Real and chiral symmetries.

    Attributes
    ----------
    eta_F, eta_R, eta_C : int or None
        Squares of the fundamental, Real and chiral symmetries.
    eta_FR, eta_FC, eta_RC : int or None
        ``+1`` for commuting and ``-1`` for anti-commuting pairs.
    """

    eta_F: int
    eta_R: Optional[int] = None
    eta_FR: Optional[int] = None
    eta_C: Optional[int] = None
    eta_FC: Optional[int] = None
    eta_RC: Optional[int] = None

    def __post_init__(self):
        for name in ("eta_F", "eta_R", "eta_FR", "eta_C", "eta_FC", "eta_RC"):
            v = getattr(self, name)
            if v is not None and v not in (1, -1):
                raise InconsistentSigns(f"{name} must be +1 or -1, got {v}")
        if (self.eta_R is None) != (self.eta_FR is None):
            raise InconsistentSigns("eta_R and eta_FR must be given together")
        if (self.eta_C is None) != (self.eta_FC is None):
            raise InconsistentSigns("eta_C and eta_FC must be given together")

    @classmethod
    def from_symmetries(
        cls,
        J_F: Symmetry,
        J_R: Optional[Symmetry] = None,
        J_C: Optional[Symmetry] = None,
        tol: Tolerances = DEFAULT_TOL,
    ) -> "SymmetryKind":
        """Read off all signs from the matrices.

        Raises
        ------
        InconsistentSigns
            If two of the symmetries neither commute nor anti-commute.
        """
        F = J_F.matrix
        eta_R = eta_FR = eta_C = eta_FC = eta_RC = None
        if J_R is not None:
            eta_R = J_R.eta
            eta_FR = _relation_sign(F, J_R.matrix, tol.unitary)
        if J_C is not None:
            eta_C = J_C.eta
            eta_FC = _relation_sign(F, J_C.matrix, tol.unitary)
            if J_R is not None:
                eta_RC = _relation_sign(J_R.matrix, J_C.matrix, tol.unitary)
        return cls(J_F.eta, eta_R, eta_FR, eta_C, eta_FC, eta_RC)

    @property
    def has_real(self) -> bool:
        return self.eta_R is not None

    @property
    def triple(self):
        """``(eta_F, eta_R, eta_FR)``."""
        return (self.eta_F, self.eta_R, self.eta_FR)

    @property
    def reflection_sign(self) -> Optional[int]:
        """``eta_F eta_FR``: ``+1`` when inertia is preserved under ``lambda -> conj(lambda)``."""
        if not self.has_real:
            return None
        return self.eta_F * self.eta_FR

    def invariant_fields(self) -> tuple:
        """Names of the invariants that label the components of this kind."""
        if not self.has_real:
            return ("sig",)
        key = (self.eta_F * self.eta_FR, self.eta_R)
        return {
            (1, 1): ("sig", "sec"),
            (1, -1): ("half_sig",),
            (-1, 1): (),
            (-1, -1): ("sig2",),
        }[key]

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v:+d}" for v in self.triple if v is not None) + ")"


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of :func:`check_symmetries`.

    ``real`` and ``chiral`` are ``None`` when the symmetry was not supplied.
    The residuals are spectral norms of the defining relations.
    """

    fundamental: bool
    real: Optional[bool]
    chiral: Optional[bool]
    residual_fundamental: float
    residual_real: Optional[float] = None
    residual_chiral: Optional[float] = None

    @property
    def all_hold(self) -> bool:
        return all(v is not False for v in (self.fundamental, self.real, self.chiral))


def _check_dims(T: np.ndarray, *syms):
    n = T.shape[0]
    for s in syms:
        if s is not None and s.dimension != n:
            raise DimensionMismatch(
                f"{s.flavor} symmetry has dimension {s.dimension}, operator has {n}"
            )


def check_symmetries(T, J_F, J_R=None, J_C=None, tol: Tolerances = DEFAULT_TOL) -> SymmetryReport:
    """Test ``T`` for J-unitarity, Real symmetry and chiral symmetry.

    The relations are ``T* J_F T = J_F``, ``J_R* conj(T) J_R = T`` and
    ``J_C* T J_C = T``, each accepted within ``tol.sym`` relative to
    ``max(1, ||T||^2)``.

    Raises
    ------
    DimensionMismatch
        If the matrices act on spaces of different dimensions.
    SingularInput
        If ``T`` is numerically singular.
    """
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionMismatch(f"operator must be square, got {T.shape}")
    J_F = as_symmetry(J_F, "fundamental", tol)
    J_R = None if J_R is None else as_symmetry(J_R, "real", tol)
    J_C = None if J_C is None else as_symmetry(J_C, "chiral", tol)
    _check_dims(T, J_F, J_R, J_C)
    sv = np.linalg.svd(T, compute_uv=False)
    scale = max(1.0, float(sv[0])) if sv.size else 1.0
    if sv.size and sv[-1] < tol.sv_min * scale:
        raise SingularInput(f"operator is singular (smallest singular value {sv[-1]:.3e})")
    bound = tol.sym * scale**2
    F = J_F.matrix
    rF = float(np.linalg.norm(T.conj().T @ F @ T - F, ord=2))
    rR = rC = None
    if J_R is not None:
        R = J_R.matrix
        rR = float(np.linalg.norm(R.T @ T.conj() @ R - T, ord=2))
    if J_C is not None:
        C = J_C.matrix
        rC = float(np.linalg.norm(C.T @ T @ C - T, ord=2))
    return SymmetryReport(
        fundamental=rF <= bound,
        real=None if rR is None else rR <= bound,
        chiral=None if rC is None else rC <= bound,
        residual_fundamental=rF,
        residual_real=rR,
        residual_chiral=rC,
    )


def hermitian_form(J_F: Symmetry) -> np.ndarray:
    """The Hermitian matrix ``sqrt(eta_F) J_F``.

    For ``eta_F = +1`` this is ``J_F``; for ``eta_F = -1`` it is ``i J_F``.
    """
    return J_F.matrix.astype(complex) if J_F.eta == 1 else 1j * J_F.matrix


# --- inertia ----------------------------------------------------------------


@dataclass(frozen=True)
class KreinEigenvalue:
    """An eigenvalue cluster on the unit circle together with its Krein inertia.

    Attributes
    ----------
    lam : complex
        Cluster center, of modulus one within ``tol.circle``.
    nu_plus, nu_minus : int
        Positive and negative inertia of the form on the generalized eigenspace.
    multiplicity : int
        Algebraic multiplicity; always ``nu_plus + nu_minus``.
    cluster_gap : float
        Clustering threshold that produced this eigenvalue.  It exceeds the
        default only after adaptive widening.
    """

    lam: complex
    nu_plus: int
    nu_minus: int
    multiplicity: int
    cluster_gap: float = DEFAULT_TOL.cluster_gap

    def __post_init__(self):
        if self.nu_plus < 0 or self.nu_minus < 0:
            raise ValueError("inertia counts must be nonnegative")
        if self.nu_plus + self.nu_minus != self.multiplicity or self.multiplicity < 1:
            raise ValueError(
                f"inertia ({self.nu_plus}, {self.nu_minus}) does not add up to "
                f"multiplicity {self.multiplicity}"
            )

    @property
    def sig(self) -> int:
        """``nu_plus - nu_minus``."""
        return self.nu_plus - self.nu_minus

    @property
    def is_definite(self) -> bool:
        return self.nu_plus == 0 or self.nu_minus == 0


def _form_inertia(
    dec: SpectralDecomposition, cluster: Cluster, form: np.ndarray, tol: Tolerances
) -> KreinEigenvalue:
    F = dec.frame(cluster)
    Q = F.conj().T @ form @ F
    Q = 0.5 * (Q + Q.conj().T)
    w = np.linalg.eigvalsh(Q)
    if np.min(np.abs(w)) < tol.form:
        raise DegenerateForm(
            f"form on the cluster at {cluster.center:.6g} has eigenvalue "
            f"{w[np.argmin(np.abs(w))]:.3e}"
        )
    return KreinEigenvalue(
        lam=cluster.center,
        nu_plus=int(np.count_nonzero(w > 0)),
        nu_minus=int(np.count_nonzero(w < 0)),
        multiplicity=cluster.multiplicity,
        cluster_gap=dec.cluster_gap,
    )


def _prepare(T, J_F, tol: Tolerances):
    T = np.asarray(T, dtype=complex)
    J_F = as_symmetry(J_F, "fundamental", tol)
    report = check_symmetries(T, J_F, tol=tol)
    if not report.fundamental:
        raise SymmetryViolated(
            f"operator is not J_F-unitary (residual {report.residual_fundamental:.3e})"
        )
    return T, J_F


def _with_widening(T, tol: Tolerances, work):
    """Run ``work(dec)`` and widen the cluster gap by factors of ten on degeneracy."""
    gap = tol.cluster_gap
    while True:
        dec = decompose(T, cluster_gap=gap, tol=tol)
        try:
            return work(dec)
        except DegenerateForm:
            if gap * 10 > tol.cluster_gap_max * (1 + 1e-12):
                raise
            gap *= 10
            logger.warning("degenerate Krein form; widening cluster gap to %.0e", gap)


def inertia_of_cluster(T, J_F, cluster, tol: Tolerances = DEFAULT_TOL) -> KreinEigenvalue:
    """Krein inertia of one unit circle eigenvalue cluster of a J-unitary.

    Parameters
    ----------
    T : array_like
        ``J_F``-unitary matrix.
    J_F : Symmetry or array_like
        Fundamental symmetry.
    cluster : complex or iterable of complex
        Eigenvalue(s) identifying the cluster.  All clusters whose center is
        closest to one of the given values are merged.

    Returns
    -------
    KreinEigenvalue

    Raises
    ------
    SymmetryViolated
        If ``T`` is not ``J_F``-unitary.
    NotIsolated
        If the selected cluster is not on the unit circle or not separated
        from the remaining spectrum.
    DegenerateForm
        If the form restricted to the spectral subspace is degenerate even
        after widening the cluster gap to ``tol.cluster_gap_max``.
    """
    T, J_F = _prepare(T, J_F, tol)
    targets = np.atleast_1d(np.asarray(cluster, dtype=complex)).ravel()
    form = hermitian_form(J_F)

    def work(dec: SpectralDecomposition):
        picked = sorted({dec.cluster_near(z).index for z in targets})
        members = tuple(sorted(m for i in picked for m in dec.clusters[i].members))
        merged = Cluster(picked[0], members, dec.eigenvalues[list(members)])
        if abs(abs(merged.center) - 1.0) > tol.circle:
            raise NotIsolated(f"cluster at {merged.center:.6g} is not on the unit circle")
        if merged.spread >= tol.cluster_gap_max:
            raise NotIsolated(f"selected eigenvalues spread over {merged.spread:.3e}")
        if len(picked) > 1:
            # merging clusters requires a dedicated frame
            select = np.zeros(dec.dimension, dtype=bool)
            select[list(members)] = True
            F = _reordered_frame(dec._S, dec._Z, select)
            Q = F.conj().T @ form @ F
            w = np.linalg.eigvalsh(0.5 * (Q + Q.conj().T))
            if np.min(np.abs(w)) < tol.form:
                raise DegenerateForm("degenerate form on merged cluster")
            return KreinEigenvalue(merged.center, int(np.sum(w > 0)), int(np.sum(w < 0)),
                                   len(members), dec.cluster_gap)
        return _form_inertia(dec, dec.clusters[picked[0]], form, tol)

    return _with_widening(T, tol, work)


def krein_spectrum(T, J_F, tol: Tolerances = DEFAULT_TOL) -> List[KreinEigenvalue]:
    """All unit circle eigenvalue clusters of ``T`` with their inertia.

    The result is sorted by the argument of the eigenvalue in ``(-pi, pi]``.

    Raises
    ------
    SymmetryViolated, NotIsolated, DegenerateForm
        See :func:`inertia_of_cluster`.
    """
    T, J_F = _prepare(T, J_F, tol)
    form = hermitian_form(J_F)

    def work(dec: SpectralDecomposition):
        return [_form_inertia(dec, c, form, tol) for c in unit_circle_spectrum(dec, tol)]

    eigs = _with_widening(T, tol, work)
    return sorted(eigs, key=lambda e: _arg(e.lam))


def _arg(z: complex) -> float:
    a = float(np.angle(z))
    return np.pi if a <= -np.pi + 1e-12 else a


# --- invariants ---------------------------------------------------------------


def global_signature(eigs: Iterable[KreinEigenvalue]) -> int:
    """Sum of ``nu_plus - nu_minus`` over all unit eigenvalues."""
    return int(sum(e.sig for e in eigs))


def signature_at(eigs: Iterable[KreinEigenvalue], lam: complex, atol: float = 1e-6) -> int:
    """Signature summed over the eigenvalues within ``atol`` of ``lam``."""
    return int(sum(e.sig for e in eigs if abs(e.lam - lam) <= atol))


def _partner(eigs: Sequence[KreinEigenvalue], e: KreinEigenvalue, atol: float):
    target = np.conj(e.lam)
    cands = [f for f in eigs if abs(f.lam - target) <= atol]
    return cands


def check_inertia_reflection(eigs: Sequence[KreinEigenvalue], sign: int, atol: float = 1e-6) -> bool:
    """Test the inertia reflection rule for ``lambda -> conj(lambda)``.

    For ``sign = +1`` it demands ``nu_+-(lambda) = nu_+-(conj lambda)``, for
    ``sign = -1`` it demands ``nu_+-(lambda) = nu_-+(conj lambda)``.  Inertia
    of eigenvalues within ``atol`` of each other is pooled first.
    """
    eigs = list(eigs)
    for e in eigs:
        near = [f for f in eigs if abs(f.lam - e.lam) <= atol]
        partners = _partner(eigs, e, atol)
        p = (sum(f.nu_plus for f in near), sum(f.nu_minus for f in near))
        q = (sum(f.nu_plus for f in partners), sum(f.nu_minus for f in partners))
        if sign == 1 and p != q:
            return False
        if sign == -1 and p != (q[1], q[0]):
            return False
    return True


def secondary_invariant(eigs: Sequence[KreinEigenvalue], atol: float = 1e-6) -> int:
    """``Sig(1) mod 2``.

    Raises
    ------
    SymmetryViolated
        If the inertia is not symmetric under complex conjugation of the
        eigenvalues.
    """
    eigs = list(eigs)
    if not check_inertia_reflection(eigs, 1, atol):
        raise SymmetryViolated("inertia is not invariant under lambda -> conj(lambda)")
    return signature_at(eigs, 1.0, atol) % 2


def half_signature(eigs: Sequence[KreinEigenvalue], atol: float = 1e-6) -> int:
    """Signature of the upper half circle, with weight one half at ``+-1``.

    Raises
    ------
    SymmetryViolated
        If the inertia is not symmetric under complex conjugation, or if the
        weighted sum is not an integer.
    """
    eigs = list(eigs)
    if not check_inertia_reflection(eigs, 1, atol):
        raise SymmetryViolated("inertia is not invariant under lambda -> conj(lambda)")
    twice = 0
    for e in eigs:
        if e.lam.imag < -atol:
            continue
        real_axis = abs(e.lam - 1) <= atol or abs(e.lam + 1) <= atol
        twice += e.sig if real_axis else 2 * e.sig
    if twice % 2:
        raise SymmetryViolated("odd signature at +-1; half-signature is not an integer")
    return twice // 2


def z2_signature(eigs: Sequence[KreinEigenvalue], atol: float = 1e-6) -> int:
    """Half the total unit circle multiplicity, modulo two.

    Raises
    ------
    SymmetryViolated
        If the total multiplicity is odd or the inertia fails
        ``nu_+-(lambda) = nu_-+(conj lambda)``.
    """
    eigs = list(eigs)
    total = sum(e.multiplicity for e in eigs)
    if total % 2:
        raise SymmetryViolated(f"total unit multiplicity {total} is odd")
    if not check_inertia_reflection(eigs, -1, atol):
        raise SymmetryViolated("inertia is not exchanged under lambda -> conj(lambda)")
    return (total // 2) % 2


@dataclass(frozen=True)
class InvariantSet:
    """The invariants attached to one operator of a given kind.

    Only the invariants that label the kind are populated; the others are
    ``None``.  ``diagnostics`` holds ``Sig(1)`` and ``Sig(-1)``.
    """

    kind: SymmetryKind
    sig: Optional[int] = None
    sec: Optional[int] = None
    half_sig: Optional[int] = None
    sig2: Optional[int] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        expected = set(self.kind.invariant_fields())
        present = {n for n in ("sig", "sec", "half_sig", "sig2") if getattr(self, n) is not None}
        if expected != present:
            raise ValueError(f"kind {self.kind} carries {sorted(expected)}, got {sorted(present)}")
        if self.sig is not None and self.sec is not None and "sig_minus1" in self.diagnostics:
            if self.sec != (self.diagnostics["sig_minus1"] + self.sig) % 2:
                raise SymmetryViolated("Sec differs from (Sig(-1) + Sig) mod 2")

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in ("sig", "sec", "half_sig", "sig2") if getattr(self, n) is not None}


def invariants_for_kind(eigs: Sequence[KreinEigenvalue], kind: SymmetryKind, atol: float = 1e-6) -> InvariantSet:
    """Evaluate the invariants that label ``kind``.

    ==========================  ==================
    ``(eta_F eta_FR, eta_R)``   invariants
    ==========================  ==================
    no Real symmetry            Sig
    ``(+1, +1)``                Sig and Sec
    ``(+1, -1)``                half-signature
    ``(-1, +1)``                none
    ``(-1, -1)``                Z2-signature
    ==========================  ==================

    Raises
    ------
    SymmetryViolated
        If the inertia reflection rule of the kind fails.
    """
    eigs = list(eigs)
    diag = {"sig_plus1": signature_at(eigs, 1.0, atol), "sig_minus1": signature_at(eigs, -1.0, atol)}
    if kind.has_real and not check_inertia_reflection(eigs, kind.reflection_sign, atol):
        raise SymmetryViolated(f"inertia reflection rule of kind {kind} fails")
    fields = kind.invariant_fields()
    values = {}
    if "sig" in fields:
        values["sig"] = global_signature(eigs)
    if "sec" in fields:
        values["sec"] = secondary_invariant(eigs, atol)
    if "half_sig" in fields:
        values["half_sig"] = half_signature(eigs, atol)
    if "sig2" in fields:
        values["sig2"] = z2_signature(eigs, atol)
    return InvariantSet(kind=kind, diagnostics=diag, **values)
