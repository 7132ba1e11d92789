"""Eigenvalue clusters, invariant frames and Riesz projections.

The central object is :class:`SpectralDecomposition`.  It groups the
eigenvalues of a dense matrix into clusters and provides orthonormal frames of
the associated invariant subspaces, obtained by reordering a complex Schur
form.  Riesz projections are assembled from right and left frames, and an
independent contour-integral quadrature is offered as a cross-check.

The module also generates the families of matrices used to illustrate
eigenvalue collisions on the unit circle (:func:`collision_paths`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from ._config import DEFAULT_TOL, Tolerances
from .errors import BadParams, ConvergenceFailure, DimensionMismatch, IllConditioned, NotIsolated

logger = logging.getLogger(__name__)

__all__ = [
    "Cluster",
    "SpectralDecomposition",
    "CollisionPath",
    "decompose",
    "riesz_projection",
    "contour_projection",
    "unit_circle_spectrum",
    "collision_paths",
    "COLLISION_SCENARIOS",
]


@dataclass(frozen=True)
class Cluster:
    """A group of eigenvalues that lie within ``cluster_gap`` of each other.

    Attributes
    ----------
    index : int
        Position of the cluster in :attr:`SpectralDecomposition.clusters`.
    members : tuple of int
        Indices into :attr:`SpectralDecomposition.eigenvalues`.
    eigenvalues : numpy.ndarray
        The member eigenvalues.
    """

    index: int
    members: Tuple[int, ...]
    eigenvalues: np.ndarray = field(repr=False, compare=False)

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def center(self) -> complex:
        return complex(np.mean(self.eigenvalues))

    @property
    def spread(self) -> float:
        """Largest distance of a member from the center."""
        return float(np.max(np.abs(self.eigenvalues - self.center)))


def _as_square(T) -> np.ndarray:
    M = np.asarray(T, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConvergenceFailure("matrix has non-finite entries")
    return M


def _group(values: np.ndarray, gap: float) -> List[List[int]]:
    """Transitive grouping of points closer than ``gap`` (single linkage)."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(values[:, None] - values[None, :])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < gap:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _schur(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        S, Z = sla.schur(M, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(f"Schur decomposition failed: {exc}") from exc
    return S, Z


def _reordered_frame(S: np.ndarray, Z: np.ndarray, select: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the invariant subspace belonging to ``select``."""
    m_expected = int(np.count_nonzero(select))
    if m_expected == 0:
        return np.zeros((S.shape[0], 0), dtype=complex)
    ts, qs, _w, m, _s, _sep, info = lapack.ztrsen(
        select.astype(np.int32), S, Z, job="N", wantq=1
    )
    if info != 0 or m != m_expected:
        raise ConvergenceFailure(f"Schur reordering failed (info={info}, m={m})")
    return qs[:, :m]


class SpectralDecomposition:
    """Clustered eigen-decomposition of a dense square matrix.

    Use :func:`decompose` to build one.  Frames of invariant subspaces are
    computed lazily and cached.

    Attributes
    ----------
    matrix : numpy.ndarray
        The decomposed matrix.
    eigenvalues : numpy.ndarray
        All eigenvalues, repeated according to algebraic multiplicity.
    clusters : tuple of Cluster
        Eigenvalues grouped transitively with threshold ``cluster_gap``.
    cluster_gap : float
        Threshold used for the grouping.
    """

    def __init__(self, matrix: np.ndarray, cluster_gap: float, tol: Tolerances = DEFAULT_TOL):
        self.matrix = matrix
        self.cluster_gap = float(cluster_gap)
        self.tol = tol
        self._S, self._Z = _schur(matrix)
        self.eigenvalues = np.diag(self._S).copy()
        groups = _group(self.eigenvalues, self.cluster_gap)
        groups.sort(key=lambda g: (round(float(np.mean(self.eigenvalues[g]).real), 12),
                                   round(float(np.mean(self.eigenvalues[g]).imag), 12)))
        self.clusters: Tuple[Cluster, ...] = tuple(
            Cluster(i, tuple(sorted(g)), self.eigenvalues[sorted(g)]) for i, g in enumerate(groups)
        )
        self._left_schur: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._right: Dict[int, np.ndarray] = {}
        self._left: Dict[int, np.ndarray] = {}

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def cluster_near(self, z: complex) -> Cluster:
        """The cluster whose center is closest to ``z``."""
        return min(self.clusters, key=lambda c: abs(c.center - z))

    def separation(self, cluster: Cluster) -> float:
        """Distance between ``cluster`` and the remaining spectrum."""
        others = np.delete(self.eigenvalues, list(cluster.members))
        if others.size == 0:
            return float("inf")
        return float(np.min(np.abs(cluster.eigenvalues[:, None] - others[None, :])))

    def frame(self, cluster: Cluster) -> np.ndarray:
        """Orthonormal basis of the right invariant subspace of ``cluster``."""
        if cluster.index not in self._right:
            select = np.zeros(self.dimension, dtype=bool)
            select[list(cluster.members)] = True
            self._right[cluster.index] = _reordered_frame(self._S, self._Z, select)
        return self._right[cluster.index]

    def left_frame(self, cluster: Cluster) -> np.ndarray:
        """Orthonormal basis ``G`` of the left invariant subspace.

        The columns span the invariant subspace of ``T*`` belonging to the
        complex conjugate cluster, so that ``G* T = X G*`` for some ``X``.
        The left Schur form is computed directly from ``T*``, which behaves
        better near Jordan structure than inverting right frames.
        """
        if cluster.index not in self._left:
            if self._left_schur is None:
                self._left_schur = _schur(self.matrix.conj().T)
            S, Z = self._left_schur
            ev = np.diag(S)
            target = np.conj(cluster.eigenvalues)
            d = np.min(np.abs(ev[:, None] - target[None, :]), axis=1)
            select = d < 0.5 * self.cluster_gap + cluster.spread
            if np.count_nonzero(select) != cluster.multiplicity:
                # fall back to the closest eigenvalues
                order = np.argsort(d, kind="stable")
                select = np.zeros(self.dimension, dtype=bool)
                select[order[: cluster.multiplicity]] = True
            self._left[cluster.index] = _reordered_frame(S, Z, select)
        return self._left[cluster.index]

    def invariance_residual(self, cluster: Cluster) -> float:
        """``||(1 - F F*) T F||`` for the right frame ``F``."""
        F = self.frame(cluster)
        R = self.matrix @ F
        return float(np.linalg.norm(R - F @ (F.conj().T @ R)))


def decompose(T, cluster_gap: Optional[float] = None, tol: Tolerances = DEFAULT_TOL) -> SpectralDecomposition:
    """Cluster the spectrum of a dense square matrix.

    Parameters
    ----------
    T : array_like
        Square matrix.
    cluster_gap : float, optional
        Eigenvalues closer than this are grouped (transitively).  Defaults to
        ``tol.cluster_gap``.

    Returns
    -------
    SpectralDecomposition

    Raises
    ------
    DimensionMismatch
        If ``T`` is not square.
    ConvergenceFailure
        If the Schur decomposition fails.
    """
    M = _as_square(T)
    gap = tol.cluster_gap if cluster_gap is None else float(cluster_gap)
    return SpectralDecomposition(M, gap, tol)


def riesz_projection(dec: SpectralDecomposition, cluster: Cluster) -> np.ndarray:
    """Riesz projection onto the generalized eigenspace of ``cluster``.

    Built as ``F (G* F)^{-1} G*`` from right and left invariant frames.

    Raises
    ------
    IllConditioned
        If ``G* F`` has condition number above ``tol.cond_max``.
    """
    F = dec.frame(cluster)
    G = dec.left_frame(cluster)
    GF = G.conj().T @ F
    cond = np.linalg.cond(GF)
    if not np.isfinite(cond) or cond > dec.tol.cond_max:
        raise IllConditioned(f"cond(G*F) = {cond:.3e} for cluster at {cluster.center:.6g}")
    return F @ np.linalg.solve(GF, G.conj().T)


def contour_projection(T, center: complex, radius: float, n_points: int = 256) -> np.ndarray:
    """Riesz projection by trapezoidal quadrature of the resolvent.

    Evaluates ``(2 pi i)^{-1} \\oint (z - T)^{-1} dz`` on the circle of the
    given center and radius.  This is an independent oracle for
    :func:`riesz_projection`; the trapezoidal rule converges geometrically for
    the analytic integrand.
    """
    M = _as_square(T)
    n = M.shape[0]
    eye = np.eye(n)
    P = np.zeros((n, n), dtype=complex)
    for j in range(n_points):
        w = radius * np.exp(2j * np.pi * j / n_points)
        P += w * np.linalg.solve((center + w) * eye - M, eye)
    return P / n_points


def unit_circle_spectrum(dec: SpectralDecomposition, tol: Optional[Tolerances] = None) -> List[Cluster]:
    """Clusters of ``dec`` lying on the unit circle.

    A cluster is on the circle when its center satisfies
    ``| |center| - 1 | <= tol.circle``.  Clusters are separated from the rest
    of the spectrum by construction; a cluster with some member within
    ``tol.circle`` of the circle whose center is not on the circle signals an
    eigenvalue that cannot be separated from off-circle spectrum.

    Raises
    ------
    NotIsolated
        In the situation just described.
    """
    tol = dec.tol if tol is None else tol
    out = []
    for c in dec.clusters:
        on = abs(abs(c.center) - 1.0) <= tol.circle
        touching = np.any(np.abs(np.abs(c.eigenvalues) - 1.0) <= tol.circle)
        if on:
            out.append(c)
        elif touching and c.multiplicity > 1:
            raise NotIsolated(
                f"cluster at {c.center:.6g} mixes unit and non-unit eigenvalues"
            )
    return out


# --- collision scenarios ----------------------------------------------------


@dataclass(frozen=True)
class CollisionPath:
    """One member of a collision family together with its symmetries.

    Attributes
    ----------
    T : numpy.ndarray
        The matrix at the requested path parameter.
    J_F : numpy.ndarray
        Fundamental symmetry for which ``T`` is unitary.
    J_R : numpy.ndarray or None
        Real symmetry of ``T`` if the scenario carries one.
    """

    T: np.ndarray
    J_F: np.ndarray
    J_R: Optional[np.ndarray] = None


COLLISION_SCENARIOS = ("krein_2x2", "o11_block", "quadruple", "mediated")

_J2 = np.diag([1.0, -1.0])


def _krein_block(lam: complex, a: float, t: float, N: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    M = np.array([[1 - 1j * a, 1j * a], [-1j * a, 1 + 1j * a]])
    B = np.array([[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]])
    T = lam * M @ B
    J = _J2.copy()
    if N is not None:
        N = np.asarray(N, dtype=float)
        if N.shape != (2, 2) or not np.allclose(N.T @ N, np.eye(2), atol=1e-12):
            raise BadParams("basis change N must be a real orthogonal 2x2 matrix")
        T = N @ T @ N.T
        J = N @ J @ N.T
    return T, J


def _unit(lam) -> complex:
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise BadParams(f"lambda must lie on the unit circle, got |lambda|={abs(lam)}")
    return lam


def collision_paths(scenario: str, params: Optional[dict] = None, t: float = 0.0) -> CollisionPath:
    """Matrix families illustrating eigenvalue collisions on the unit circle.

    Parameters
    ----------
    scenario : {"krein_2x2", "o11_block", "quadruple", "mediated"}
        * ``krein_2x2``: ``lam N M_a B_t N^{-1}`` with
          ``M_a = [[1 - ia, ia], [-ia, 1 + ia]]`` and the hyperbolic rotation
          ``B_t``; unitary for ``J = diag(1, -1)``.  At ``t = 0`` the
          eigenvalue ``lam`` is doubly degenerate and indefinite, for
          ``t != 0`` it splits into a pair ``mu, 1/conj(mu)`` off the circle.
          Parameters ``lam`` (default ``exp(i pi/3)``), ``a`` (default 1) and
          an optional real orthogonal ``N``.
        * ``o11_block``: ``lam [[s cosh t, k sinh t], [-k sinh t, -s cosh t]]``
          in ``O(1,1)`` with eigenvalues ``+-lam``; parameters ``sigma``,
          ``kappa`` in ``{-1, 1}`` and ``lam`` in ``{-1, 1}`` (default 1).
          Real symmetry ``1``.
        * ``quadruple``: ``krein_2x2`` at ``lam`` direct sum with its complex
          conjugate, with Real symmetry exchanging the two summands.  Four
          eigenvalues leave the circle together.
        * ``mediated``: ``s exp(theta X_t)`` in ``O(2,1)`` with
          ``X_t = [[0, -1, t], [1, 0, 0], [t, 0, 0]]``.  For ``|t| < 1`` a
          pair ``s exp(+-i theta sqrt(1 - t^2))`` of equal inertia sits on the
          circle next to the simple eigenvalue ``s`` of opposite inertia; at
          ``|t| = 1`` the three collide at ``s`` and for ``|t| > 1`` the pair
          leaves along the real axis while the eigenvalue ``s`` flips its
          inertia.  ``s = 1`` (default) is a mediated tangent bifurcation,
          ``s = -1`` a mediated period doubling; ``theta`` defaults to 1.
    params : dict, optional
        Scenario parameters as listed above.
    t : float
        Path parameter.

    Returns
    -------
    CollisionPath

    Raises
    ------
    BadParams
        For an unknown scenario or invalid parameters.
    """
    params = dict(params or {})
    t = float(t)
    if scenario == "krein_2x2":
        lam = _unit(params.get("lam", np.exp(1j * np.pi / 3)))
        a = float(params.get("a", 1.0))
        T, J = _krein_block(lam, a, t, params.get("N"))
        return CollisionPath(T, J, None)
    if scenario == "o11_block":
        sigma = int(params.get("sigma", 1))
        kappa = int(params.get("kappa", 1))
        lam = params.get("lam", 1)
        if sigma not in (-1, 1) or kappa not in (-1, 1):
            raise BadParams("sigma and kappa must be +1 or -1")
        if lam not in (-1, 1):
            raise BadParams("lam must be +1 or -1 for a real O(1,1) member")
        T = lam * np.array(
            [[sigma * np.cosh(t), kappa * np.sinh(t)], [-kappa * np.sinh(t), -sigma * np.cosh(t)]]
        )
        return CollisionPath(T.astype(complex), _J2.copy(), np.eye(2))
    if scenario == "quadruple":
        lam = _unit(params.get("lam", np.exp(1j * np.pi / 3)))
        if abs(lam.imag) < 1e-8:
            raise BadParams("a quadruple collision needs lam away from +-1")
        a = float(params.get("a", 1.0))
        T1, J = _krein_block(lam, a, t, params.get("N"))
        T = sla.block_diag(T1, T1.conj())
        JF = sla.block_diag(J, J)
        JR = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2))
        return CollisionPath(T, JF, JR)
    if scenario == "mediated":
        s = params.get("s", 1)
        if s not in (-1, 1):
            raise BadParams("s must be +1 (tangent) or -1 (period doubling)")
        theta = float(params.get("theta", 1.0))
        X = np.array([[0.0, -1.0, t], [1.0, 0.0, 0.0], [t, 0.0, 0.0]])
        T = s * sla.expm(theta * X)
        return CollisionPath(T.astype(complex), np.diag([1.0, 1.0, -1.0]), np.eye(3))
    raise BadParams(f"unknown collision scenario {scenario!r}; choose from {COLLISION_SCENARIOS}")
