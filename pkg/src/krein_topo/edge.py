"""Edge spectrum of half-space Hamiltonians from transfer matrices.

The half-space is ``Z x N`` with Dirichlet boundary conditions in direction
2.  For a fixed quasi-momentum in direction 1 the Schroedinger equation is a
Jacobi recursion in direction 2, solved by the transfer matrices

.. math::

    T_n = \\begin{pmatrix} (E - b_n) a_n^{-1} & -a_n^* \\\\ a_n^{-1} & 0 \\end{pmatrix},

with ``a_n`` the coefficient of ``psi_n`` in row ``n - 1`` and ``b_n`` the
diagonal block.  The product over one magnetic period has an
``L``-dimensional contracting subspace spanned by the columns of a frame
``Phi = (Phi_t; Phi_b)`` whenever ``E`` lies in a gap, and

.. math::

    U^E(k_1) = (\\Phi_t - i \\Phi_b)(\\Phi_t + i \\Phi_b)^{-1}

is unitary.  Its eigenvalue ``1`` signals a decaying solution satisfying the
boundary condition, that is an eigenvalue ``e^{i k_1}`` of the half-space
transfer operator in direction 1.  Such a solution behaves as
``e^{i k_1 n_1}`` and therefore lives in the Fourier fiber at momentum
``-k_1``; all vertical quantities below are evaluated there.  The Krein
inertia of the unit eigenvalue equals the sign of the derivative of the
eigenphase of ``U^E`` through zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from ._config import DEFAULT_TOL, Tolerances, pmap
from .errors import (
    FlatBandDetected,
    KreinTopoError,
    NonIntegral,
    NotInGap,
    NotLagrangian,
    PhaseTrackingAmbiguous,
    VerticalHypothesisFailed,
    WrongDimension,
)
from .krein import InvariantSet, KreinEigenvalue, SymmetryKind, invariants_for_kind
from .tight_binding import (
    HoppingModel,
    SymmetryMetadata,
    bloch_hamiltonian,
    k2_grid,
)

logger = logging.getLogger(__name__)

__all__ = [
    "EdgeCrossing",
    "ContractingFrame",
    "EnergyScan",
    "vertical_coefficients",
    "vertical_cell_transfer",
    "contracting_frame",
    "edge_unitary",
    "eigenphases",
    "edge_crossings",
    "edge_kind",
    "crossings_to_krein",
    "edge_invariants",
    "chern_number",
    "ChernResult",
    "edge_bands",
    "DEFAULT_K1_GRID",
]

#: Number of distinct grid points on the circle used for eigenphase scans.
DEFAULT_K1_GRID = 628
_MAX_PHASE_STEP = np.pi / 4
_REFINEMENTS = 3
_MERGE_TOL = 1e-7


@dataclass(frozen=True)
class EdgeCrossing:
    """A parameter ``k1`` where ``1`` is an eigenvalue of ``U^E(k1)``.

    Attributes
    ----------
    k1 : float
        Crossing momentum in ``(-pi, pi]``.
    slope_sign : int
        Sign of the eigenphase derivative for simple crossings.  For a
        degenerate crossing it is the sign of ``nu_plus - nu_minus`` (``+1``
        when they balance).
    multiplicity : int
        Number of eigenphase branches through zero at ``k1``.
    theta_slope : float
        Derivative of the eigenphase for simple crossings, mean derivative
        otherwise.
    branch_slopes : tuple of float
        Derivative of each branch.
    """

    k1: float
    slope_sign: int
    multiplicity: int
    theta_slope: float
    branch_slopes: Tuple[float, ...] = ()

    @property
    def nu_plus(self) -> int:
        return sum(1 for s in self.branch_slopes if s > 0)

    @property
    def nu_minus(self) -> int:
        return sum(1 for s in self.branch_slopes if s < 0)

    @property
    def lam(self) -> complex:
        """The unit eigenvalue ``e^{i k1}`` of the half-space transfer operator."""
        return complex(np.exp(1j * self.k1))


@dataclass(frozen=True, eq=False)
class ContractingFrame:
    """Orthonormal ``2L x L`` basis of the contracting subspace of the cell transfer matrix."""

    Phi: np.ndarray
    eigenvalues: np.ndarray
    transfer: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.Phi.shape[1]

    @property
    def top(self) -> np.ndarray:
        return self.Phi[: self.L]

    @property
    def bottom(self) -> np.ndarray:
        return self.Phi[self.L:]

    def invariance_residual(self) -> float:
        """``||(1 - Phi Phi*) T Phi||``."""
        TP = self.transfer @ self.Phi
        return float(np.linalg.norm(TP - self.Phi @ (self.Phi.conj().T @ TP), ord=2))


def vertical_coefficients(model: HoppingModel, n: int, kappa: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vertical Jacobi coefficients ``(a_n, b_n)`` at Fourier momentum ``kappa``.

    With ``e_n = exp(i (phi n Q - kappa))`` taken entrywise,
    ``a_n = W4 e_n + W2 + W3 conj(e_n)`` and
    ``b_n = W1 e_n + V + W1* conj(e_n)``.
    """
    e = np.exp(1j * (model.phi * n * model.charge_matrix - kappa))
    a = model.W4 * e + model.W2 + model.W3 * e.conj()
    b = model.W1 * e + model.V + model.W1.conj().T * e.conj()
    return a, b


def vertical_cell_transfer(model: HoppingModel, E: float, k1: float,
                           tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Product ``T_p ... T_1`` of the vertical transfer matrices over one period.

    The half-space quantities at ``k1`` use the Fourier fiber ``-k1``.

    Raises
    ------
    VerticalHypothesisFailed
        If some ``a_n`` has smallest singular value below ``tol.sv_min``.

    Examples
    --------
    >>> from krein_topo.models import harper
    >>> T = vertical_cell_transfer(harper(0, 1)[0], -1.0, 0.0)
    >>> T.real.round(12).tolist()
    [[-3.0, -1.0], [1.0, 0.0]]
    """
    L = model.L
    kappa = -k1
    T = np.eye(2 * L, dtype=complex)
    Z = np.zeros((L, L))
    for n in range(1, model.p + 1):
        a, b = vertical_coefficients(model, n, kappa)
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[-1] < tol.sv_min:
            raise VerticalHypothesisFailed(n, k1, sv[-1])
        ai = np.linalg.inv(a)
        Tn = np.block([[(E * np.eye(L) - b) @ ai, -a.conj().T], [ai, Z]])
        T = Tn @ T
    return T


def contracting_frame(model: HoppingModel, E: float, k1: float, tol: Tolerances = DEFAULT_TOL) -> ContractingFrame:
    """Schur frame of the eigenvalues of modulus below one.

    Raises
    ------
    NotInGap
        If the cell transfer matrix has an eigenvalue within ``tol.circle``
        of the unit circle.
    WrongDimension
        If the contracting subspace does not have dimension ``L``.
    """
    T = vertical_cell_transfer(model, E, k1, tol)
    ev = np.linalg.eigvals(T)
    dist = np.min(np.abs(np.abs(ev) - 1.0))
    if dist <= tol.circle:
        raise NotInGap(f"unit eigenvalue of the vertical transfer at E={E}, k1={k1} (distance {dist:.3g})")
    S, Zs, sdim = sla.schur(T, output="complex", sort=lambda z: abs(z) < 1.0)
    if sdim != model.L:
        raise WrongDimension(sdim, model.L, k1)
    return ContractingFrame(Zs[:, :sdim], np.diag(S)[:sdim], T)


def edge_unitary(model: HoppingModel, E: float, k1: float, tol: Tolerances = DEFAULT_TOL,
                 frame: Optional[ContractingFrame] = None) -> np.ndarray:
    """The unitary ``U^E(k1) = (Phi_t - i Phi_b)(Phi_t + i Phi_b)^{-1}``.

    Raises
    ------
    NotLagrangian
        If ``Phi_t + i Phi_b`` is singular or the result is not unitary.
    """
    if frame is None:
        frame = contracting_frame(model, E, k1, tol)
    top, bot = frame.top, frame.bottom
    den = top + 1j * bot
    if np.linalg.svd(den, compute_uv=False)[-1] < tol.sv_min:
        raise NotLagrangian(f"singular frame denominator at k1={k1}")
    U = np.linalg.solve(den.T, (top - 1j * bot).T).T
    L = U.shape[0]
    res = np.linalg.norm(U.conj().T @ U - np.eye(L), ord=2)
    if res > 1e3 * tol.unitary:
        raise NotLagrangian(f"edge unitary fails unitarity by {res:.3g} at k1={k1}")
    return U


def eigenphases(model: HoppingModel, E: float, k1: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Sorted eigenphases of ``U^E(k1)`` in ``(-pi, pi]``."""
    ev = np.linalg.eigvals(edge_unitary(model, E, k1, tol))
    th = np.angle(ev)
    th[th <= -np.pi] += 2 * np.pi
    return np.sort(th)


# --- crossings ------------------------------------------------------------------


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def _match(prev: np.ndarray, cur: np.ndarray) -> Tuple[np.ndarray, float]:
    """Permutation of ``cur`` closest to ``prev`` in circular distance."""
    cost = np.abs(_wrap(cur[None, :] - prev[:, None]))
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    return perm, float(cost[np.arange(len(prev)), perm].max())


def _scan(model, E, ks, tol):
    return np.array(pmap(lambda k: eigenphases(model, E, k, tol), ks))


def _track(model, E, grid_size, tol):
    """Grid, phase table (branches as columns) and the signed steps between grid points."""
    n = grid_size
    for attempt in range(_REFINEMENTS + 1):
        ks = -np.pi + 2 * np.pi * (np.arange(n) + 1) / n
        raw = _scan(model, E, ks, tol)
        tracked = np.empty_like(raw)
        tracked[0] = raw[0]
        worst = 0.0
        for j in range(1, n):
            perm, d = _match(tracked[j - 1], raw[j])
            tracked[j] = raw[j][perm]
            worst = max(worst, d)
        # closing step from the last grid point back to the first
        perm, d = _match(tracked[-1], raw[0])
        worst = max(worst, d)
        if worst <= _MAX_PHASE_STEP:
            return ks, tracked, perm
        logger.info("eigenphase step %.3f exceeds pi/4 on %d points; refining", worst, n)
        n *= 2
    raise PhaseTrackingAmbiguous(f"eigenphase matching still ambiguous on {n // 2} grid points")


def _crosses(a: float, step: float) -> bool:
    """Whether the path from phase ``a`` by the signed ``step`` passes through zero (half-open)."""
    b = a + step
    return (a < 0.0 <= b) or (b < 0.0 <= a)


def _bisect(model, E, k_lo, th_lo, k_hi, th_hi, refine_tol, tol):
    """Bisect a branch that moves from ``th_lo`` to ``th_hi`` through zero."""
    step = float(_wrap(th_hi - th_lo))
    lo, hi = k_lo, k_hi
    a = th_lo
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        frac = (mid - k_lo) / (k_hi - k_lo)
        guess = th_lo + frac * step
        ph = eigenphases(model, E, mid, tol)
        th = ph[np.argmin(np.abs(_wrap(ph - guess)))]
        th = guess + float(_wrap(th - guess))
        if (a < 0.0) == (th < 0.0):
            lo, a = mid, th
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _branch_slopes(model, E, k, m, h, tol):
    """Derivatives of the ``m`` eigenphase branches through ``1`` at ``k``.

    The derivative of the eigenphases of a unitary family is given by the
    Hermitian matrix ``-i U* dU/dk`` compressed to the eigenspace.
    """
    U = edge_unitary(model, E, k, tol)
    dU = (edge_unitary(model, E, k + h, tol) - edge_unitary(model, E, k - h, tol)) / (2 * h)
    w, v = np.linalg.eig(U)
    idx = np.argsort(np.abs(w - 1.0))[:m]
    Q, _ = np.linalg.qr(v[:, idx])
    D = -1j * U.conj().T @ dU
    D = 0.5 * (D + D.conj().T)
    return np.sort(np.linalg.eigvalsh(Q.conj().T @ D @ Q))


def edge_crossings(model: HoppingModel, E: float, grid_size: int = DEFAULT_K1_GRID,
                   refine_tol: float = 1e-10, tol: Tolerances = DEFAULT_TOL) -> List[EdgeCrossing]:
    """All ``k1`` in ``(-pi, pi]`` where ``U^E(k1)`` has eigenvalue ``1``.

    The eigenphases are evaluated on ``grid_size`` equidistant points,
    matched between neighbours by a minimal circular assignment and followed
    through zero.  Each crossing is bisected to ``refine_tol``; branches
    ending within ``1e-7`` of each other are merged into one crossing with
    multiplicity.  Slopes come from a centered difference of ``U^E`` with
    step ``10 refine_tol``.

    Raises
    ------
    NotInGap
        If ``E`` is not in a gap at some grid point.
    PhaseTrackingAmbiguous
        If neighbouring phases move by more than ``pi/4`` even after three
        grid doublings.
    FlatBandDetected
        If a phase branch stays at zero over the whole grid.
    """
    ks, tracked, closing = _track(model, E, grid_size, tol)
    n, L = tracked.shape
    pinned = np.all(np.abs(tracked) < 1e-8, axis=0)
    if np.any(pinned):
        raise FlatBandDetected(f"{int(pinned.sum())} eigenphase branch(es) pinned at zero at E={E}")
    h = 2 * np.pi / n
    found = []
    for j in range(n):
        cur = tracked[j]
        if j + 1 < n:
            nxt = tracked[j + 1]
            k_hi = ks[j + 1]
        else:
            # wrap: branch b at the last point continues as column closing[b] at the first point
            nxt = tracked[0][closing]
            k_hi = ks[0] + 2 * np.pi
        for b in range(L):
            step = float(_wrap(nxt[b] - cur[b]))
            if _crosses(cur[b], step):
                found.append(_bisect(model, E, ks[j], cur[b], k_hi, cur[b] + step, refine_tol, tol))
    found = sorted(float(_wrap(k)) if _wrap(k) > -np.pi else np.pi for k in found)
    groups: List[List[float]] = []
    for k in found:
        if groups and abs(k - groups[-1][-1]) < _MERGE_TOL:
            groups[-1].append(k)
        else:
            groups.append([k])
    if len(groups) > 1 and abs(_wrap(groups[0][0] - groups[-1][-1])) < _MERGE_TOL:
        groups[0] = groups.pop() + groups[0]
    out = []
    for g in groups:
        k = float(np.mean(_unwrap_near(g)))
        k = float(_wrap(k)) if _wrap(k) > -np.pi else np.pi
        m = len(g)
        slopes = _branch_slopes(model, E, k, m, 10 * refine_tol, tol)
        if m == 1:
            sign = 1 if slopes[0] > 0 else -1
        else:
            bal = int(np.sum(slopes > 0) - np.sum(slopes < 0))
            sign = 1 if bal >= 0 else -1
        out.append(EdgeCrossing(k, sign, m, float(np.mean(slopes)), tuple(float(s) for s in slopes)))
    out.sort(key=lambda c: c.k1)
    return out


def _unwrap_near(ks: Sequence[float]) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    return ks[0] + _wrap(ks - ks[0])


# --- invariants -----------------------------------------------------------------


def edge_kind(metadata: SymmetryMetadata) -> SymmetryKind:
    """Kind ``(eta_F, eta_R, eta_FR)`` of the half-space transfer operator.

    The fundamental symmetry ``I`` squares to ``-1``.  Time reversal with
    ``I_s^2 = eta`` gives kind ``(-1, eta, 1)``; particle-hole symmetry with
    ``K_ph^2 = eta`` gives ``(-1, eta, -1)``.
    """
    info = metadata.real
    if info is None:
        return SymmetryKind(-1)
    name, sym = info
    return SymmetryKind(-1, sym.eta, 1 if name == "trs" else -1)


def crossings_to_krein(crossings: Sequence[EdgeCrossing]) -> List[KreinEigenvalue]:
    """Unit eigenvalues ``e^{i k1}`` with inertia from the branch slopes."""
    out = []
    for c in crossings:
        if any(s == 0 for s in c.branch_slopes):
            raise KreinTopoError(f"vanishing eigenphase slope at k1={c.k1}")
        out.append(KreinEigenvalue(c.lam, c.nu_plus, c.nu_minus, c.multiplicity))
    return out


def edge_invariants(model: HoppingModel, E: float, metadata: SymmetryMetadata,
                    crossings: Optional[Sequence[EdgeCrossing]] = None,
                    grid_size: int = DEFAULT_K1_GRID, tol: Tolerances = DEFAULT_TOL) -> InvariantSet:
    """Invariants of the half-space transfer operator selected by its kind."""
    if crossings is None:
        crossings = edge_crossings(model, E, grid_size, tol=tol)
    kind = edge_kind(metadata)
    return invariants_for_kind(crossings_to_krein(crossings), kind, atol=1e-6)


# --- Chern number ---------------------------------------------------------------


@dataclass(frozen=True)
class ChernResult:
    """Lattice Chern number of the Fermi projection and its rounding residual."""

    value: int
    raw: float
    residual: float
    occupied: int


def _wrap_gauge(model: HoppingModel) -> np.ndarray:
    """``G`` with ``H(k1, k2 + 2 pi / p) = G H(k1, k2) G*``."""
    phases = np.exp(2j * np.pi * np.arange(model.p) / model.p)
    return np.kron(np.diag(phases), np.eye(model.L))


def chern_number(model: HoppingModel, E: float, grid_size: int = 60, tol: Tolerances = DEFAULT_TOL,
                 max_residual: float = 0.01, gap_margin: float = 1e-6) -> ChernResult:
    """Chern number of the Fermi projection below ``E`` by lattice field strengths.

    The magnetic Brillouin zone ``(-pi, pi] x (-pi/p, pi/p]`` is covered by
    a ``grid_size x grid_size`` mesh.  Link variables are determinants of
    overlaps of occupied frames; the frames at ``k2 + 2 pi / p`` are
    obtained from those at ``k2`` by the wrap gauge, so the sum of plaquette
    phases is an integer multiple of ``2 pi`` up to rounding.

    Raises
    ------
    NotInGap
        If a Bloch eigenvalue comes within ``gap_margin`` of ``E``.
    NonIntegral
        If the sum deviates from an integer by more than ``max_residual``.
    """
    N = grid_size
    k1s = -np.pi + 2 * np.pi * np.arange(N) / N
    k2s = -np.pi / model.p + 2 * np.pi / model.p * np.arange(N) / N

    def row(k1):
        frames = []
        for k2 in k2s:
            w, v = np.linalg.eigh(bloch_hamiltonian(model, k1, k2))
            if np.min(np.abs(w - E)) < gap_margin:
                raise NotInGap(f"Bloch band within {gap_margin} of E={E} at k=({k1:.4f}, {k2:.4f})")
            frames.append(v[:, w < E])
        return frames

    U = pmap(row, k1s)
    occ = {f.shape[1] for r in U for f in r}
    if len(occ) != 1:
        raise NotInGap(f"number of bands below E={E} varies over the Brillouin zone")
    n_occ = occ.pop()
    if n_occ == 0:
        return ChernResult(0, 0.0, 0.0, 0)
    G = _wrap_gauge(model)

    def frame(i, j):
        if j >= N:
            return G @ U[i % N][j - N]
        return U[i % N][j]

    def link(u, v):
        return np.linalg.det(u.conj().T @ v)

    total = 0.0
    for i in range(N):
        for j in range(N):
            u00, u10, u11, u01 = frame(i, j), frame(i + 1, j), frame(i + 1, j + 1), frame(i, j + 1)
            total += np.angle(link(u00, u10) * link(u10, u11) * link(u11, u01) * link(u01, u00))
    raw = total / (2 * np.pi)
    value = int(np.rint(raw))
    residual = abs(raw - value)
    if residual > max_residual:
        raise NonIntegral(raw, residual)
    return ChernResult(value, float(raw), float(residual), n_occ)


# --- energy sweeps --------------------------------------------------------------


@dataclass(frozen=True)
class EnergyScan:
    """Edge crossings at one energy, or the reason they are missing."""

    energy: float
    status: str
    crossings: Tuple[EdgeCrossing, ...] = ()
    message: str = ""

    @property
    def signature(self) -> int:
        return sum(c.nu_plus - c.nu_minus for c in self.crossings)


def edge_bands(model: HoppingModel, E_min: float, E_max: float, n_E: int,
               grid_size: int = DEFAULT_K1_GRID, tol: Tolerances = DEFAULT_TOL) -> List[EnergyScan]:
    """Edge crossings over ``n_E`` equidistant energies in ``[E_min, E_max]``.

    Energies outside a gap are reported with status ``"not_in_gap"`` and no
    crossings; other failures are reported with status ``"error"``.
    """
    energies = np.linspace(E_min, E_max, n_E) if n_E > 1 else np.array([E_min])

    def one(E):
        try:
            return EnergyScan(float(E), "ok", tuple(edge_crossings(model, float(E), grid_size, tol=tol)))
        except (NotInGap, WrongDimension) as exc:
            return EnergyScan(float(E), "not_in_gap", (), str(exc))
        except KreinTopoError as exc:
            return EnergyScan(float(E), "error", (), f"{type(exc).__name__}: {exc}")

    return pmap(one, energies)
