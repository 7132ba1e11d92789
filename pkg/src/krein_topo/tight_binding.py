"""Periodic tight-binding Hamiltonians on the square lattice with rational flux.

A :class:`HoppingModel` stores ``L x L`` hopping matrices ``W1 .. W4`` and an
on-site matrix ``V``.  With the magnetic translations
``U1 = exp(-i phi X2) S1``, ``U2 = S2``, ``U3 = U1* U2`` and ``U4 = U1 U2`` the
Hamiltonian is

.. math::

    H = \\sum_{i=1}^{4} (W_i^* U_i + W_i U_i^*) + V,

acting on ``l^2(Z^2) (x) C^L``.  Internal degrees of freedom may carry a
charge ``c = +-1``; the Peierls phase of the entry ``(alpha, beta)`` of a
hopping matrix is then taken with flux ``phi (c_alpha + c_beta) / 2``.  This
covers Bogoliubov-de Gennes models whose hole block sees the conjugate flux
and whose pairing terms carry no Peierls phase.  Ordinary models have all
charges equal to ``+1``.

The Hamiltonian is a Jacobi matrix ``A S1* + B + A* S1`` in direction 1.  In
the magnetic Bloch representation with ``p`` sites per cell in direction 2,
the coefficient operators become ``Lp x Lp`` matrices ``A(k2)``, ``B(k2)``
(:func:`fiber_AB`), from which the Bloch Hamiltonian and the bulk transfer
matrix in direction 1 are formed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ._config import DEFAULT_TOL, Tolerances, pmap
from .errors import BadParams, StrongHypothesisFailed
from .krein import Symmetry

logger = logging.getLogger(__name__)

__all__ = [
    "HoppingModel",
    "SymmetryMetadata",
    "GapStatus",
    "fiber_AB",
    "bloch_hamiltonian",
    "bloch_bands",
    "bulk_transfer_fiber",
    "bulk_transfer_spectrum",
    "gap_status",
    "lattice_hamiltonian",
    "magnetic_translations",
    "verify_metadata",
    "transfer_real_symmetry",
    "transfer_chiral_symmetry",
    "k2_grid",
]


@dataclass(frozen=True, eq=False)
class HoppingModel:
    """Coefficient matrices of a periodic Hamiltonian with rational flux ``2 pi q / p``.

    Parameters
    ----------
    W1, W2, W3, W4 : array_like
        ``L x L`` hopping matrices for the magnetic translations ``U1 .. U4``.
        ``W3`` and ``W4`` default to zero.
    V : array_like
        Hermitian on-site matrix.
    q, p : int
        Flux numerator and denominator.  Stored in lowest terms with ``p > 0``.
    charge : array_like of {+1, -1}, optional
        Charge of each internal degree of freedom; defaults to all ``+1``.
    name : str
        Free-form label used in reports.
    """

    W1: np.ndarray
    W2: np.ndarray
    V: np.ndarray
    W3: Optional[np.ndarray] = None
    W4: Optional[np.ndarray] = None
    q: int = 0
    p: int = 1
    charge: Optional[np.ndarray] = None
    name: str = "model"
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        V = np.asarray(self.V, dtype=complex)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise BadParams(f"V must be square, got shape {V.shape}")
        L = V.shape[0]
        mats = {}
        for key in ("W1", "W2", "W3", "W4"):
            M = getattr(self, key)
            M = np.zeros((L, L), dtype=complex) if M is None else np.array(M, dtype=complex)
            if M.shape != (L, L):
                raise BadParams(f"{key} must have shape {(L, L)}, got {M.shape}")
            if not np.all(np.isfinite(M)):
                raise BadParams(f"{key} has non-finite entries")
            mats[key] = M
        if np.linalg.norm(V - V.conj().T, ord=2) > self.tol.unitary:
            raise BadParams("V must be Hermitian")
        p, q = int(self.p), int(self.q)
        if p < 1:
            raise BadParams(f"flux denominator must be positive, got {p}")
        g = math.gcd(q, p)
        q, p = q // g, p // g
        c = np.ones(L) if self.charge is None else np.asarray(self.charge, dtype=float).ravel()
        if c.shape != (L,) or not np.all(np.isin(c, (-1.0, 1.0))):
            raise BadParams("charge must be a vector of +-1 of length L")
        for key, M in mats.items():
            M.setflags(write=False)
            object.__setattr__(self, key, M)
        V = V.copy()
        V.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "charge", c)

    @property
    def L(self) -> int:
        return self.V.shape[0]

    @property
    def phi(self) -> float:
        """Flux per plaquette, ``2 pi q / p``."""
        return 2.0 * np.pi * self.q / self.p

    @property
    def charge_matrix(self) -> np.ndarray:
        """Entrywise flux multipliers ``(c_alpha + c_beta) / 2``."""
        c = self.charge
        return 0.5 * (c[:, None] + c[None, :])

    def W(self, i: int) -> np.ndarray:
        return {1: self.W1, 2: self.W2, 3: self.W3, 4: self.W4}[i]

    def replace(self, **changes) -> "HoppingModel":
        """Copy with some fields replaced."""
        kw = dict(W1=self.W1, W2=self.W2, V=self.V, W3=self.W3, W4=self.W4, q=self.q, p=self.p,
                  charge=self.charge, name=self.name, tol=self.tol)
        kw.update(changes)
        return HoppingModel(**kw)


@dataclass(frozen=True, eq=False)
class SymmetryMetadata:
    """Declared symmetries of a model.

    Attributes
    ----------
    trs : Symmetry or None
        Spin rotation ``I_s`` of a time reversal symmetry
        ``I_s* conj(H) I_s = H``.
    phs : Symmetry or None
        ``K_ph`` of a particle-hole symmetry ``K_ph* conj(H) K_ph = -H``.
    chiral : Symmetry or None
        ``K_c`` of a chiral symmetry ``K_c* H K_c = -H``.

    The parities are the square signs of the stored symmetries.
    """

    trs: Optional[Symmetry] = None
    phs: Optional[Symmetry] = None
    chiral: Optional[Symmetry] = None

    @classmethod
    def build(cls, trs=None, phs=None, chiral=None) -> "SymmetryMetadata":
        wrap = lambda M, flavor: None if M is None else (M if isinstance(M, Symmetry) else Symmetry(np.asarray(M), None, flavor))
        return cls(wrap(trs, "real"), wrap(phs, "real"), wrap(chiral, "chiral"))

    @property
    def real(self) -> Optional[Tuple[str, Symmetry]]:
        """The symmetry that induces a Real structure on transfer matrices."""
        if self.trs is not None:
            return ("trs", self.trs)
        if self.phs is not None:
            return ("phs", self.phs)
        return None

    def as_dict(self) -> dict:
        out = {}
        for name in ("trs", "phs", "chiral"):
            s = getattr(self, name)
            if s is not None:
                out[name] = {"matrix": s.matrix, "parity": s.eta}
        return out


# --- fibers ----------------------------------------------------------------------


def _phase(model: HoppingModel, m: float) -> np.ndarray:
    return np.exp(1j * model.phi * m * model.charge_matrix)


def fiber_AB(model: HoppingModel, k2: float) -> Tuple[np.ndarray, np.ndarray]:
    """Magnetic Bloch fibers ``A(k2)`` and ``B(k2)``, each ``Lp x Lp``.

    Block rows and columns are labelled by ``m in Z_p``; the flux phase is
    ``exp(i phi m)`` (entrywise weighted by the charge matrix).  With
    Kronecker deltas modulo ``p``::

        A[m, m]   = W1 e^{i phi m}
        A[m, m-1] = W3* e^{i phi m} e^{i k2}
        A[m, m+1] = W4 e^{i phi (m+1)} e^{-i k2}
        B[m, m+1] = W2 e^{-i k2},   B[m, m-1] = W2* e^{i k2},   B[m, m] = V

    so that ``B(k2)`` is Hermitian.  For ``p = 1`` the off-diagonal
    contributions add up on the diagonal.  These are the coefficients of
    ``S1*`` in the operator sum over ``U1 .. U4``: the term ``W3* U3`` shifts
    by ``+e1 - e2`` and ``W4 U4*`` by ``+e1 + e2``.

    Examples
    --------
    >>> from krein_topo.models import harper
    >>> A, B = fiber_AB(harper(0, 1)[0], 0.3)
    >>> bool(np.isclose(B[0, 0], 2 * np.cos(0.3)))
    True
    """
    L, p = model.L, model.p
    A = np.zeros((L * p, L * p), dtype=complex)
    B = np.zeros_like(A)
    e = np.exp(1j * k2)
    W3s = model.W3.conj().T
    W2s = model.W2.conj().T
    for m in range(p):
        r = slice(m * L, (m + 1) * L)
        up = slice(((m + 1) % p) * L, ((m + 1) % p + 1) * L)
        dn = slice(((m - 1) % p) * L, ((m - 1) % p + 1) * L)
        ph = _phase(model, m)
        A[r, r] += model.W1 * ph
        A[r, dn] += W3s * ph * e
        A[r, up] += model.W4 * _phase(model, m + 1) / e
        B[r, r] += model.V
        B[r, up] += model.W2 / e
        B[r, dn] += W2s * e
    return A, B


def bloch_hamiltonian(model: HoppingModel, k1: float, k2: float) -> np.ndarray:
    """``H(k1, k2) = A(k2) e^{-i k1} + B(k2) + A(k2)* e^{i k1}``."""
    A, B = fiber_AB(model, k2)
    H = A * np.exp(-1j * k1) + B + A.conj().T * np.exp(1j * k1)
    return 0.5 * (H + H.conj().T)


def k2_grid(p: int, n: int) -> np.ndarray:
    """``n`` points of ``(-pi/p, pi/p]``, including ``0`` when ``n`` is odd."""
    j = np.arange(n)
    if n % 2:
        return (2.0 * np.pi / p) * (j - (n - 1) / 2) / n
    return -np.pi / p + (2.0 * np.pi / p) * (j + 1) / n


def _k1_grid(n: int) -> np.ndarray:
    j = np.arange(n)
    if n % 2:
        return 2.0 * np.pi * (j - (n - 1) / 2) / n
    return -np.pi + 2.0 * np.pi * (j + 1) / n


def bloch_bands(model: HoppingModel, grid_size: int = 201) -> np.ndarray:
    """Bloch eigenvalues on a ``grid_size x grid_size`` grid, shape ``(n, n, Lp)``.

    The first axis runs over ``k1``, the second over ``k2``.
    """
    k1s, k2s = _k1_grid(grid_size), k2_grid(model.p, grid_size)
    ph = np.exp(-1j * k1s)[:, None, None]

    def column(k2):
        A, B = fiber_AB(model, k2)
        H = A[None] * ph + B[None] + A.conj().T[None] * ph.conj()
        return np.linalg.eigvalsh(0.5 * (H + np.conj(np.swapaxes(H, 1, 2))))

    return np.stack(pmap(column, k2s), axis=1)


def bulk_transfer_fiber(model: HoppingModel, E: float, k2: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Transfer matrix ``[[(E - B) A^{-1}, -A*], [A^{-1}, 0]]`` of the fiber at ``k2``.

    It maps ``(A psi_n, psi_{n-1})`` to ``(A psi_{n+1}, psi_n)`` for solutions of
    ``A* psi_{n+1} + B psi_n + A psi_{n-1} = E psi_n`` and is unitary for the
    fundamental symmetry ``I``.

    Raises
    ------
    StrongHypothesisFailed
        If the smallest singular value of ``A(k2)`` is below ``tol.sv_min``.
    """
    A, B = fiber_AB(model, k2)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] < tol.sv_min:
        raise StrongHypothesisFailed(k2, sv[-1])
    n = A.shape[0]
    Ainv = np.linalg.inv(A)
    return np.block([[(E * np.eye(n) - B) @ Ainv, -A.conj().T], [Ainv, np.zeros((n, n))]])


def bulk_transfer_spectrum(model: HoppingModel, E: float, k2_grid_size: int = 201,
                           tol: Tolerances = DEFAULT_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the bulk transfer fibers over a uniform ``k2`` grid.

    Returns
    -------
    k2 : numpy.ndarray
        Momentum of each eigenvalue (repeated ``2 L p`` times per grid point).
    eigenvalues : numpy.ndarray
        The point cloud.
    """
    ks = k2_grid(model.p, k2_grid_size)
    ev = pmap(lambda k: np.linalg.eigvals(bulk_transfer_fiber(model, E, k, tol)), ks)
    n = 2 * model.L * model.p
    return np.repeat(ks, n), np.concatenate(ev)


@dataclass(frozen=True)
class GapStatus:
    """Result of :func:`gap_status`.

    Attributes
    ----------
    in_gap : bool
        Both criteria agree that ``E`` lies in a gap.
    transfer_distance : float
        Smallest ``| |lambda| - 1 |`` over the bulk transfer spectrum.
    band_distance : float
        Smallest distance of ``E`` to a Bloch eigenvalue on the grid.
    """

    in_gap: bool
    transfer_distance: float
    band_distance: float


def gap_status(model: HoppingModel, E: float, grid_size: int = 201, tol: Tolerances = DEFAULT_TOL,
               transfer_threshold: float = 1e-3, band_threshold: float = 1e-6) -> GapStatus:
    """Decide whether ``E`` lies in a spectral gap of the bulk Hamiltonian.

    ``E`` is declared in a gap when the bulk transfer spectrum keeps a
    distance larger than ``transfer_threshold`` from the unit circle and no
    Bloch band comes within ``band_threshold`` of ``E`` on the grid.
    """
    _, ev = bulk_transfer_spectrum(model, E, grid_size, tol)
    td = float(np.min(np.abs(np.abs(ev) - 1.0)))
    bands = bloch_bands(model, grid_size)
    bd = float(np.min(np.abs(bands - E)))
    return GapStatus(td > transfer_threshold and bd > band_threshold, td, bd)


# --- real space -----------------------------------------------------------------


def magnetic_translations(n1: int, n2: int, phi: float, periodic: Tuple[bool, bool] = (True, True)) -> Dict[int, np.ndarray]:
    """Dense matrices of ``U1 .. U4`` on an ``n1 x n2`` patch.

    Sites ``(x1, x2)`` with ``0 <= x_i < n_i`` are ordered as
    ``x1 * n2 + x2``.  ``(U1 psi)(x) = e^{-i phi x2} psi(x - e1)`` and
    ``(U2 psi)(x) = psi(x - e2)``; ``U3 = U1* U2`` and ``U4 = U1 U2``.  Open
    directions use Dirichlet truncation, periodic ones wrap around.
    """
    N = n1 * n2

    def shift(d1, d2):
        S = np.zeros((N, N), dtype=complex)
        for x1 in range(n1):
            for x2 in range(n2):
                y1, y2 = x1 - d1, x2 - d2
                if periodic[0]:
                    y1 %= n1
                if periodic[1]:
                    y2 %= n2
                if 0 <= y1 < n1 and 0 <= y2 < n2:
                    S[x1 * n2 + x2, y1 * n2 + y2] = 1.0
        return S

    x2 = np.tile(np.arange(n2), n1)
    P = np.diag(np.exp(-1j * phi * x2))
    U1 = P @ shift(1, 0)
    U2 = shift(0, 1)
    return {1: U1, 2: U2, 3: U1.conj().T @ U2, 4: U1 @ U2}


def lattice_hamiltonian(model: HoppingModel, n1: int, n2: int,
                        periodic: Tuple[bool, bool] = (True, True)) -> np.ndarray:
    """Dense real-space Hamiltonian on an ``n1 x n2`` patch.

    The index of site ``(x1, x2)`` and internal state ``alpha`` is
    ``(x1 * n2 + x2) * L + alpha``.  Each entry ``(alpha, beta)`` of a hopping
    matrix is combined with magnetic translations at flux
    ``phi (c_alpha + c_beta) / 2``.  With a periodic direction 2 the
    flux requires ``n2`` to be a multiple of ``p``.
    """
    if periodic[1] and n2 % model.p:
        raise BadParams(f"periodic n2={n2} must be a multiple of p={model.p}")
    L = model.L
    Q = model.charge_matrix
    N = n1 * n2
    H = np.kron(np.eye(N), model.V).astype(complex)
    cache: Dict[float, Dict[int, np.ndarray]] = {}
    for a in range(L):
        for b in range(L):
            qab = float(Q[a, b])
            if qab not in cache:
                cache[qab] = magnetic_translations(n1, n2, model.phi * qab, periodic)
            U = cache[qab]
            E_ab = np.zeros((L, L))
            E_ab[a, b] = 1.0
            for i in (1, 2, 3, 4):
                W = model.W(i)
                c_adj = np.conj(W[b, a])  # entry (a, b) of W*
                c = W[a, b]
                if c_adj == 0 and c == 0:
                    continue
                H += np.kron(c_adj * U[i] + c * U[i].conj().T, E_ab)
    return H


# --- symmetries ------------------------------------------------------------------


def verify_metadata(model: HoppingModel, metadata: SymmetryMetadata, k2_samples: int = 7,
                    tol: Tolerances = DEFAULT_TOL) -> Dict[str, bool]:
    """Check declared symmetries on the fibers ``A(k2)``, ``B(k2)``.

    Complex conjugation maps the fiber at ``k2`` to the fiber at ``-k2``, so
    the relations checked are ``I_s* conj(X(k2)) I_s = X(-k2)`` for time
    reversal, ``K_ph* conj(X(k2)) K_ph = -X(-k2)`` for particle-hole symmetry
    and ``K_c* X(k2) K_c = -X(k2)`` for a chiral symmetry, with ``X = A, B``
    and the fiber matrices ``1_p (x) M``.
    """
    out = {}
    ks = k2_grid(model.p, k2_samples)
    eye_p = np.eye(model.p)
    bound = tol.sym * max(1.0, max(np.abs(model.W(i)).max() for i in (1, 2, 3, 4)), np.abs(model.V).max())
    for name in ("trs", "phs", "chiral"):
        sym = getattr(metadata, name)
        if sym is None:
            continue
        if sym.dimension != model.L:
            out[name] = False
            continue
        M = np.kron(eye_p, sym.matrix)
        ok = True
        for k in ks:
            A, B = fiber_AB(model, k)
            Am, Bm = fiber_AB(model, -k)
            for X, Xm in ((A, Am), (B, Bm)):
                if name == "trs":
                    r = M.T @ X.conj() @ M - Xm
                elif name == "phs":
                    r = M.T @ X.conj() @ M + Xm
                else:
                    r = M.T @ X @ M + X
                ok &= bool(np.max(np.abs(r)) <= bound)
        out[name] = ok
    return out


def transfer_real_symmetry(model: HoppingModel, metadata: SymmetryMetadata, size: Optional[int] = None) -> Optional[Symmetry]:
    """Real symmetry of transfer matrices induced by the model symmetry.

    Time reversal gives ``1 (x) I_s`` and particle-hole symmetry gives
    ``J (x) K_ph`` in the two-component grading of the transfer matrices;
    the internal matrix is repeated over ``size / L`` fiber copies
    (default ``p``).
    """
    info = metadata.real
    if info is None:
        return None
    name, sym = info
    copies = model.p if size is None else size // model.L
    inner = np.kron(np.eye(copies), sym.matrix)
    outer = np.eye(2) if name == "trs" else np.diag([1.0, -1.0])
    return Symmetry(np.kron(outer, inner), None, "real")


def transfer_chiral_symmetry(model: HoppingModel, metadata: SymmetryMetadata, size: Optional[int] = None) -> Optional[Symmetry]:
    """Chiral symmetry ``J (x) K_c`` of transfer matrices at energy zero."""
    if metadata.chiral is None:
        return None
    copies = model.p if size is None else size // model.L
    inner = np.kron(np.eye(copies), metadata.chiral.matrix)
    return Symmetry(np.kron(np.diag([1.0, -1.0]), inner), None, "chiral")
