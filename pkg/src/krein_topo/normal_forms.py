"""Real basis changes bringing symmetries to canonical block form.

Every function returns a :class:`NormalFormResult` whose real unitary ``U``
conjugates the given symmetries into matrices assembled from the constant
blocks

.. math::

    I = \\begin{pmatrix} 0 & -1 \\\\ 1 & 0 \\end{pmatrix},\\quad
    J = \\begin{pmatrix} 1 & 0 \\\\ 0 & -1 \\end{pmatrix},\\quad
    K = \\begin{pmatrix} 0 & 1 \\\\ 1 & 0 \\end{pmatrix},

each entry being a multiple of an identity block.  The constructions are
explicit: real eigenbases where the symmetries commute and orbit bases
``(u, J_R u, ...)`` built vector by vector where they anti-commute.

The module also provides the chiral reduction of a J-unitary with chiral
symmetry and membership tests for the classical matrix groups that arise as
groups of J-unitaries with additional symmetries.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from ._config import DEFAULT_TOL, Tolerances
from .errors import ConvergenceFailure, DimensionMismatch, InconsistentSigns, OddDimension, SingularBlock
from .krein import Symmetry, SymmetryKind, as_symmetry, check_symmetries

logger = logging.getLogger(__name__)

__all__ = [
    "CanonicalBlocks",
    "NormalFormResult",
    "ChiralReduction",
    "canonical_blocks",
    "block_I",
    "block_J",
    "block_K",
    "normalize_fundamental",
    "normalize_pair",
    "normalize_triple",
    "switch_symmetries",
    "chiral_reduce",
    "chiral_embed",
    "group_membership",
    "GROUP_TAGS",
]


# --- constant blocks ----------------------------------------------------------


def block_J(n_plus: int, n_minus: Optional[int] = None) -> np.ndarray:
    """``diag(1_{n_plus}, -1_{n_minus})``; ``n_minus`` defaults to ``n_plus``."""
    n_minus = n_plus if n_minus is None else n_minus
    return np.diag(np.concatenate([np.ones(n_plus), -np.ones(n_minus)]))


def block_I(n: int) -> np.ndarray:
    """``[[0, -1], [1, 0]]`` with ``n x n`` blocks."""
    return np.kron(np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(n))


def block_K(n: int) -> np.ndarray:
    """``[[0, 1], [1, 0]]`` with ``n x n`` blocks."""
    return np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(n))


@dataclass(frozen=True)
class CanonicalBlocks:
    """The constant matrices ``I, J, K, C, R`` for given block sizes.

    ``J`` exists for any block sizes.  Accessing ``I``, ``K``, ``C`` or ``R``
    with unequal blocks raises :class:`OddDimension`.

    ``C = (1/sqrt 2)[[1, -i], [1, i]]`` is the Cayley transform with
    ``C* J C = i I`` and ``R = (1/sqrt 2)[[1, 1], [1, -1]]`` the reflection
    with ``R* J R = K`` and ``R* I R = -I``.
    """

    n_plus: int
    n_minus: int

    def _n(self, name: str) -> int:
        if self.n_plus != self.n_minus:
            raise OddDimension(
                f"{name} needs blocks of equal size, got ({self.n_plus}, {self.n_minus})"
            )
        return self.n_plus

    @property
    def J(self) -> np.ndarray:
        return block_J(self.n_plus, self.n_minus)

    @property
    def I(self) -> np.ndarray:  # noqa: E743 - the block is called I throughout
        return block_I(self._n("I"))

    @property
    def K(self) -> np.ndarray:
        return block_K(self._n("K"))

    @property
    def C(self) -> np.ndarray:
        n = self._n("C")
        return np.kron(np.array([[1.0, -1j], [1.0, 1j]]) / np.sqrt(2.0), np.eye(n))

    @property
    def R(self) -> np.ndarray:
        n = self._n("R")
        return np.kron(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0), np.eye(n))

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {"I": self.I, "J": self.J, "K": self.K, "C": self.C, "R": self.R}


def canonical_blocks(n_plus: int, n_minus: Optional[int] = None) -> CanonicalBlocks:
    """Constant block matrices with blocks of sizes ``n_plus`` and ``n_minus``.

    Examples
    --------
    >>> canonical_blocks(1, 1).I
    array([[ 0., -1.],
           [ 1.,  0.]])
    """
    n_minus = n_plus if n_minus is None else n_minus
    if n_plus < 0 or n_minus < 0:
        raise ValueError("block sizes must be nonnegative")
    return CanonicalBlocks(int(n_plus), int(n_minus))


# --- result type --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalFormResult:
    """Real unitary ``U`` with ``U* J_X U = target_X`` for each supplied symmetry.

    Attributes
    ----------
    U : numpy.ndarray
        Real orthogonal basis change.
    target_F, target_R, target_C : numpy.ndarray or None
        Canonical forms of the fundamental, Real and chiral symmetries.
    kind : SymmetryKind
        Signs of the input symmetries.
    dims : dict
        Block sizes of the canonical form, keyed by descriptive names.
    case : str
        Short label of the case that was applied.
    """

    U: np.ndarray
    target_F: np.ndarray
    target_R: Optional[np.ndarray]
    target_C: Optional[np.ndarray]
    kind: SymmetryKind
    dims: dict = field(default_factory=dict)
    case: str = ""

    def residuals(self, J_F, J_R=None, J_C=None) -> Dict[str, float]:
        """Spectral norms of ``U* J_X U - target_X`` and of ``U^t U - 1``."""
        U = self.U
        out = {"unitary": float(np.linalg.norm(U.T @ U - np.eye(U.shape[0]), ord=2))}
        for name, M, tgt in (("F", J_F, self.target_F), ("R", J_R, self.target_R), ("C", J_C, self.target_C)):
            if M is not None and tgt is not None:
                M = M.matrix if isinstance(M, Symmetry) else np.asarray(M)
                out[name] = float(np.linalg.norm(U.T @ M @ U - tgt, ord=2))
        return out


# --- helpers --------------------------------------------------------------------


def _eigspace(S: np.ndarray, value: float) -> np.ndarray:
    """Real orthonormal basis of the eigenspace of a real symmetric involution."""
    S = 0.5 * (S + S.T)
    w, v = np.linalg.eigh(S)
    return v[:, np.abs(w - value) < 0.5]


def _orth_against(x: np.ndarray, basis: List[np.ndarray]) -> np.ndarray:
    """Modified Gram-Schmidt of ``x`` against ``basis``, applied twice."""
    for _ in range(2):
        for b in basis:
            x = x - b * (b @ x)
    return x


def _orbit_basis(
    seeds: np.ndarray, maps: Sequence[Callable[[np.ndarray], np.ndarray]], n_blocks: int
) -> List[List[np.ndarray]]:
    """Build orthonormal orbit blocks ``(m_0 u, m_1 u, ...)`` one vector at a time.

    ``seeds`` spans the subspace the generators ``u`` are taken from.  Each new
    ``u`` is a seed made orthogonal to all previously produced block vectors.
    The orthogonal complement of the span of finished blocks is invariant
    under the symmetries, so the new block is orthogonal to the old ones.
    """
    used: List[np.ndarray] = []
    blocks: List[List[np.ndarray]] = []
    cols = list(seeds.T)
    k = 0
    while len(blocks) < n_blocks:
        if k >= len(cols):
            raise ConvergenceFailure("orbit basis construction ran out of seeds")
        x = _orth_against(cols[k].copy(), used)
        k += 1
        nrm = np.linalg.norm(x)
        if nrm < 1e-8:
            continue
        u = x / nrm
        block = [m(u) for m in maps]
        # tidy rounding drift of the images
        block = [b / np.linalg.norm(b) for b in block]
        blocks.append(block)
        used.extend(block)
    return blocks


def _stack(blocks: List[List[np.ndarray]]) -> np.ndarray:
    """Columns grouped by orbit position: all first vectors, then all second ones, ..."""
    if not blocks:
        return np.zeros((0, 0))
    width = len(blocks[0])
    return np.column_stack([b[i] for i in range(width) for b in blocks])


def _polish(U: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (removes rounding drift)."""
    if U.size == 0:
        return U
    W, _, Vt = np.linalg.svd(U)
    return W @ Vt


def _sym(M, flavor: str, tol: Tolerances) -> Symmetry:
    return as_symmetry(M, flavor, tol)


def _check_result(res: NormalFormResult, J_F, J_R, J_C, tol: Tolerances) -> NormalFormResult:
    r = res.residuals(J_F, J_R, J_C)
    worst = max(r.values())
    if worst > 100 * tol.unitary:
        raise ConvergenceFailure(f"normal form residuals too large: {r}")
    return res


# --- one symmetry -----------------------------------------------------------------


def _fundamental_basis(F: np.ndarray, eta: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    n = F.shape[0]
    if eta == 1:
        Vp, Vm = _eigspace(F, 1.0), _eigspace(F, -1.0)
        return np.hstack([Vp, Vm]), (Vp.shape[1], Vm.shape[1])
    if n % 2:
        raise OddDimension("a real symmetry squaring to -1 needs even dimension")
    # v spans the eigenspace of F for the eigenvalue i, i.e. iF v = -v
    w, vec = np.linalg.eigh(1j * F)
    v = vec[:, w < 0]
    if v.shape[1] != n // 2:
        raise ConvergenceFailure("eigenspaces of an antisymmetric involution are unbalanced")
    V = np.hstack([v.conj(), v])
    U = V @ canonical_blocks(n // 2).C
    if np.max(np.abs(U.imag)) > 1e-8:
        raise ConvergenceFailure("Cayley transformed basis is not real")
    return _polish(U.real), (n // 2, n // 2)


def normalize_fundamental(J_F, tol: Tolerances = DEFAULT_TOL) -> NormalFormResult:
    """Real unitary bringing a fundamental symmetry to ``J`` or ``I``.

    For ``eta_F = +1`` the basis is a real eigenbasis, positive eigenvalues
    first, and the target is ``J(n_+, n_-)``.  For ``eta_F = -1`` an
    orthonormal basis ``v`` of the eigenspace for ``i`` yields ``V = (conj v, v)``
    with ``V* J_F V = -i J``; composing with the Cayley transform gives a real
    ``U`` with target ``I``.

    Examples
    --------
    >>> import numpy as np
    >>> res = normalize_fundamental(np.array([[0.0, 1.0], [1.0, 0.0]]))
    >>> np.allclose(res.U.T @ np.array([[0, 1], [1, 0]]) @ res.U, np.diag([1, -1]))
    True
    """
    J_F = _sym(J_F, "fundamental", tol)
    U, (a, b) = _fundamental_basis(J_F.matrix, J_F.eta)
    target = block_J(a, b) if J_F.eta == 1 else block_I(a)
    res = NormalFormResult(U, target, None, None, SymmetryKind(J_F.eta), {"n_plus": a, "n_minus": b},
                           "J" if J_F.eta == 1 else "I")
    return _check_result(res, J_F, None, None, tol)


# --- two symmetries ----------------------------------------------------------------


def normalize_pair(J_F, J_R, tol: Tolerances = DEFAULT_TOL) -> NormalFormResult:
    """Real unitary bringing a fundamental and a Real symmetry to normal form.

    =====================  ======================  =========================
    kind                   target ``J_F``           target ``J_R``
    =====================  ======================  =========================
    ``(1, 1, 1)``          ``J``                    ``J' + J''``
    ``(1, -1, 1)``         ``J``                    ``I' + I''``
    ``(-1, 1, 1)``         ``I``                    ``J' + J'``
    ``(-1, -1, 1)``        ``I``                    ``[[0, -J'], [J', 0]]``
    ``(1, 1, -1)``         ``J``                    ``K``
    ``(1, -1, -1)``        ``J``                    ``I``
    ``(-1, 1, -1)``        ``I``                    ``J``
    ``(-1, -1, -1)``       ``I``                    ``I' + (-I')``
    =====================  ======================  =========================

    Here ``+`` is the direct sum and primes denote blocks of smaller size.

    Raises
    ------
    InconsistentSigns
        If the two symmetries neither commute nor anti-commute.
    """
    J_F = _sym(J_F, "fundamental", tol)
    J_R = _sym(J_R, "real", tol)
    if J_F.dimension != J_R.dimension:
        raise DimensionMismatch("symmetries act on spaces of different dimension")
    kind = SymmetryKind.from_symmetries(J_F, J_R, tol=tol)
    F, R = J_F.matrix, J_R.matrix
    eF, eR, eFR = kind.triple
    n = F.shape[0]
    dims: dict = {}

    if eFR == 1:
        if eF == 1 and eR == 1:
            Ep, Em = _eigspace(F, 1.0), _eigspace(F, -1.0)
            parts = []
            for E in (Ep, Em):
                Rr = E.T @ R @ E
                parts.append(E @ np.hstack([_eigspace(Rr, 1.0), _eigspace(Rr, -1.0)]))
            U = np.hstack(parts)
            tR = [block_J(int(np.sum(np.linalg.eigvalsh(E.T @ R @ E) > 0)),
                          int(np.sum(np.linalg.eigvalsh(E.T @ R @ E) < 0))) for E in (Ep, Em)]
            tF, tRR = block_J(Ep.shape[1], Em.shape[1]), sla.block_diag(*tR)
            dims = {"n_plus": Ep.shape[1], "n_minus": Em.shape[1]}
            case = "J, J'+J''"
        elif eF == 1 and eR == -1:
            Ep, Em = _eigspace(F, 1.0), _eigspace(F, -1.0)
            parts, tR = [], []
            for E in (Ep, Em):
                if E.shape[1] == 0:
                    continue
                W, _ = _fundamental_basis(E.T @ R @ E, -1)
                parts.append(E @ W)
                tR.append(block_I(E.shape[1] // 2))
            U = np.hstack(parts)
            tF, tRR = block_J(Ep.shape[1], Em.shape[1]), sla.block_diag(*tR)
            dims = {"n_plus": Ep.shape[1], "n_minus": Em.shape[1]}
            case = "J, I'+I''"
        elif eF == -1 and eR == 1:
            xs, ys, signs = [], [], []
            for s in (1.0, -1.0):
                E = _eigspace(R, s)
                if E.shape[1] == 0:
                    continue
                W, _ = _fundamental_basis(E.T @ F @ E, -1)
                B = E @ W
                h = B.shape[1] // 2
                xs.append(B[:, :h])
                ys.append(B[:, h:])
                signs.append(np.full(h, s))
            U = np.hstack(xs + ys)
            Jp = np.diag(np.concatenate(signs))
            tF, tRR = block_I(n // 2), sla.block_diag(Jp, Jp)
            dims = {"k_plus": int(np.sum(Jp > 0)), "k_minus": int(np.sum(np.diag(Jp) < 0))}
            case = "I, J'+J'"
        else:
            S = F @ R
            xs, ys, signs = [], [], []
            # on the eigenspace S = -1 the Real symmetry equals J_F, on S = +1 it equals -J_F
            for s, sign in ((-1.0, 1.0), (1.0, -1.0)):
                E = _eigspace(S, s)
                if E.shape[1] == 0:
                    continue
                W, _ = _fundamental_basis(E.T @ F @ E, -1)
                B = E @ W
                h = B.shape[1] // 2
                xs.append(B[:, :h])
                ys.append(B[:, h:])
                signs.append(np.full(h, sign))
            U = np.hstack(xs + ys)
            Jp = np.diag(np.concatenate(signs))
            Z = np.zeros_like(Jp)
            tF, tRR = block_I(n // 2), np.block([[Z, -Jp], [Jp, Z]])
            dims = {"k_minus": int(np.sum(np.diag(Jp) > 0)), "k_plus": int(np.sum(np.diag(Jp) < 0))}
            case = "I, [[0,-J'],[J',0]]"
    else:
        if n % 2:
            raise OddDimension("anti-commuting symmetries need even dimension")
        m = n // 2
        if eF == 1:
            seeds = _eigspace(F, 1.0)
            blocks = _orbit_basis(seeds, [lambda u: u, lambda u: R @ u], m)
            tF = block_J(m)
            tRR = block_K(m) if eR == 1 else block_I(m)
            case = "J, K" if eR == 1 else "J, I"
        elif eR == 1:
            seeds = _eigspace(R, 1.0)
            blocks = _orbit_basis(seeds, [lambda u: u, lambda u: F @ u], m)
            tF, tRR = block_I(m), block_J(m)
            case = "I, J"
        else:
            if n % 4:
                raise OddDimension("kind (-1, -1, -1) needs dimension divisible by 4")
            q = n // 4
            blocks = _orbit_basis(
                np.eye(n), [lambda u: u, lambda u: R @ u, lambda u: F @ u, lambda u: F @ (R @ u)], q
            )
            tF = block_I(2 * q)
            tRR = sla.block_diag(block_I(q), -block_I(q))
            case = "I, I'+(-I')"
        U = _stack(blocks)
        dims = {"blocks": len(blocks)}
    res = NormalFormResult(_polish(U), tF, tRR, None, kind, dims, case)
    return _check_result(res, J_F, J_R, None, tol)


def switch_symmetries(A, J_F, J_R, tol: Tolerances = DEFAULT_TOL) -> Tuple[np.ndarray, np.ndarray, complex, complex]:
    """Transform a pair of symmetries by a unitary ``A``.

    Returns ``(J_F', J_R', kappa_F, kappa_R)`` with ``J_F' = kappa_F A* J_F A``
    and ``J_R' = kappa_R A^t J_R A``.  Each phase is the first element of
    ``(1, i, -1, -i)`` that makes the product real.  With
    ``A* X A = Y`` for ``X`` in the original group this maps the group of
    ``(J_F, J_R)``-unitaries onto the group of ``(J_F', J_R')``-unitaries.

    Raises
    ------
    InconsistentSigns
        If no phase makes one of the transformed matrices real.
    """
    A = np.asarray(A, dtype=complex)
    F = _sym(J_F, "fundamental", tol).matrix
    R = _sym(J_R, "real", tol).matrix
    out = []
    for M in (A.conj().T @ F @ A, A.T @ R @ A):
        for kappa in (1, 1j, -1, -1j):
            X = kappa * M
            if np.max(np.abs(X.imag)) <= 1e2 * tol.real:
                out.append((X.real, kappa))
                break
        else:
            raise InconsistentSigns("no phase in {1, i, -1, -i} makes the transformed symmetry real")
    (Fp, kF), (Rp, kR) = out
    return Fp, Rp, kF, kR


# --- three symmetries ----------------------------------------------------------------


def _triple_core(F, R, C, eF, eR, eC, n):
    """Cases with all three symmetries pairwise anti-commuting, in canonical sign order."""
    Z = F @ R @ C
    if eF == eR == eC == 1:
        if n % 4:
            raise OddDimension("case (+1, +1, +1) needs dimension divisible by 4")
        m = n // 4
        # index (a, b, j) -> a*2m + b*m + j; orbit order f00, f01, f10, f11
        blocks = _orbit_basis(_eigspace(F, 1.0),
                              [lambda u: u, lambda u: R @ (C @ u), lambda u: R @ u, lambda u: C @ u], m)
        U = _stack(blocks)
        I2, J2, K2 = block_I(1), block_J(1), block_K(1)
        e = np.eye(m)
        targets = (np.kron(np.kron(J2, np.eye(2)), e), np.kron(np.kron(K2, np.eye(2)), e),
                   np.kron(np.kron(I2, I2), e))
        return U, targets, {"m": m}, "iv"
    if eF == 1 and eR == -1 and eC == -1:
        if n % 4:
            raise OddDimension("case (+1, -1, -1) needs dimension divisible by 4")
        m = n // 4
        blocks = _orbit_basis(_eigspace(F, 1.0),
                              [lambda u: u, lambda u: -(C @ (R @ u)), lambda u: C @ u, lambda u: R @ u], m)
        U = _stack(blocks)
        I2, J2, K2 = block_I(1), block_J(1), block_K(1)
        e = np.eye(m)
        targets = (np.kron(np.kron(J2, np.eye(2)), e), np.kron(np.kron(K2, I2), e),
                   np.kron(np.kron(I2, np.eye(2)), e))
        return U, targets, {"m": m}, "ii"
    if eF == 1 and eR == 1 and eC == -1:
        Zs = 0.5 * (Z + Z.T)
        parts, tF, tR, tC, dims = [], [], [], [], {}
        for sigma in (1.0, -1.0):
            EZ = _eigspace(Zs, sigma)
            if EZ.shape[1] == 0:
                dims[f"sigma{int(sigma):+d}"] = 0
                continue
            Fz = EZ.T @ F @ EZ
            Ep = EZ @ _eigspace(Fz, 1.0)
            k = Ep.shape[1]
            parts.append(np.hstack([Ep, R @ Ep]))
            tF.append(block_J(k))
            tR.append(block_K(k))
            tC.append(sigma * block_I(k))
            dims[f"sigma{int(sigma):+d}"] = 2 * k
        U = np.hstack(parts)
        return U, (sla.block_diag(*tF), sla.block_diag(*tR), sla.block_diag(*tC)), dims, "iii"
    if eF == eR == eC == -1:
        Zs = 0.5 * (Z + Z.T)
        parts, tF, tR, tC, dims = [], [], [], [], {}
        for sigma in (1.0, -1.0):
            EZ = _eigspace(Zs, sigma)
            d = EZ.shape[1]
            dims[f"sigma{int(sigma):+d}"] = d
            if d == 0:
                continue
            if d % 4:
                raise OddDimension("eigenspaces of the central element must have dimension divisible by 4")
            m = d // 4
            if sigma > 0:
                maps = [lambda u: u, lambda u: R @ u, lambda u: F @ u, lambda u: R @ (F @ u)]
                t = (np.kron(block_I(1), block_J(1)), np.kron(np.eye(2), block_I(1)),
                     np.kron(block_I(1), block_K(1)))
            else:
                maps = [lambda u: u, lambda u: R @ u, lambda u: F @ u, lambda u: F @ (R @ u)]
                t = (np.kron(block_I(1), np.eye(2)), np.kron(block_J(1), block_I(1)),
                     np.kron(block_K(1), block_I(1)))
            blocks = _orbit_basis(EZ, maps, m)
            parts.append(_stack(blocks))
            e = np.eye(m)
            tF.append(np.kron(t[0], e))
            tR.append(np.kron(t[1], e))
            tC.append(np.kron(t[2], e))
        U = np.hstack(parts)
        return U, (sla.block_diag(*tF), sla.block_diag(*tR), sla.block_diag(*tC)), dims, "i"
    raise AssertionError("unreachable sign pattern")  # pragma: no cover


# sign patterns handled by exchanging the roles of two symmetries
_ROLE_SWAPS = {
    (-1, 1, 1): (2, 1, 0),    # exchange F and C -> (+1, +1, -1)
    (-1, -1, 1): (2, 1, 0),   # exchange F and C -> (+1, -1, -1)
    (-1, 1, -1): (1, 0, 2),   # exchange F and R -> (+1, -1, -1)
    (1, -1, 1): (0, 2, 1),    # exchange R and C -> (+1, +1, -1)
}


def normalize_triple(J_F, J_R, J_C, tol: Tolerances = DEFAULT_TOL) -> NormalFormResult:
    """Real unitary for three pairwise anti-commuting symmetries.

    ===================  =====================  =====================  =======================
    ``(eF, eR, eC)``     target ``J_F``          target ``J_R``          target ``J_C``
    ===================  =====================  =====================  =======================
    ``(-1, -1, -1)``     ``(I x J) + (I x 1)``   ``(1 x I) + (J x I)``   ``(I x K) + (K x I)``
    ``(1, -1, -1)``      ``J x 1``               ``K x I``               ``I x 1``
    ``(1, 1, -1)``       ``J + J``               ``K + K``               ``I + (-I)``
    ``(1, 1, 1)``        ``J x 1``               ``K x 1``               ``I x I``
    ===================  =====================  =====================  =======================

    ``x`` is the Kronecker product with ``2 x 2`` left factors and ``+`` the
    direct sum.  In the first and third rows the two summands are the
    eigenspaces of the central element ``J_F J_R J_C`` for ``+1`` and ``-1``.
    The four remaining sign patterns are reduced to these by exchanging the
    roles of two symmetries; the targets are then exchanged accordingly.

    Raises
    ------
    InconsistentSigns
        If some pair of symmetries does not anti-commute.
    """
    syms = [_sym(J_F, "fundamental", tol), _sym(J_R, "real", tol), _sym(J_C, "chiral", tol)]
    n = syms[0].dimension
    if any(s.dimension != n for s in syms):
        raise DimensionMismatch("symmetries act on spaces of different dimension")
    kind = SymmetryKind.from_symmetries(*syms, tol=tol)
    if not (kind.eta_FR == kind.eta_FC == kind.eta_RC == -1):
        raise InconsistentSigns("normalize_triple needs pairwise anti-commuting symmetries")
    etas = (syms[0].eta, syms[1].eta, syms[2].eta)
    perm = _ROLE_SWAPS.get(etas, (0, 1, 2))
    mats = [syms[i].matrix for i in perm]
    es = [etas[i] for i in perm]
    U, targets, dims, case = _triple_core(mats[0], mats[1], mats[2], es[0], es[1], es[2], n)
    inv = [perm.index(i) for i in range(3)]
    tF, tR, tC = (targets[inv[0]], targets[inv[1]], targets[inv[2]])
    if perm != (0, 1, 2):
        case = f"{case} with roles {perm}"
    res = NormalFormResult(_polish(U), tF, tR, tC, kind, dims, case)
    return _check_result(res, syms[0], syms[1], syms[2], tol)


# --- chiral reduction ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChiralReduction:
    """Block form ``V* T V = diag(t1, t2)`` of a J-unitary with chiral symmetry.

    Attributes
    ----------
    V : numpy.ndarray
        Unitary whose first columns span the ``+1`` eigenspace of the
        Hermitian chiral involution (``J_C`` or ``-i J_C``).
    t1, t2 : numpy.ndarray
        Diagonal blocks of ``V* T V``.
    eta_FC : int
        ``+1`` if ``J_F`` commutes with ``J_C``, ``-1`` if they anti-commute.
    F1, F2 : numpy.ndarray or None
        For ``eta_FC = +1`` the reduced fundamental symmetries, so that
        ``t1`` is ``F1``-unitary and ``t2`` is ``F2``-unitary.
    v : numpy.ndarray or None
        For ``eta_FC = -1`` the unitary with
        ``V* J_F V = [[0, eta_F v], [v*, 0]]``; then ``t2 = v* (t1*)^{-1} v``.
    """

    V: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    eta_FC: int
    F1: Optional[np.ndarray] = None
    F2: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None


def _chiral_frame(J_C: Symmetry) -> Tuple[np.ndarray, int]:
    C = J_C.matrix
    if J_C.eta == 1:
        H = 0.5 * (C + C.T)
        w, V = np.linalg.eigh(H)
        V = V.astype(complex)
    else:
        H = -1j * C
        H = 0.5 * (H + H.conj().T)
        w, V = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    V = V[:, order]
    k = int(np.sum(w > 0))
    return V, k


def chiral_reduce(T, J_F, J_C, tol: Tolerances = DEFAULT_TOL) -> ChiralReduction:
    """Block diagonalize a J-unitary that commutes with a chiral symmetry.

    Raises
    ------
    SingularBlock
        If ``eta_FC = -1`` and the block ``t1`` is numerically singular.
    InconsistentSigns
        If ``J_F`` and ``J_C`` neither commute nor anti-commute.
    """
    T = np.asarray(T, dtype=complex)
    J_F = _sym(J_F, "fundamental", tol)
    J_C = _sym(J_C, "chiral", tol)
    kind = SymmetryKind.from_symmetries(J_F, None, J_C, tol=tol)
    V, k = _chiral_frame(J_C)
    Tv = V.conj().T @ T @ V
    Fv = V.conj().T @ J_F.matrix @ V
    t1, t2 = Tv[:k, :k], Tv[k:, k:]
    if kind.eta_FC == 1:
        return ChiralReduction(V, t1, t2, 1, Fv[:k, :k], Fv[k:, k:], None)
    if k != T.shape[0] - k:
        raise OddDimension("anti-commuting chiral symmetry with unbalanced eigenspaces")
    sv = np.linalg.svd(t1, compute_uv=False)
    if sv.size and sv[-1] < tol.sv_min * max(1.0, sv[0]):
        raise SingularBlock(f"block t is singular (smallest singular value {sv[-1]:.3e})")
    v = J_F.eta * Fv[:k, k:]
    return ChiralReduction(V, t1, t2, -1, None, None, v)


def chiral_embed(t, J_F, J_C, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse of :func:`chiral_reduce` for anti-commuting ``J_F`` and ``J_C``.

    Builds ``T = V diag(t, v* (t*)^{-1} v) V*``, which is ``J_F``-unitary and
    commutes with ``J_C`` for every invertible ``t``.
    """
    J_F = _sym(J_F, "fundamental", tol)
    J_C = _sym(J_C, "chiral", tol)
    V, k = _chiral_frame(J_C)
    t = np.asarray(t, dtype=complex)
    if t.shape != (k, k):
        raise DimensionMismatch(f"block must be {k}x{k}, got {t.shape}")
    Fv = V.conj().T @ J_F.matrix @ V
    v = J_F.eta * Fv[:k, k:]
    t2 = v.conj().T @ np.linalg.solve(t.conj().T, v)
    return V @ sla.block_diag(t, t2) @ V.conj().T


# --- classical groups ----------------------------------------------------------------------

GROUP_TAGS = ("U(N,M)", "O(N,M)", "SP(2N,R)", "SO*(2N)", "SP(2N,2N)", "GL(N,R)", "O(N,C)",
              "U*(2N)", "SP(2N,C)", "GL(N,C)")

_TAG_RE = re.compile(r"^\s*(U\*|SO\*|SP|GL|U|O)\s*\(\s*(\d+)\s*(?:,\s*(\d+|R|C)\s*)?\)\s*$")


def _group_symmetries(tag: str):
    """Dimension and ``(J_F, J_R, J_C)`` realising the group named by ``tag``."""
    norm = tag.replace("ℝ", "R").replace("ℂ", "C").upper().replace(" ", "")
    m = _TAG_RE.match(norm)
    if not m:
        raise ValueError(f"unrecognised group tag {tag!r}; expected one of {GROUP_TAGS}")
    name, a, b = m.group(1), int(m.group(2)), m.group(3)
    one2 = np.eye(2)
    if name in ("U", "O") and b is not None and b.isdigit():
        Jf = block_J(a, int(b))
        return a + int(b), Jf, (np.eye(a + int(b)) if name == "O" else None), None
    if name == "SP" and b == "R":
        N = _half(a, tag)
        return 2 * N, block_I(N), np.eye(2 * N), None
    if name == "SO*" and b is None:
        N = _half(a, tag)
        return 2 * N, block_I(N), block_I(N), None
    if name == "SP" and b is not None and b.isdigit():
        N = _half(a, tag)
        if int(b) != a:
            raise ValueError(f"{tag}: both entries must equal 2N")
        return 4 * N, np.kron(block_J(1), np.eye(2 * N)), np.kron(block_J(1), block_I(N)), None
    if name == "GL" and b == "R":
        return 2 * a, block_I(a), np.eye(2 * a), block_J(a)
    if name == "O" and b == "C":
        return 2 * a, block_I(a), block_I(a), block_J(a)
    if name == "U*" and b is None:
        N = _half(a, tag)
        return 4 * N, np.kron(block_K(1), np.eye(2 * N)), np.kron(block_J(1), block_I(N)), \
            np.kron(block_I(1), np.eye(2 * N))
    if name == "SP" and b == "C":
        N = _half(a, tag)
        return 4 * N, np.kron(block_J(1), np.eye(2 * N)), np.kron(block_I(1), block_I(N)), \
            np.kron(block_K(1), np.eye(2 * N))
    if name == "GL" and b == "C":
        return 2 * a, block_J(a), None, block_I(a)
    raise ValueError(f"unrecognised group tag {tag!r}; expected one of {GROUP_TAGS}")


def _half(a: int, tag: str) -> int:
    if a % 2:
        raise ValueError(f"{tag}: the dimension parameter must be even")
    return a // 2


def group_membership(T, tag: str, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``T`` lies in the classical group named by ``tag``.

    Tags name concrete groups, for example ``"U(2,1)"``, ``"O(1,1)"``,
    ``"SP(2,R)"``, ``"SO*(4)"``, ``"SP(2,2)"``, ``"GL(2,R)"``, ``"O(2,C)"``,
    ``"U*(2)"``, ``"SP(2,C)"`` and ``"GL(2,C)"``.  Each group is realised as
    the J-unitaries with Real and chiral symmetries:

    ===============  ==========================================  ===========
    group            ``(J_F, J_R, J_C)``                         space
    ===============  ==========================================  ===========
    ``U(N,M)``       ``(J, -, -)``                               ``C^{N+M}``
    ``O(N,M)``       ``(J, 1, -)``                               ``C^{N+M}``
    ``SP(2N,R)``     ``(I, 1, -)``                               ``C^{2N}``
    ``SO*(2N)``      ``(I, I, -)``                               ``C^{2N}``
    ``SP(2N,2N)``    ``(J x 1, J x I, -)``                       ``C^{4N}``
    ``GL(N,R)``      ``(I, 1, J)``                               ``C^{2N}``
    ``O(N,C)``       ``(I, I, J)``                               ``C^{2N}``
    ``U*(2N)``       ``(K x 1, J x I, I x 1)``                   ``C^{4N}``
    ``SP(2N,C)``     ``(J x 1, I x I, K x 1)``                   ``C^{4N}``
    ``GL(N,C)``      ``(J, -, I)``                               ``C^{2N}``
    ===============  ==========================================  ===========

    Raises
    ------
    DimensionMismatch
        If ``T`` does not act on the space of the group.
    """
    T = np.asarray(T, dtype=complex)
    dim, F, R, C = _group_symmetries(tag)
    if T.shape != (dim, dim):
        raise DimensionMismatch(f"{tag} acts on dimension {dim}, got matrix of shape {T.shape}")
    rep = check_symmetries(T, F, R, C, tol=tol)
    return rep.all_hold
