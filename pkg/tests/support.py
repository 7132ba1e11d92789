"""Random constructions shared by the test modules."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.linalg as sla

from krein_topo.normal_forms import block_I, block_J, block_K
from krein_topo.tight_binding import HoppingModel


#: Acceptance outcomes ``{criterion: [(part, ok, detail), ...]}`` filled by the
#: acceptance tests and printed in the terminal summary.
ACCEPTANCE: dict = {}


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed real orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_complex(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)


def hermitian_form(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    return F.astype(complex) if np.trace(F @ F) >= 0 else 1j * F


def lie_algebra_element(X: np.ndarray, F: np.ndarray, R: Optional[np.ndarray] = None,
                        C: Optional[np.ndarray] = None, sweeps: int = 60) -> np.ndarray:
    """Project ``X`` onto the generators of operators with the given symmetries.

    The result ``Y`` satisfies ``Y* G + G Y = 0`` for the Hermitian form ``G``
    of ``F``, ``R^t conj(Y) R = Y`` and ``C^t Y C = Y`` when supplied, so that
    ``expm(Y)`` has all the requested symmetries.  Each condition is the
    fixed space of an isometric involution; alternating averages converge to
    the intersection.
    """
    G = hermitian_form(F)
    maps = [lambda Y: -G @ Y.conj().T @ G]
    if R is not None:
        maps.append(lambda Y: R.T @ Y.conj() @ R)
    if C is not None:
        maps.append(lambda Y: C.T @ Y @ C)
    Y = np.asarray(X, dtype=complex)
    for _ in range(sweeps):
        for m in maps:
            Y = 0.5 * (Y + m(Y))
    return Y


def symmetric_operator(F, R=None, C=None, rng=None, scale: float = 1.0) -> np.ndarray:
    """Random invertible operator that is ``F``-unitary and has the symmetries ``R``, ``C``."""
    rng = np.random.default_rng() if rng is None else rng
    n = np.asarray(F).shape[0]
    return sla.expm(lie_algebra_element(random_complex(n, rng, scale), F, R, C))


def conjugate(Q: np.ndarray, *Ms):
    return [Q @ M @ Q.T for M in Ms]


_J1 = np.diag([1.0, -1.0])
_Z2 = np.zeros((2, 2))

#: Canonical representatives ``(J_F, J_R)`` of the eight pair kinds, keyed by
#: ``(eta_F, eta_R, eta_FR)``.
PAIR_KINDS = {
    (1, 1, 1): (np.diag([1, 1, 1, -1, -1.0]), np.diag([1, -1, 1, 1, -1.0])),
    (1, -1, 1): (np.diag([1, 1, -1, -1.0]), np.kron(np.eye(2), block_I(1))),
    (-1, 1, 1): (block_I(3), np.kron(np.eye(2), np.diag([1, -1, 1.0]))),
    (-1, -1, 1): (block_I(2), np.block([[_Z2, -_J1], [_J1, _Z2]])),
    (1, 1, -1): (block_J(2), block_K(2)),
    (1, -1, -1): (block_J(2), block_I(2)),
    (-1, 1, -1): (block_I(2), block_J(2)),
    (-1, -1, -1): (block_I(2), np.kron(_J1, block_I(1))),
}

#: Triples of pairwise anti-commuting symmetries covering all sign patterns
#: up to exchanging roles.
TRIPLES = [
    (np.kron(block_J(1), np.eye(2)), np.kron(block_K(1), np.eye(2)), np.kron(block_I(1), block_I(1))),
    (block_J(1), block_K(1), block_I(1)),
    (np.kron(block_J(1), np.eye(2)), np.kron(block_K(1), block_I(1)), np.kron(block_I(1), np.eye(2))),
    (np.kron(block_I(1), block_J(1)), np.kron(np.eye(2), block_I(1)), np.kron(block_I(1), block_K(1))),
    (np.kron(block_I(1), np.eye(2)), np.kron(block_J(1), block_I(1)), np.kron(block_K(1), block_I(1))),
]


def scaled_pair(kind, copies: int):
    """Direct sum of ``copies`` copies of the canonical pair of ``kind``."""
    F, R = PAIR_KINDS[kind]
    E = np.eye(copies)
    return np.kron(E, F), np.kron(E, R)


def symmetric_sample(kind, copies: int, seed: int, weight: float):
    """Random operator with the pair ``kind`` of symmetries and many unit eigenvalues.

    Returns ``(T, F, R)``.  The generator is ``3 i G H`` with ``H > 0`` plus
    a random part of size ``weight``, projected onto the Lie algebra.
    """
    rng = np.random.default_rng(seed)
    F, R = scaled_pair(kind, copies)
    Q = random_orthogonal(F.shape[0], rng)
    F, R = conjugate(Q, F, R)
    n = F.shape[0]
    A = random_complex(n, rng)
    H = A @ A.conj().T + 0.2 * np.eye(n)
    X = 1j * hermitian_form(F) @ H * 3.0 + weight * random_complex(n, rng)
    T = sla.expm(lie_algebra_element(X, F, R))
    return T, F, R


def random_model(rng: np.random.Generator, L: int, p: int, q=None, charges: bool = False,
                 diagonals: bool = True) -> HoppingModel:
    """Random hopping model with a well conditioned ``W1`` and Hermitian ``V``."""
    def r():
        return rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))

    V = r()
    V = V + V.conj().T
    q = int(rng.integers(0, p)) if q is None else q
    charge = rng.choice([-1.0, 1.0], size=L) if charges else None
    W3, W4 = (0.5 * r(), 0.5 * r()) if diagonals else (None, None)
    return HoppingModel(W1=np.eye(L) * 2 + r(), W2=r(), W3=W3, W4=W4, V=V, q=q, p=p, charge=charge)
