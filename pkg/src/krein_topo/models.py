"""Example models: magnetic Laplacian, Kane-Mele, and two BdG superconductors.

Each constructor returns a :class:`~krein_topo.tight_binding.HoppingModel`
together with its :class:`~krein_topo.tight_binding.SymmetryMetadata`.
Hopping matrices follow the operator convention

.. math::

    H = \\sum_i (W_i^* U_i + W_i U_i^*) + V,

so at zero flux ``W_1`` multiplies ``psi_{n + e1}``, ``W_2`` multiplies
``psi_{n + e2}``, ``W_3`` multiplies ``psi_{n - e1 + e2}`` and ``W_4``
multiplies ``psi_{n + e1 + e2}`` in ``(H psi)_n``.

BdG models use the basis (particle, hole).  The hole block sees the
conjugate magnetic translations and the pairing terms are built from the
plain shifts, which is encoded through the charge vector ``(+1, -1)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import BadParams
from .tight_binding import HoppingModel, SymmetryMetadata

logger = logging.getLogger(__name__)

__all__ = [
    "ModelParams",
    "harper",
    "kane_mele",
    "kane_mele_hoppings",
    "p_ip",
    "d_id",
    "MODEL_BUILDERS",
    "build_model",
]

ModelPair = Tuple[HoppingModel, SymmetryMetadata]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of a built-in model, as accepted by :func:`build_model`.

    Only the fields relevant to ``name`` are used.
    """

    name: str
    q: int = 0
    p: int = 1
    delta: float = 0.2
    mu: float = 0.0
    chirality: int = 1
    lambda_so: float = 1.0
    lambda_ra: float = 0.45
    lambda_st: float = 0.3


def _sign(chirality: int) -> int:
    if chirality not in (1, -1):
        raise BadParams(f"chirality must be +1 or -1, got {chirality}")
    return int(chirality)


def harper(q: int = 0, p: int = 1) -> ModelPair:
    """Magnetic Laplacian ``U1 + U1* + U2 + U2*`` at flux ``2 pi q / p``.

    Examples
    --------
    >>> model, meta = harper(3, 7)
    >>> model.L, model.p, meta.real is None
    (1, 7, True)
    """
    one = np.ones((1, 1))
    model = HoppingModel(W1=one, W2=one, V=np.zeros((1, 1)), q=q, p=p, name=f"harper({q}/{p})")
    return model, SymmetryMetadata()


# --- Kane-Mele ------------------------------------------------------------------

_S0 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)

#: Primitive vectors of the honeycomb Bravais lattice (nearest-neighbour distance one).
HONEYCOMB_A1 = np.sqrt(3.0) * np.array([1.0, 0.0])
HONEYCOMB_A2 = np.sqrt(3.0) * np.array([0.5, np.sqrt(3.0) / 2.0])
#: Position of the B site relative to the A site in the same cell.
HONEYCOMB_D = (HONEYCOMB_A1 + HONEYCOMB_A2) / 3.0

#: Strength of the third-neighbour A-B hopping that keeps the hopping
#: coefficients invertible; see :func:`kane_mele_hoppings`.
KANE_MELE_T3 = 0.2


def _cell_vector(R) -> np.ndarray:
    return R[0] * HONEYCOMB_A1 + R[1] * HONEYCOMB_A2


def _block(i: int, j: int, m: np.ndarray) -> np.ndarray:
    M = np.zeros((4, 4), dtype=complex)
    M[2 * i:2 * i + 2, 2 * j:2 * j + 2] = m
    return M


def kane_mele_hoppings(lambda_so: float, lambda_ra: float, lambda_st: float,
                       t: float = 1.0, t3: float = KANE_MELE_T3) -> Dict[Tuple[int, int], np.ndarray]:
    """Real-space hopping table ``h[R]`` of the Kane-Mele model.

    ``(H psi)_n = sum_R h[R] psi_{n+R}`` with cell index ``n`` in the basis
    ``a1, a2`` of :data:`HONEYCOMB_A1`, :data:`HONEYCOMB_A2`.  The internal
    index is ``2 * sublattice + spin`` with sublattice A = 0, B = 1 and spin
    up = 0.  Terms:

    * nearest neighbours ``t s0 + i lambda_ra (sx d_y - sy d_x)`` for the
      unit bond vector ``d`` from A to B;
    * next-nearest neighbours ``i lambda_so nu sz`` with ``nu = +-1`` the
      orientation of the two-bond path;
    * staggered potential ``+lambda_st`` on A and ``-lambda_st`` on B;
    * a spin-independent third-neighbour A-B hopping ``t3``.

    Without ``t3`` the hopping coefficient ``A(k2)`` of the Jacobi
    decomposition is singular at some momenta, so the bounded transfer
    matrices would not exist.  The third-neighbour term respects the
    time-reversal symmetry and leaves the bulk gap at zero energy open.
    """
    h: Dict[Tuple[int, int], np.ndarray] = {}

    def add(R, M):
        R = (int(R[0]), int(R[1]))
        h[R] = h.get(R, np.zeros((4, 4), dtype=complex)) + M

    nn_cells = [(0, 0), (-1, 0), (0, -1)]
    for R in nn_cells:
        d = HONEYCOMB_D + _cell_vector(R)
        dh = d / np.linalg.norm(d)
        m = t * _S0 + 1j * lambda_ra * (_SX * dh[1] - _SY * dh[0])
        add(R, _block(0, 1, m))
        add((-R[0], -R[1]), _block(1, 0, m.conj().T))
    for R in [(-1, -1), (1, -1), (-1, 1)]:
        m = t3 * _S0
        add(R, _block(0, 1, m))
        add((-R[0], -R[1]), _block(1, 0, m.conj().T))
    bonds_a = [HONEYCOMB_D + _cell_vector(R) for R in nn_cells]
    for s in (0, 1):
        bonds = bonds_a if s == 0 else [-b for b in bonds_a]
        for R in [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]:
            D = _cell_vector(R)
            nu = 0.0
            for u in bonds:
                w = D - u
                if any(np.allclose(-w, b) for b in bonds):
                    nu = float(np.sign(u[0] * w[1] - u[1] * w[0]))
            add(R, _block(s, s, 1j * lambda_so * nu * _SZ))
    add((0, 0), _block(0, 0, lambda_st * _S0) + _block(1, 1, -lambda_st * _S0))
    return h


def kane_mele(lambda_so: float = 1.0, lambda_ra: float = 0.45, lambda_st: float = 0.3,
              t3: float = KANE_MELE_T3) -> ModelPair:
    """Kane-Mele model on the honeycomb lattice with odd time reversal symmetry.

    The cells of the honeycomb lattice are labelled by ``Z^2`` through the
    basis ``a1, a2``; the hopping table of :func:`kane_mele_hoppings` then
    maps onto the square-lattice form by ``W1 = h[(1, 0)]``,
    ``W2 = h[(0, 1)]``, ``W3 = h[(-1, 1)]``, ``W4 = h[(1, 1)]`` and
    ``V = h[(0, 0)]``.  The spin rotation is ``I_s = 1 (x) [[0, 1], [-1, 0]]``
    with ``I_s^2 = -1``.
    """
    h = kane_mele_hoppings(lambda_so, lambda_ra, lambda_st, t3=t3)
    allowed = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1), (1, 1), (-1, -1)}
    extra = set(h) - allowed
    if extra:
        raise BadParams(f"hoppings {sorted(extra)} do not fit the square-lattice form")
    Z = np.zeros((4, 4), dtype=complex)
    model = HoppingModel(
        W1=h[(1, 0)], W2=h[(0, 1)], W3=h.get((-1, 1), Z), W4=h.get((1, 1), Z), V=h[(0, 0)],
        q=0, p=1, name=f"kane_mele({lambda_so}, {lambda_ra}, {lambda_st})",
    )
    I_s = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return model, SymmetryMetadata.build(trs=I_s)


# --- BdG ------------------------------------------------------------------------

_BDG_CHARGE = np.array([1.0, -1.0])


def p_ip(delta: float = 0.2, mu: float = 0.0, q: int = 1, p: int = 3, chirality: int = 1) -> ModelPair:
    """BdG superconductor with a ``p +- i p`` pair potential of strength ``delta``.

    Expanding the operator blocks in the shifts gives, for display sign
    ``s`` of the ``i (S2 - S2*)`` pairing term,

    ``W1 = [[1, -delta], [delta, -1]]``,
    ``W2 = [[1, -i s delta], [-i s delta, -1]]``, ``W3 = W4 = 0`` and
    ``V = diag(-mu, mu)``.

    ``chirality = +1`` selects ``s = -1``: for this choice the edge
    signature at ``delta > 0`` and flux ``2 pi / 3`` is ``+1`` for small
    ``mu``, which fixes the labelling of the two chiralities.  The even
    particle-hole symmetry is ``K_ph = [[0, 1], [1, 0]]``.
    """
    s = -_sign(chirality)
    W1 = np.array([[1.0, -delta], [delta, -1.0]], dtype=complex)
    W2 = np.array([[1.0, -1j * s * delta], [-1j * s * delta, -1.0]], dtype=complex)
    V = np.diag([-mu, mu]).astype(complex)
    model = HoppingModel(W1=W1, W2=W2, V=V, q=q, p=p, charge=_BDG_CHARGE,
                         name=f"p_ip(delta={delta}, mu={mu}, {q}/{p}, {chirality:+d})")
    return model, SymmetryMetadata.build(phs=np.array([[0.0, 1.0], [1.0, 0.0]]))


def d_id(delta: float = 0.2, mu: float = 0.0, q: int = 0, p: int = 1, chirality: int = 1) -> ModelPair:
    """BdG superconductor with a ``d +- i d`` pair potential of strength ``delta``.

    With display sign ``s`` (the upper sign for ``chirality = +1``)::

        W1 = [[1, delta], [delta, -1]]
        W2 = [[1, -delta], [-delta, -1]]
        W3 = [[0, -i s delta], [i s delta, 0]]
        W4 = [[0, i s delta], [-i s delta, 0]]
        V  = diag(-mu, mu)

    The term ``i (S1 - S1*)(S2 - S2*)`` expands into next-nearest neighbour
    hoppings along both diagonals, which become ``W3`` and ``W4``.  The odd
    particle-hole symmetry is ``K_ph = [[0, -1], [1, 0]]``.
    """
    s = _sign(chirality)
    W1 = np.array([[1.0, delta], [delta, -1.0]], dtype=complex)
    W2 = np.array([[1.0, -delta], [-delta, -1.0]], dtype=complex)
    W3 = np.array([[0.0, -1j * s * delta], [1j * s * delta, 0.0]], dtype=complex)
    W4 = np.array([[0.0, 1j * s * delta], [-1j * s * delta, 0.0]], dtype=complex)
    V = np.diag([-mu, mu]).astype(complex)
    model = HoppingModel(W1=W1, W2=W2, W3=W3, W4=W4, V=V, q=q, p=p, charge=_BDG_CHARGE,
                         name=f"d_id(delta={delta}, mu={mu}, {q}/{p}, {chirality:+d})")
    return model, SymmetryMetadata.build(phs=np.array([[0.0, -1.0], [1.0, 0.0]]))


MODEL_BUILDERS: Dict[str, Callable[[ModelParams], ModelPair]] = {
    "harper": lambda m: harper(m.q, m.p),
    "kanemele": lambda m: kane_mele(m.lambda_so, m.lambda_ra, m.lambda_st),
    "pip": lambda m: p_ip(m.delta, m.mu, m.q, m.p, m.chirality),
    "did": lambda m: d_id(m.delta, m.mu, m.q, m.p, m.chirality),
}


def build_model(params: ModelParams) -> ModelPair:
    """Construct a built-in model by name (``harper``, ``kanemele``, ``pip``, ``did``)."""
    try:
        builder = MODEL_BUILDERS[params.name]
    except KeyError:
        raise BadParams(f"unknown model {params.name!r}; choose from {sorted(MODEL_BUILDERS)}") from None
    return builder(params)
