"""Symmetries, Krein inertia and the global invariants."""

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment
from hypothesis import assume, given
from hypothesis import strategies as st

from krein_topo.errors import (
    DimensionMismatch,
    InconsistentSigns,
    InvalidSymmetry,
    NotIsolated,
    SingularInput,
    SymmetryViolated,
)
from krein_topo.krein import (
    InvariantSet,
    KreinEigenvalue,
    Symmetry,
    SymmetryKind,
    check_inertia_reflection,
    check_symmetries,
    global_signature,
    half_signature,
    inertia_of_cluster,
    invariants_for_kind,
    krein_spectrum,
    secondary_invariant,
    signature_at,
    z2_signature,
)
from krein_topo.normal_forms import block_I, block_J, block_K
from krein_topo.spectral import collision_paths, decompose

from support import (
    PAIR_KINDS,
    conjugate,
    hermitian_form,
    lie_algebra_element,
    random_complex,
    random_orthogonal,
    scaled_pair,
    symmetric_operator,
    symmetric_sample,
)

J2 = np.diag([1.0, -1.0])


# --- symmetry objects --------------------------------------------------------------


def test_symmetry_infers_square_sign():
    assert Symmetry(J2).eta == 1
    assert Symmetry(block_I(2)).eta == -1


@pytest.mark.parametrize(
    "matrix, sign",
    [
        (np.array([[1j, 0], [0, 1]]), None),
        (np.array([[2.0, 0], [0, 1]]), None),
        (np.eye(2), -1),
        (np.zeros((2, 3)), None),
    ],
)
def test_symmetry_rejects_invalid(matrix, sign):
    with pytest.raises(InvalidSymmetry):
        Symmetry(matrix, sign)


def test_kind_from_matrices():
    kind = SymmetryKind.from_symmetries(Symmetry(block_I(1)), Symmetry(J2, flavor="real"))
    assert kind.triple == (-1, 1, -1)
    with pytest.raises(InconsistentSigns):
        SymmetryKind.from_symmetries(Symmetry(J2), Symmetry(np.array([[0.6, 0.8], [0.8, -0.6]]), flavor="real"))


@pytest.mark.parametrize(
    "triple, fields",
    [
        ((1, 1, 1), ("sig", "sec")),
        ((-1, 1, -1), ("sig", "sec")),
        ((1, -1, 1), ("half_sig",)),
        ((-1, -1, -1), ("half_sig",)),
        ((-1, 1, 1), ()),
        ((1, 1, -1), ()),
        ((-1, -1, 1), ("sig2",)),
        ((1, -1, -1), ("sig2",)),
    ],
)
def test_invariant_fields_table(triple, fields):
    assert SymmetryKind(*triple).invariant_fields() == fields


def test_invariant_fields_without_real_symmetry():
    assert SymmetryKind(1).invariant_fields() == ("sig",)


# --- check_symmetries ---------------------------------------------------------------


def test_identity_is_unitary_for_I():
    rep = check_symmetries(np.eye(2), block_I(1))
    assert rep.fundamental and rep.all_hold


def test_o11_member_is_real_and_unitary():
    path = collision_paths("o11_block", {"sigma": 1, "kappa": 1}, t=1.0)
    rep = check_symmetries(path.T, J2, np.eye(2))
    assert rep.fundamental and rep.real


def test_scaled_identity_is_not_unitary():
    assert not check_symmetries(np.diag([2.0, 2.0]), block_I(1)).fundamental


def test_check_symmetries_errors():
    with pytest.raises(DimensionMismatch):
        check_symmetries(np.eye(3), J2)
    with pytest.raises(SingularInput):
        check_symmetries(np.zeros((2, 2)), J2)


def test_check_symmetries_does_not_mutate():
    T = collision_paths("krein_2x2", {}, t=0.3).T
    before = T.copy()
    check_symmetries(T, J2, J_C=np.eye(2))
    assert np.array_equal(T, before)


# --- inertia ----------------------------------------------------------------------


def test_inertia_of_simple_eigenvalue():
    T = np.diag([np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)])
    e = inertia_of_cluster(T, J2, np.exp(1j * np.pi / 3))
    assert (e.nu_plus, e.nu_minus, e.multiplicity) == (1, 0, 1)


def test_inertia_of_indefinite_block():
    lam = np.exp(0.7j)
    T = collision_paths("krein_2x2", {"a": 0.0, "lam": lam}, t=0.0).T
    e = inertia_of_cluster(T, J2, lam)
    assert (e.nu_plus, e.nu_minus, e.multiplicity) == (1, 1, 2)


def test_inertia_of_jordan_block():
    lam = np.exp(1j * np.pi / 3)
    T = collision_paths("krein_2x2", {"a": 1.0, "lam": lam}, t=0.0).T
    e = inertia_of_cluster(T, J2, lam)
    assert (e.nu_plus, e.nu_minus) == (1, 1)


def test_inertia_requires_unit_cluster():
    boost = np.array([[np.cosh(1.0), np.sinh(1.0)], [np.sinh(1.0), np.cosh(1.0)]])
    with pytest.raises(NotIsolated):
        inertia_of_cluster(boost, J2, np.e)


def test_inertia_requires_j_unitarity():
    with pytest.raises(SymmetryViolated):
        krein_spectrum(np.diag([2.0, 0.5]), J2)


def test_hyperbolic_pair_plus_unit_block():
    N = 3
    boost = np.array([[np.cosh(0.8), np.sinh(0.8)], [np.sinh(0.8), np.cosh(0.8)]])
    T = sla.block_diag(boost, np.exp(0.4j) * np.eye(N))
    J = sla.block_diag(J2, np.eye(N))
    eigs = krein_spectrum(T, J)
    assert global_signature(eigs) == N


def test_signature_of_empty_list():
    assert global_signature([]) == 0


def test_three_positive_crossings():
    eigs = [KreinEigenvalue(np.exp(1j * a), 1, 0, 1) for a in (-1.3, 0.9, 2.2)]
    assert global_signature(eigs) == 3


def test_krein_eigenvalue_rejects_bad_counts():
    with pytest.raises(ValueError):
        KreinEigenvalue(1.0, 1, 0, 2)


# --- invariants ---------------------------------------------------------------------


def test_sec_of_single_positive_one():
    assert secondary_invariant([KreinEigenvalue(1.0, 1, 0, 1)]) == 1


def test_sec_requires_reflection_symmetry():
    eigs = [KreinEigenvalue(np.exp(0.5j), 1, 0, 1), KreinEigenvalue(np.exp(-0.5j), 0, 1, 1)]
    with pytest.raises(SymmetryViolated):
        secondary_invariant(eigs)


def test_half_signature_weights():
    eigs = [KreinEigenvalue(np.exp(0.5j), 1, 0, 1), KreinEigenvalue(np.exp(-0.5j), 1, 0, 1),
            KreinEigenvalue(1.0, 2, 0, 2)]
    assert half_signature(eigs) == 2


def test_z2_signature():
    eigs = [KreinEigenvalue(np.exp(0.5j), 1, 0, 1), KreinEigenvalue(np.exp(-0.5j), 0, 1, 1)]
    assert z2_signature(eigs) == 1
    with pytest.raises(SymmetryViolated):
        z2_signature(eigs[:1])


def test_invariants_dispatch():
    eigs = [KreinEigenvalue(1.0, 1, 0, 1)]
    assert set(invariants_for_kind(eigs, SymmetryKind(-1, 1, -1)).as_dict()) == {"sig", "sec"}
    pair = [KreinEigenvalue(np.exp(0.5j), 1, 0, 1), KreinEigenvalue(np.exp(-0.5j), 0, 1, 1)]
    assert invariants_for_kind(pair, SymmetryKind(-1, -1, 1)).as_dict() == {"sig2": 1}
    assert invariants_for_kind(pair, SymmetryKind(-1, 1, 1)).as_dict() == {}
    assert invariants_for_kind(eigs, SymmetryKind(1)).as_dict() == {"sig": 1}


def test_invariant_set_validates_fields():
    with pytest.raises(ValueError):
        InvariantSet(SymmetryKind(1), sig=1, sec=0)
    with pytest.raises(SymmetryViolated):
        InvariantSet(SymmetryKind(1, 1, 1), sig=1, sec=0, diagnostics={"sig_minus1": 0})


# --- properties -----------------------------------------------------------------------

_KINDS = sorted(PAIR_KINDS)


def _decomposable(T, F):
    """Skip samples whose spectrum cannot be clustered at the default gap."""
    try:
        return krein_spectrum(T, F)
    except (NotIsolated, SymmetryViolated):
        assume(False)
    except Exception as exc:  # DegenerateForm after widening
        assume(type(exc).__name__ != "DegenerateForm")
        raise


@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_transfer_type_unitarity_and_reflection(half, seed, real):
    """Spectrum of any J-unitary is invariant under inversion in the circle."""
    rng = np.random.default_rng(seed)
    n = 2 * half
    F = block_I(half)
    R = np.eye(n) if real else None
    T = symmetric_operator(F, R, rng=rng, scale=2.0)
    assert np.linalg.norm(T.conj().T @ F @ T - F, 2) <= 1e-10 * max(1.0, np.linalg.norm(T, 2) ** 2)
    ev = np.linalg.eigvals(T)
    mirrored = 1.0 / np.conj(ev)
    scale = max(1.0, np.max(np.abs(ev)))
    cost = np.abs(ev[:, None] - mirrored[None, :])
    r, c = linear_sum_assignment(cost)
    assert cost[r, c].max() <= 1e-7 * scale
    if real:
        cost = np.abs(ev[:, None] - np.conj(ev)[None, :])
        r, c = linear_sum_assignment(cost)
        assert cost[r, c].max() <= 1e-7 * scale


@given(st.sampled_from(_KINDS), st.integers(1, 2), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_inertia_reflection_rule(kind, copies, seed, weight):
    T, F, R = symmetric_sample(kind, copies, seed, weight)
    assume(T.shape[0] <= 12)
    rep = check_symmetries(T, F, R)
    assert rep.fundamental and rep.real
    eigs = _decomposable(T, F)
    sign = kind[0] * kind[2]
    assert check_inertia_reflection(eigs, sign, atol=1e-6)
    if kind[1] == -1:
        # Kramers degeneracy at the real points of the circle
        for e in eigs:
            if abs(e.lam - 1) < 1e-6 or abs(e.lam + 1) < 1e-6:
                assert e.multiplicity % 2 == 0
    inv = invariants_for_kind(eigs, SymmetryKind(*kind))
    assert set(inv.as_dict()) == set(SymmetryKind(*kind).invariant_fields())


@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_inertia_adds_up_to_multiplicity(n, seed, n_plus):
    rng = np.random.default_rng(seed)
    n_plus = min(n_plus, n)
    F = np.diag([1.0] * n_plus + [-1.0] * (n - n_plus))
    F, = conjugate(random_orthogonal(n, rng), F)
    T = symmetric_operator(F, rng=rng, scale=float(rng.uniform(0.5, 4.0)))
    eigs = _decomposable(T, F)
    dec = decompose(T)
    for e in eigs:
        assert e.nu_plus + e.nu_minus == e.multiplicity
        c = dec.cluster_near(e.lam)
        assert e.multiplicity >= 1
        assert abs(abs(c.center) - 1) < 1e-6
    assert sum(e.multiplicity for e in eigs) <= n
    # off-circle eigenvalues pair into neutral subspaces, so in finite
    # dimension the global signature is the signature of the form itself
    assert global_signature(eigs) == 2 * n_plus - n


def test_signature_at_collects_nearby():
    eigs = [KreinEigenvalue(1.0, 1, 0, 1), KreinEigenvalue(-1.0, 0, 1, 1)]
    assert signature_at(eigs, 1.0) == 1
    assert signature_at(eigs, -1.0) == -1


def test_kind_j_k_has_no_invariant():
    T, F, R = symmetric_sample((1, 1, -1), 1, 7, 0.1)
    eigs = krein_spectrum(T, F)
    assert invariants_for_kind(eigs, SymmetryKind(1, 1, -1)).as_dict() == {}


def test_fixture_kinds_are_correct():
    for kind, (F, R) in PAIR_KINDS.items():
        got = SymmetryKind.from_symmetries(Symmetry(F), Symmetry(R, flavor="real")).triple
        assert got == kind
    assert block_K(1).shape == (2, 2) and block_J(1).shape == (2, 2)
