import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeform import fqg
from qdeform.tensorkit import (
    AntilinearOperator,
    HilbertSpace,
    LegError,
    LegOperator,
    OperatorSpan,
    antilinear_polar,
    blocks,
    complex_conjugation,
    dagger,
    flip,
    incremental_orthobasis,
    kron,
    leg_permute,
    matrix_unit,
    opnorm,
    place,
    place_op,
    slice_leg,
    slice_op,
    span_contains,
    span_dim,
    span_equal,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def leg(label, dim):
    return HilbertSpace(dim, label)


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


# kron


def test_kron_identities():
    a = LegOperator((leg("a", 2),), np.eye(2))
    b = LegOperator((leg("b", 3),), np.eye(3))
    assert np.allclose(kron(a, b).entries, np.eye(6))
    z = kron(LegOperator((leg("a", 2),), SZ), LegOperator((leg("b", 2),), SZ))
    assert np.allclose(z.entries, np.diag([1, -1, -1, 1]))
    x = kron(LegOperator((leg("a", 2),), SX), LegOperator((leg("b", 2),), SX))
    assert np.allclose((x @ x).entries, np.eye(4))


def test_kron_rejects_duplicate_labels():
    a = LegOperator((leg("a", 2),), np.eye(2))
    with pytest.raises(LegError):
        kron(a, a)


def test_hilbert_space_validation():
    with pytest.raises(ValueError):
        HilbertSpace(0, "x")
    with pytest.raises(ValueError):
        HilbertSpace(2, "x", ("p", "p"))
    assert HilbertSpace(3, "x").basis_names == ("0", "1", "2")


# place


def test_place_noop_and_flip():
    h1, h2, h3 = leg("1", 2), leg("2", 2), leg("3", 2)
    x = LegOperator((h1, h2), np.arange(16).reshape(4, 4))
    assert np.allclose(place_op(x, ["1", "2"], [h1, h2]).entries, x.entries)
    s = LegOperator((h1, h2), flip(2))
    assert np.allclose(place_op(s, ["1", "2"], [h1, h2, h3]).entries, np.kron(flip(2), np.eye(2)))


def test_place_errors():
    h1, h2 = leg("1", 2), leg("2", 3)
    x = LegOperator((leg("u", 2),), np.eye(2))
    with pytest.raises(LegError):
        place_op(x, ["nope"], [h1, h2])
    with pytest.raises(LegError):
        place_op(x, ["2"], [h1, h2])


def test_place_nonadjacent_against_explicit_permutation():
    # oracle: X_13 = Σ_23 X_12 Σ_23
    rng = np.random.default_rng(1)
    x = random_matrix(rng, 4)
    s23 = np.kron(np.eye(2), flip(2))
    assert np.allclose(place(x, [0, 2], [2, 2, 2]), s23 @ np.kron(x, np.eye(2)) @ s23)
    # reversed order of targets means X_31 = Σ_13 X_13 Σ_13
    assert np.allclose(place(x, [2, 0], [2, 2, 2]), place(flip(2) @ x @ flip(2), [0, 2], [2, 2, 2]))


def test_pentagon_z2_by_hand():
    # W(δ_s⊗δ_t) = δ_s⊗δ_{s+t}: controlled-NOT on C²⊗C²
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    d = [2, 2, 2]
    lhs = place(cnot, [0, 1], d) @ place(cnot, [0, 2], d) @ place(cnot, [1, 2], d)
    rhs = place(cnot, [1, 2], d) @ place(cnot, [0, 1], d)
    assert opnorm(lhs - rhs) == 0.0
    assert np.allclose(fqg.function_algebra(fqg.cyclic(2)).W, cnot)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_place_respects_composition(seed):
    rng = np.random.default_rng(seed)
    x, y = random_matrix(rng, 6), random_matrix(rng, 6)
    dims = [2, 2, 3]
    for targets in ([0, 2], [2, 1], [1, 2]):
        assert opnorm(place(x @ y, targets, dims) - place(x, targets, dims) @ place(y, targets, dims)) < 1e-10


def test_leg_permute_round_trip():
    rng = np.random.default_rng(2)
    h = (leg("a", 2), leg("b", 3), leg("c", 2))
    x = LegOperator(h, random_matrix(rng, 12))
    y = leg_permute(x, ["c", "a", "b"])
    assert y.labels == ["c", "a", "b"]
    assert leg_permute(y, ["a", "b", "c"]).close_to(x)
    # oracle on a product operator
    a, b, c = random_matrix(rng, 2), random_matrix(rng, 3), random_matrix(rng, 2)
    p = LegOperator(h, np.kron(np.kron(a, b), c))
    assert np.allclose(leg_permute(p, ["c", "a", "b"]).entries, np.kron(np.kron(c, a), b))


# slice


def test_slice_product_state():
    rng = np.random.default_rng(3)
    a, b, rho = random_matrix(rng, 2), random_matrix(rng, 3), random_matrix(rng, 3)
    x = LegOperator((leg("1", 2), leg("2", 3)), np.kron(a, b))
    omega_b = np.trace(rho.T @ b)
    assert np.allclose(slice_op(x, "2", rho).entries, omega_b * a)
    ident = LegOperator((leg("1", 2), leg("2", 3)), np.eye(6))
    assert np.allclose(slice_op(ident, "1", rho[:2, :2]).entries, np.trace(rho[:2, :2]) * np.eye(3))
    with pytest.raises(LegError):
        slice_op(x, "3", rho)


def test_slice_matrix_unit_reads_entries():
    rng = np.random.default_rng(4)
    x = random_matrix(rng, 6)
    # ω_ij(a) = a_ij on leg 0 picks out the (i, j) block
    for i in range(2):
        for j in range(2):
            assert np.allclose(slice_leg(x, [2, 3], 0, matrix_unit(i, j, 2)), x[3 * i:3 * i + 3, 3 * j:3 * j + 3])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_slice_linear_and_placement(seed):
    rng = np.random.default_rng(seed)
    x, y, r1, r2 = random_matrix(rng, 4), random_matrix(rng, 4), random_matrix(rng, 2), random_matrix(rng, 2)
    z = 0.3 - 1.2j
    s = lambda m, r: slice_leg(m, [2, 2], 1, r)  # noqa: E731
    assert np.allclose(s(x + z * y, r1), s(x, r1) + z * s(y, r1))
    assert np.allclose(s(x, r1 + z * r2), s(x, r1) + z * s(x, r2))
    a = random_matrix(rng, 2)
    assert np.allclose(slice_leg(place(a, [0], [2, 2]), [2, 2], 1, r1), np.trace(r1) * a)


def test_slices_of_w_hat_span_group_algebra_z2():
    q = fqg.group_algebra(fqg.cyclic(2))
    sp = OperatorSpan(blocks(q.W_hat, 2), dim=2)
    assert sp.dim == 2
    assert span_equal(sp, OperatorSpan([np.eye(2), SX], dim=2))


# antilinear operators


def test_antilinear_composition_rule():
    rng = np.random.default_rng(5)
    m1, m2 = random_matrix(rng, 3), random_matrix(rng, 3)
    a, b = AntilinearOperator(m1), AntilinearOperator(m2)
    xi = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose((a * b) @ xi, a(b(xi)))
    assert np.allclose(a * b, m1 @ np.conj(m2))


def test_polar_of_conjugation():
    j, delta = antilinear_polar(complex_conjugation(3))
    assert np.allclose(j.matrix, np.eye(3))
    assert np.allclose(delta, np.eye(3))


def test_polar_scaled_conjugation():
    s = AntilinearOperator(np.diag([2.0, 0.5]).astype(complex))
    j, delta = antilinear_polar(s)
    assert np.allclose(delta, np.diag([4.0, 0.25]))
    assert np.allclose(j.matrix, np.eye(2))
    # s = J Δ^{1/2}: J ∘ (linear Δ^{1/2}) has matrix M_J conj(Δ^{1/2})
    assert opnorm(j.matrix @ np.conj(np.diag([2.0, 0.5])) - s.matrix) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_polar_reconstruction_and_antiunitarity(seed):
    rng = np.random.default_rng(seed)
    m = random_matrix(rng, 4) + 4 * np.eye(4)
    s = AntilinearOperator(m)
    j, delta = antilinear_polar(s)
    w, v = np.linalg.eigh(delta)
    root = (v * np.sqrt(w)) @ dagger(v)
    assert opnorm(j.matrix @ np.conj(root) - m) < 1e-10
    xi, eta = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    assert abs(np.vdot(j(xi), j(eta)) - np.conj(np.vdot(xi, eta))) < 1e-10


def test_polar_involutive_input_gives_involution():
    # S: x ↦ x* on M_2 in the Hilbert–Schmidt picture with a non-tracial weight
    rho = np.diag([0.7, 0.3])
    basis = [matrix_unit(i, j, 2) for i in range(2) for j in range(2)]
    lam = lambda x: (x @ np.sqrt(rho)).ravel()  # noqa: E731
    v = np.array([lam(b) for b in basis]).T
    w = np.array([lam(dagger(b)) for b in basis]).T
    s = AntilinearOperator(w @ np.conj(np.linalg.inv(v)))
    assert opnorm(s * s - np.eye(4)) < 1e-12
    j, _ = antilinear_polar(s)
    assert opnorm(j * j - np.eye(4)) < 1e-12


def test_polar_singular_input():
    with pytest.raises(np.linalg.LinAlgError):
        antilinear_polar(AntilinearOperator(np.diag([1.0, 0.0]).astype(complex)))


# spans


def test_span_equal_and_contains():
    a = OperatorSpan([np.eye(2), SZ], dim=2)
    b = OperatorSpan([SZ, np.eye(2)], dim=2)
    assert span_equal(a, b)
    e11 = OperatorSpan([matrix_unit(0, 0, 2)], dim=2)
    diag = OperatorSpan([matrix_unit(0, 0, 2), matrix_unit(1, 1, 2)], dim=2)
    assert span_contains(diag, e11) and not span_contains(e11, diag)
    assert not span_equal(e11, diag)
    assert (span_dim(e11), span_dim(diag)) == (1, 2)
    with pytest.raises(ValueError):
        a.distance(OperatorSpan([np.eye(3)], dim=3))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_span_equal_is_an_equivalence(seed):
    rng = np.random.default_rng(seed)
    gens = [rng.integers(-2, 3, size=(3, 3)).astype(complex) for _ in range(3)]
    mix = rng.integers(1, 4, size=(3, 3))
    mix[np.diag_indices(3)] += 10  # invertible integer mixing
    a = OperatorSpan(gens, dim=3)
    b = OperatorSpan([sum(mix[i, k] * gens[k] for k in range(3)) for i in range(3)], dim=3)
    c = OperatorSpan(list(reversed(gens)), dim=3)
    assert span_equal(a, a)
    assert span_equal(a, b) == span_equal(b, a)
    if span_equal(a, b) and span_equal(b, c):
        assert span_equal(a, c)


def test_span_of_all_slices_of_w_hat_z2_has_dim_2():
    q = fqg.group_algebra(fqg.cyclic(2))
    rhos = [matrix_unit(i, j, 2) for i in range(2) for j in range(2)]
    gens = [slice_leg(q.W_hat, [2, 2], 0, r) for r in rhos]
    assert OperatorSpan(gens, dim=2).dim == 2


def test_incremental_orthobasis_matches_rank():
    rng = np.random.default_rng(6)
    base = rng.normal(size=(50, 7)) + 1j * rng.normal(size=(50, 7))
    cols = [base @ rng.normal(size=7) for _ in range(300)]
    q, count = incremental_orthobasis(iter(cols), 50)
    assert count == 300
    assert q.shape[1] == np.linalg.matrix_rank(np.array(cols).T) == 7
    assert np.allclose(dagger(q) @ q, np.eye(7))


def test_center_dim_matrix_algebras():
    full = OperatorSpan([matrix_unit(i, j, 2) for i in range(2) for j in range(2)], dim=2)
    diag = OperatorSpan([matrix_unit(i, i, 3) for i in range(3)], dim=3)
    assert full.center_dim() == 1
    assert diag.center_dim() == 3
