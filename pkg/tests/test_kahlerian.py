import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeform import kahlerian as K

coord = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


def point(d):
    return st.lists(coord, min_size=2 * d + 2, max_size=2 * d + 2).map(np.array)


def scalar_mul(x, y, d):
    """Group law written out coordinate by coordinate."""
    a, v, t = x[0], list(x[1:-1]), x[-1]
    b, w, s = y[0], list(y[1:-1]), y[-1]
    om = sum(v[i] * w[i + d] - v[i + d] * w[i] for i in range(d))
    nv = [math.exp(-b) * v[i] + w[i] for i in range(2 * d)]
    nt = math.exp(-2 * b) * t + s + 0.5 * math.exp(-b) * om
    return np.array([a + b, *nv, nt])


def fd_jacobian_det(f, x, h=1e-6):
    m = x.size
    cols = []
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.linalg.det(np.stack(cols, axis=-1))


def test_identity_element():
    for d in range(3):
        e = K.JGroupElement.identity(d)
        x = K.JGroupElement(0.3, np.arange(2 * d) * 0.1, -0.7)
        assert np.allclose(K.jgroup_mul(x, e, d).pack(), x.pack())
        assert np.allclose(K.jgroup_mul(e, x, d).pack(), x.pack())


@pytest.mark.parametrize("d", [0, 1, 2])
def test_inverse_1000_points(d):
    xs = K.sample_points(np.random.default_rng(d), 1000, d, 2.0)
    assert np.max(np.abs(K.mul(xs, K.inv(xs, d), d))) <= 1e-12
    assert np.max(np.abs(K.mul(K.inv(xs, d), xs, d))) <= 1e-12


@pytest.mark.parametrize("d", [0, 1, 2])
def test_vectorised_law_matches_scalar_law(d):
    rng = np.random.default_rng(10 + d)
    xs, ys = K.sample_points(rng, 50, d, 2.0), K.sample_points(rng, 50, d, 2.0)
    want = np.array([scalar_mul(x, y, d) for x, y in zip(xs, ys)])
    assert np.max(np.abs(K.mul(xs, ys, d) - want)) < 1e-13


@pytest.mark.parametrize("d", [0, 1, 2])
def test_associativity_1000_triples(d):
    rng = np.random.default_rng(20 + d)
    x, y, z = (K.sample_points(rng, 1000, d, 2.0) for _ in range(3))
    lhs = K.mul(K.mul(x, y, d), z, d)
    rhs = K.mul(x, K.mul(y, z, d), d)
    assert np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))) <= 1e-9


def test_symplectic_form():
    assert K.omega0(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 1) == 1.0
    assert K.omega0(np.array([0.0, 1.0]), np.array([1.0, 0.0]), 1) == -1.0
    assert K.omega0(np.zeros(0), np.zeros(0), 0) == 0.0


def test_modular_function_values():
    assert K.modular_function(np.zeros(2), 0) == 1.0
    assert K.modular_function(np.array([1.0, 0.0]), 0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert K.modular_function(np.array([1.0, 0, 0, 0]), 1) == pytest.approx(math.exp(-4), rel=1e-15)


@pytest.mark.parametrize("d", [0, 1])
def test_modular_homomorphism(d):
    rng = np.random.default_rng(30 + d)
    x, y = K.sample_points(rng, 1000, d, 2.0), K.sample_points(rng, 1000, d, 2.0)
    lhs = K.modular_function(K.mul(x, y, d), d)
    rhs = K.modular_function(x, d) * K.modular_function(y, d)
    assert np.max(np.abs(lhs - rhs) / rhs) <= 1e-12


@pytest.mark.parametrize("d", [0, 1, 2])
def test_jacobians_against_finite_differences(d):
    rng = np.random.default_rng(40 + d)
    for _ in range(10):
        x, g = K.sample_points(rng, 2, d, 1.0)
        left = fd_jacobian_det(lambda p: K.mul(g, p, d), x)
        right = fd_jacobian_det(lambda p: K.mul(p, g, d), x)
        assert left == pytest.approx(1.0, abs=1e-6)
        assert right == pytest.approx(K.modular_function(g, d), rel=1e-6)
        assert K._jacobian_det(lambda p: K.mul(p, g, d), x.astype(complex)) == pytest.approx(right, rel=1e-6)


@pytest.mark.parametrize("d", [0, 1, 2])
@pytest.mark.parametrize("theta", [1.0, -0.5, 3.0])
def test_kernels_at_identity(d, theta):
    e = np.zeros(2 * d + 2)
    assert K.kernel_A(e, e, d) == 1.0
    assert K.kernel_S(e, e, d) == 0.0
    assert K.kernel_K(theta, e, e, d) == pytest.approx(4 / (math.pi * theta) ** (2 * d + 2), rel=1e-15)


@pytest.mark.parametrize("d", [0, 1, 2])
def test_kernel_A_closed_form_on_a_axis(d):
    # x = (a,0,0), y = e: A = cosh(a)^{2d} cosh(2a)
    for a in (-1.3, 0.4, 2.0):
        x = np.zeros(2 * d + 2)
        x[0] = a
        assert K.kernel_A(x, np.zeros_like(x), d) == pytest.approx(math.cosh(a) ** (2 * d) * math.cosh(2 * a), rel=1e-14)


def test_kernel_S_closed_form():
    x, y = np.array([0.3, 0.0, 0.0, 1.2]), np.array([-0.5, 0.0, 0.0, 0.7])
    assert K.kernel_S(x, y, 1) == pytest.approx(math.sinh(0.6) * 0.7 - math.sinh(-1.0) * 1.2, rel=1e-14)
    x, y = np.array([0.2, 1.0, 0.0, 0.0]), np.array([0.1, 0.0, 1.0, 0.0])
    assert K.kernel_S(x, y, 1) == pytest.approx(math.cosh(0.2) * math.cosh(0.1), rel=1e-14)


@pytest.mark.parametrize("d", [0, 1, 2])
def test_kernel_modulus_and_conjugate(d):
    rng = np.random.default_rng(50 + d)
    x, y = K.sample_points(rng, 200, d, 2.0), K.sample_points(rng, 200, d, 2.0)
    k = K.kernel_K(0.7, x, y, d)
    assert np.allclose(np.abs(k), K.kernel_prefactor(0.7, d) * K.kernel_A(x, y, d), rtol=1e-12)
    assert np.max(np.abs(np.conj(k) - K.kernel_K(-0.7, x, y, d)) / np.abs(k)) <= 1e-12


def test_inversion_symmetry_at_identity():
    e = np.zeros(4)
    assert K.inversion_symmetry(1.0, e, e, 1) == (0.0, 0.0)


@pytest.mark.parametrize("d", [0, 1])
def test_inversion_symmetry_10k(d):
    rng = np.random.default_rng(60 + d)
    x, y = K.sample_points(rng, 10_000, d, 2.0), K.sample_points(rng, 10_000, d, 2.0)
    da, ds = K.inversion_symmetry(1.0, x, y, d)
    assert da <= 1e-9 and ds <= 1e-9


@settings(max_examples=60, deadline=None)
@given(point(1), point(1), point(1))
def test_associativity_property(x, y, z):
    lhs = K.mul(K.mul(x, y, 1), z, 1)
    rhs = K.mul(x, K.mul(y, z, 1), 1)
    assert np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(point(1), point(1))
def test_S_antisymmetry_and_inversion_property(x, y):
    assert abs(K.kernel_S(y, x, 1) + K.kernel_S(x, y, 1)) <= 1e-9 * max(1, abs(K.kernel_S(x, y, 1)))
    da, ds = K.inversion_symmetry(2.0, x, y, 1)
    assert da <= 1e-9 and ds <= 1e-9


def test_zero_tau_gives_plain_kernel():
    rng = np.random.default_rng(70)
    x, y = K.sample_points(rng, 100, 1, 2.0), K.sample_points(rng, 100, 1, 2.0)
    zero = K.KernelParams(1, 1.5, lambda s: np.zeros_like(s, dtype=complex))
    none = K.KernelParams(1, 1.5, None)
    k = K.kernel_K(1.5, x, y, 1)
    assert np.array_equal(K.kernel_Ktau(zero, x, y), k)
    assert np.array_equal(K.kernel_Ktau(none, x, y), k)


def test_cohomology_factor_by_hand():
    p = K.KernelParams(0, 2.0, K.example_tau)
    x, y = np.array([0.4, 1.0]), np.array([-0.3, 5.0])
    tau = lambda s: 1j * s / (1 + s * s)  # noqa: E731
    arg = lambda s: 2 / 2.0 * math.sinh(s)  # noqa: E731
    want = np.exp(tau(arg(0.8)) + tau(arg(0.6)) - tau(arg(1.4)))
    assert K.cohomology_factor(p, x, y) == pytest.approx(want, rel=1e-14)
    assert abs(want) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("d", [0, 1])
def test_cohomology_factor_check_10k(d):
    rng = np.random.default_rng(80 + d)
    x, y = K.sample_points(rng, 10_000, d, 2.0), K.sample_points(rng, 10_000, d, 2.0)
    r = K.cohomology_factor_check(K.KernelParams(d, 1.0, K.example_tau), x, y, rng)
    assert r.passed, r.failures()


def test_real_tau_rejected():
    p = K.KernelParams(0, 1.0, lambda s: s + 0j)
    with pytest.raises(K.TauError):
        K.kernel_Ktau(p, np.array([0.5, 0.0]), np.array([0.1, 0.0]))


def test_tau_shape_checked():
    p = K.KernelParams(0, 1.0, lambda s: np.zeros(1, dtype=complex))
    with pytest.raises(K.TauError):
        K.kernel_Ktau(p, np.array([[0.5, 0.0]] * 3), np.array([[0.1, 0.0]] * 3))


def test_overflow_is_reported():
    x = np.array([1000.0, 0.0])
    with pytest.raises(K.KernelOverflowError):
        K.kernel_K(1.0, x, np.zeros(2), 0)
    with pytest.raises(K.KernelOverflowError):
        K.modular_function(np.array([-1000.0, 0.0]), 0)


def test_dimension_mismatch():
    x, y = K.JGroupElement.identity(1), K.JGroupElement.identity(2)
    with pytest.raises(ValueError):
        K.jgroup_mul(x, y, 1)
    with pytest.raises(ValueError):
        K.jgroup_inv(y, 1)
    with pytest.raises(ValueError):
        K.kernel_A(np.zeros(3), np.zeros(4), 1)


def test_element_and_params_validation():
    with pytest.raises(ValueError):
        K.JGroupElement(0.0, np.zeros(3), 0.0)
    with pytest.raises(ValueError):
        K.JGroupElement(float("nan"), np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        K.KernelParams(1, 0.0)
    with pytest.raises(ValueError):
        K.KernelParams(-1, 1.0)


def test_pack_roundtrip():
    x = K.JGroupElement(0.1, [1.0, 2.0], 3.0)
    y = K.JGroupElement.unpack(x.pack())
    assert y.d == 1 and np.array_equal(y.pack(), [0.1, 1.0, 2.0, 3.0])


@pytest.mark.parametrize("d", [0, 1, 2])
@pytest.mark.parametrize("theta", [0.3, -1.5, 10.0])
def test_report_passes(d, theta):
    r = K.kahlerian_report(d, theta, samples=2000, seed=1)
    assert r.passed, r.failures()
    assert len(r.checks) == 15


def test_report_is_deterministic():
    a = K.kahlerian_report(1, 1.0, samples=500, seed=4)
    b = K.kahlerian_report(1, 1.0, samples=500, seed=4)
    assert [c.defect for c in a.checks] == [c.defect for c in b.checks]
