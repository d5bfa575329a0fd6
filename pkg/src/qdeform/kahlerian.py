"""Pointwise numerics on the elementary normal j-group R x R^{2d} x R.

Points are stored packed as real arrays of shape (..., 2d+2) with columns
(a, v_1..v_2d, t); every function below broadcasts over the leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .report import Report

TOL_KAHLER = 1e-9
TOL_INVERSE = 1e-12
TOL_RATIO_LOCAL = 1e-12
DEFAULT_BOX = 2.0


class KernelOverflowError(OverflowError):
    """A kernel or group value left the range of double precision."""


class TauError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JGroupElement:
    a: float
    v: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if v.size % 2:
            raise ValueError(f"v must have even length, got {v.size}")
        if not (np.isfinite(self.a) and np.isfinite(self.t) and np.all(np.isfinite(v))):
            raise ValueError("group element coordinates must be finite")
        object.__setattr__(self, "v", v)

    @property
    def d(self) -> int:
        return self.v.size // 2

    def pack(self) -> np.ndarray:
        return np.concatenate([[self.a], self.v, [self.t]])

    @classmethod
    def unpack(cls, x: np.ndarray) -> "JGroupElement":
        x = np.asarray(x, dtype=float)
        return cls(float(x[0]), x[1:-1].copy(), float(x[-1]))

    @classmethod
    def identity(cls, d: int) -> "JGroupElement":
        return cls(0.0, np.zeros(2 * d), 0.0)


@dataclass(frozen=True)
class KernelParams:
    d: int
    theta: float
    tau: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"d must be non-negative, got {self.d}")
        if not np.isfinite(self.theta) or self.theta == 0:
            raise ValueError(f"theta must be a nonzero real, got {self.theta}")


def example_tau(x: np.ndarray) -> np.ndarray:
    """tau(x) = i x / (1 + x^2), purely imaginary on the reals."""
    x = np.asarray(x)
    return 1j * x / (1 + x * x)


def _split(x: np.ndarray, d: int):
    x = np.asarray(x)
    if x.shape[-1] != 2 * d + 2:
        raise ValueError(f"expected last axis of length {2 * d + 2} for d={d}, got {x.shape[-1]}")
    return x[..., 0], x[..., 1:-1], x[..., -1]


def omega0(v: np.ndarray, w: np.ndarray, d: int) -> np.ndarray:
    """Standard symplectic form sum_i (v_i w_{i+d} - v_{i+d} w_i)."""
    if d == 0:
        return np.zeros(np.broadcast_shapes(v.shape[:-1], w.shape[:-1]), dtype=np.result_type(v, w))
    return np.sum(v[..., :d] * w[..., d:] - v[..., d:] * w[..., :d], axis=-1)


def _guard(fn):
    def wrapped(*args, **kwargs):
        try:
            with np.errstate(over="raise", invalid="raise"):
                out = fn(*args, **kwargs)
        except FloatingPointError as e:
            raise KernelOverflowError(f"{fn.__name__}: {e}") from None
        if not np.all(np.isfinite(out)):
            raise KernelOverflowError(f"{fn.__name__}: non-finite value")
        return out

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def _as_packed(x, d: int) -> np.ndarray:
    if isinstance(x, JGroupElement):
        if x.d != d:
            raise ValueError(f"element has d={x.d}, expected d={d}")
        return x.pack()
    return np.asarray(x)


def mul(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    """Packed group law; accepts complex input so it can be complex-stepped."""
    a, v, t = _split(x, d)
    b, w, s = _split(y, d)
    eb = np.exp(-b)
    out_v = eb[..., None] * v + w
    out_t = eb * eb * t + s + 0.5 * eb * omega0(v, w, d)
    return np.concatenate([(a + b)[..., None], out_v, out_t[..., None]], axis=-1)


def inv(x: np.ndarray, d: int) -> np.ndarray:
    a, v, t = _split(x, d)
    ea = np.exp(a)
    return np.concatenate([(-a)[..., None], -ea[..., None] * v, (-ea * ea * t)[..., None]], axis=-1)


def jgroup_mul(x: JGroupElement, y: JGroupElement, d: int) -> JGroupElement:
    if x.d != d or y.d != d:
        raise ValueError(f"dimension mismatch: d={d}, got {x.d} and {y.d}")
    return JGroupElement.unpack(_guard(mul)(x.pack(), y.pack(), d))


def jgroup_inv(x: JGroupElement, d: int) -> JGroupElement:
    if x.d != d:
        raise ValueError(f"dimension mismatch: d={d}, got {x.d}")
    return JGroupElement.unpack(_guard(inv)(x.pack(), d))


def modular_function(x, d: int):
    """Delta(a, v, t) = exp(-(2d+2) a)."""
    a = _split(_as_packed(x, d), d)[0]
    return _guard(np.exp)(-(2 * d + 2) * a)


@_guard
def _kernel_A(x, y, d):
    a, b = _split(x, d)[0], _split(y, d)[0]
    first = (np.cosh(a) * np.cosh(b) * np.cosh(a - b)) ** d
    second = np.sqrt(np.cosh(2 * a) * np.cosh(2 * b) * np.cosh(2 * a - 2 * b))
    return first * second


@_guard
def _kernel_S(x, y, d):
    a, v, t = _split(x, d)
    b, w, s = _split(y, d)
    return np.sinh(2 * a) * s - np.sinh(2 * b) * t + np.cosh(a) * np.cosh(b) * omega0(v, w, d)


def kernel_A(x, y, d: int):
    return _kernel_A(_as_packed(x, d), _as_packed(y, d), d)


def kernel_S(x, y, d: int):
    return _kernel_S(_as_packed(x, d), _as_packed(y, d), d)


def kernel_prefactor(theta: float, d: int) -> float:
    return 4.0 / (np.pi * theta) ** (2 * d + 2)


def kernel_K(theta: float, x, y, d: int):
    """K_theta(x, y) = 4 (pi theta)^{-2d-2} A(x, y) exp(2i S(x, y) / theta)."""
    if theta == 0:
        raise ValueError("theta must be nonzero")
    x, y = _as_packed(x, d), _as_packed(y, d)
    return _guard(lambda: kernel_prefactor(theta, d) * kernel_A(x, y, d)
                  * np.exp(2j * kernel_S(x, y, d) / theta))()


def _tau_values(params: KernelParams, args: np.ndarray, tol: float = TOL_KAHLER) -> np.ndarray:
    vals = np.asarray(params.tau(args), dtype=complex)
    if vals.shape != np.shape(args):
        raise TauError(f"tau returned shape {vals.shape} for input shape {np.shape(args)}")
    re = float(np.max(np.abs(vals.real), initial=0.0))
    if re > tol:
        raise TauError(f"tau is not purely imaginary on the sample (max |Re tau| = {re:.3e})")
    return vals


def cohomology_factor(params: KernelParams, x, y):
    """exp{tau(2 sinh(2a)/th) + tau(2 sinh(-2a')/th) - tau(2 sinh(2a-2a')/th)}."""
    d, th = params.d, params.theta
    a, b = _split(_as_packed(x, d), d)[0], _split(_as_packed(y, d), d)[0]
    if params.tau is None:
        return np.ones(np.broadcast_shapes(np.shape(a), np.shape(b)), dtype=complex)
    args = np.stack(np.broadcast_arrays(2 / th * np.sinh(2 * a), 2 / th * np.sinh(-2 * b),
                                        2 / th * np.sinh(2 * a - 2 * b)))
    tv = _tau_values(params, args)
    return _guard(np.exp)(tv[0] + tv[1] - tv[2])


def kernel_Ktau(params: KernelParams, x, y):
    return kernel_K(params.theta, x, y, params.d) * cohomology_factor(params, x, y)


def _rel(lhs, rhs) -> np.ndarray:
    return np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))


def inversion_symmetry(theta: float, x, y, d: int) -> tuple[float, float]:
    """Defects of A(y^-1 x, y^-1) = A(x, y) and S(y^-1 x, y^-1) = -S(x, y)."""
    del theta  # the identities do not involve theta
    x, y = _as_packed(x, d), _as_packed(y, d)
    yi = _guard(inv)(y, d)
    z = _guard(mul)(yi, x, d)
    da = _rel(kernel_A(z, yi, d), kernel_A(x, y, d))
    ds = _rel(kernel_S(z, yi, d), -kernel_S(x, y, d))
    return float(np.max(da, initial=0.0)), float(np.max(ds, initial=0.0))


def _jacobian_det(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-30) -> np.ndarray:
    """det Df(x) by complex-step differentiation, exact up to rounding."""
    m = x.shape[-1]
    cols = []
    for k in range(m):
        step = np.zeros(m, dtype=complex)
        step[k] = 1j * h
        cols.append(f(x + step).imag / h)
    return np.linalg.det(np.stack(cols, axis=-1))


def sample_points(rng: np.random.Generator, count: int, d: int, box: float) -> np.ndarray:
    return rng.uniform(-box, box, size=(count, 2 * d + 2))


def cohomology_factor_check(params: KernelParams, xs: np.ndarray, ys: np.ndarray,
                            rng: np.random.Generator | None = None, tol: float = TOL_KAHLER) -> Report:
    """Ratio identity, modulus one and a-dependence of K_{theta,tau} / K_theta."""
    d = params.d
    r = Report("cohomology-factor")
    ratio = kernel_Ktau(params, xs, ys) / kernel_K(params.theta, xs, ys, d)
    # expected ratio assembled as c(a) c(-a') / c(a - a') with c(s) = exp tau(2 sinh(2s)/theta)
    a, b = xs[:, 0], ys[:, 0]
    if params.tau is None:
        expected = np.ones_like(ratio)
    else:
        c = lambda s: np.exp(_tau_values(params, 2 / params.theta * np.sinh(2 * s)))
        expected = c(a) * c(-b) / c(a - b)
    r.add("K_theta_tau / K_theta = exp{tau(.)+tau(.)-tau(.)}", "K_{theta,tau} = K_theta exp{tau(2/theta sinh 2a) + tau(2/theta sinh(-2a')) - tau(2/theta sinh(2a-2a'))}",
          np.max(np.abs(ratio - expected), initial=0.0), tol)
    r.add("|K_theta_tau / K_theta| = 1", "Re tau = 0 => |exp{...}| = 1",
          np.max(np.abs(np.abs(ratio) - 1), initial=0.0), tol)
    rng = rng if rng is not None else np.random.default_rng(0)
    xs2, ys2 = xs.copy(), ys.copy()
    xs2[:, 1:] = rng.uniform(-1, 1, size=xs2[:, 1:].shape) + xs[:, 1:]
    ys2[:, 1:] = rng.uniform(-1, 1, size=ys2[:, 1:].shape) + ys[:, 1:]
    ratio2 = kernel_Ktau(params, xs2, ys2) / kernel_K(params.theta, xs2, ys2, d)
    r.add("ratio depends only on (a, a')", "exp{tau(2/theta sinh 2a) + ...} independent of (v, t, v', t')",
          np.max(np.abs(ratio2 - ratio), initial=0.0), min(tol, TOL_RATIO_LOCAL))
    return r


def kahlerian_report(d: int, theta: float, samples: int = 10_000, seed: int = 0,
                     box: float = DEFAULT_BOX, tau: Callable | None = example_tau,
                     tol: float = TOL_KAHLER) -> Report:
    """All pointwise checks on `samples` seeded points drawn uniformly from [-box, box]."""
    params = KernelParams(d, theta, tau)
    rng = np.random.default_rng([seed, d])
    xs, ys, zs = (sample_points(rng, samples, d, box) for _ in range(3))
    g_mul = _guard(mul)
    r = Report(f"kahlerian(d={d})")
    r.notes.update({"d": d, "theta": theta, "samples": samples, "box": box,
                    "tau": getattr(tau, "__name__", "custom") if tau is not None else "none"})

    e = np.zeros(2 * d + 2)
    r.add("x e = e x = x", "identity (0,0,0)",
          max(np.max(np.abs(g_mul(xs, e, d) - xs)), np.max(np.abs(g_mul(e, xs, d) - xs))), tol)
    r.add("x x^-1 = x^-1 x = e", "(a,v,t)^-1 = (-a, -e^a v, -e^{2a} t)",
          max(np.max(np.abs(g_mul(xs, inv(xs, d), d))), np.max(np.abs(g_mul(inv(xs, d), xs, d)))),
          min(tol, TOL_INVERSE))
    r.add("(xy)z = x(yz)", "(a,v,t)(a',v',t') = (a+a', e^{-a'}v+v', e^{-2a'}t+t'+1/2 e^{-a'} w0(v,v'))",
          np.max(_rel(g_mul(g_mul(xs, ys, d), zs, d), g_mul(xs, g_mul(ys, zs, d), d))), tol)
    r.add("Delta(xy) = Delta(x) Delta(y)", "Delta_G(a,v,t) = e^{-(2d+2)a}",
          np.max(_rel(modular_function(g_mul(xs, ys, d), d), modular_function(xs, d) * modular_function(ys, d))),
          tol)
    r.add("det D(x -> g x) = 1", "Lebesgue measure is left invariant",
          np.max(np.abs(_jacobian_det(lambda x: mul(ys, x, d), xs.astype(complex)) - 1)), tol)
    r.add("det D(x -> x g) = Delta(g)", "int f(xg) dx = Delta(g)^-1 int f(x) dx",
          np.max(_rel(_jacobian_det(lambda x: mul(x, ys, d), xs.astype(complex)), modular_function(ys, d))), tol)

    da, ds = inversion_symmetry(theta, xs, ys, d)
    r.add("A(y^-1 x, y^-1) = A(x, y)", "A(x,x') = (cosh a cosh a' cosh(a-a'))^d (cosh 2a cosh 2a' cosh(2a-2a'))^{1/2}", da, tol)
    r.add("S(y^-1 x, y^-1) = -S(x, y)", "S(x,x') = sinh(2a)t' - sinh(2a')t + cosh a cosh a' w0(v,v')", ds, tol)
    r.add("S(x', x) = -S(x, x')", "S(x,x') = sinh(2a)t' - sinh(2a')t + cosh a cosh a' w0(v,v')",
          np.max(_rel(kernel_S(ys, xs, d), -kernel_S(xs, ys, d))), tol)

    k = kernel_K(theta, xs, ys, d)
    scale = kernel_prefactor(theta, d)
    yi = inv(ys, d)
    r.add("conj K_theta(y^-1 x, y^-1) = K_theta(x, y)", "K_theta = 4/(pi theta)^{2d+2} A exp(2i S / theta)",
          np.max(np.abs(np.conj(kernel_K(theta, g_mul(yi, xs, d), yi, d)) - k) / np.abs(k)), tol)
    r.add("conj K_theta = K_-theta", "conj K_theta(x,y) = K_-theta(x,y)",
          np.max(np.abs(np.conj(k) - kernel_K(-theta, xs, ys, d)) / np.abs(k)), tol)
    r.add("|K_theta| = 4 (pi theta)^{-2d-2} A", "K_theta = 4/(pi theta)^{2d+2} A exp(2i S / theta)",
          np.max(_rel(np.abs(k), abs(scale) * kernel_A(xs, ys, d))), tol)
    r.extend(cohomology_factor_check(params, xs, ys, rng, tol).checks)
    return r
