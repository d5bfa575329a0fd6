"""Twisted group algebras C*_r(Ĝ;Ω), the action β, quantization maps and regularity."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cocycles import DeformedDualData, DualCocycle, cocycle_table, dual_weight_gns
from .report import Report
from .tensorkit import (
    TOL_IDENTITY,
    TOL_SPAN,
    OperatorSpan,
    blocks,
    dagger,
    flip,
    matrix_unit,
    opnorm,
    place,
    slice_leg,
)


@dataclass(frozen=True, eq=False)
class TwistedGroupAlgebra:
    cocycle: DualCocycle
    data: DeformedDualData

    @property
    def n(self) -> int:
        return self.cocycle.n

    @property
    def q(self):
        return self.cocycle.q

    @cached_property
    def generators(self) -> list[np.ndarray]:
        return blocks(self.cocycle.what_omega_star, self.n)

    @property
    def span(self) -> OperatorSpan:
        return self.data.twisted_span

    @cached_property
    def U(self) -> np.ndarray:
        """(ŴΩ*)₂₁, the unitary implementing β."""
        s = flip(self.n)
        return s @ self.cocycle.what_omega_star @ s

    def beta(self, x: np.ndarray) -> np.ndarray:
        """β(x) = (ŴΩ*)₂₁(1⊗x)(ŴΩ*)*₂₁, a right action of G."""
        return self.U @ np.kron(np.eye(self.n), x) @ dagger(self.U)

    def beta_v(self, x: np.ndarray) -> np.ndarray:
        """β(x) = V(x⊗1)V*."""
        v = self.q.V
        return v @ np.kron(x, np.eye(self.n)) @ dagger(v)

    def beta_at(self, x: np.ndarray, rho: np.ndarray) -> np.ndarray:
        """(ι⊗ω)β(x) for ω(a) = Tr(ρᵀa)."""
        return slice_leg(self.beta(x), [self.n, self.n], 1, rho)

    def lambda_tilde(self, x: np.ndarray) -> np.ndarray:
        return self.data.lambda_tilde(x)

    def pi(self, rho: np.ndarray) -> np.ndarray:
        """π_Ω(ω) = (ω⊗ι)(ŴΩ*)."""
        return slice_leg(self.cocycle.what_omega_star, [self.n, self.n], 0, rho)

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        n = self.n
        q = self.q
        sp = self.span
        r = Report(f"twisted[{self.cocycle.label}]")
        r.add("dimension", "dim C*_r(Ghat;Omega) = dim L^inf(G)", float(abs(sp.dim - q.M.dim)), 0.0)
        r.add("*-closed", "C*_r(Ghat;Omega) = [(w⊗i)(W_hat Omega*)] is self-adjoint", sp.adjoint_defect(), tol_span)
        r.add("product-closed", "slices of W_hat Omega* form an algebra", sp.product_defect(), tol_span)
        cm = OperatorSpan([np.kron(a, b) for a in sp.basis() for b in q.M.basis()], dim=n * n)
        r.add("beta lands in C⊗M", "beta(x) = (W_hat Omega*)_21 (1⊗x) (W_hat Omega*)*_21",
              max(cm.residual(self.beta(x)) for x in sp.basis()), tol_span)
        r.add("beta two formulas", "beta(x) = V(x⊗1)V*",
              max(opnorm(self.beta(x) - self.beta_v(x)) for x in sp.basis()), tol)
        dims = [n] * 3
        t = self.cocycle.what_omega_star
        # (ι⊗β)(T) with β on leg 2 going to legs 2,3
        u23 = place(self.U, [1, 2], dims)
        lhs = u23 @ place(t, [0, 2], dims) @ dagger(u23)
        rhs = place(q.W_hat, [0, 2], dims) @ place(t, [0, 1], dims)
        r.add("action on W_hat Omega*", "(i⊗beta)(W_hat Omega*) = W_hat_13 (W_hat Omega*)_12", opnorm(lhs - rhs), tol)
        b = sp.basis()
        mult = max(opnorm(self.beta(x @ y) - self.beta(x) @ self.beta(y)) for x in b for y in b)
        r.add("beta multiplicative", "beta is a homomorphism", mult, tol)
        r.add("beta *-preserving", "beta(x*) = beta(x)*", max(opnorm(self.beta(dagger(x)) - dagger(self.beta(x))) for x in b), tol)
        r.add("beta coaction", "(beta⊗i)beta = (i⊗Delta)beta", self.coaction_defect(), tol)
        kc = OperatorSpan([np.kron(matrix_unit(i, j, n), y) for i in range(n) for j in range(n) for y in b], dim=n * n)
        left = OperatorSpan([t @ z for z in kc.basis()], dim=n * n)
        right = OperatorSpan([z @ t for z in kc.basis()], dim=n * n)
        r.add("multiplier left", "W_hat Omega* (K⊗C) = K⊗C", left.distance(kc), tol_span)
        r.add("multiplier right", "(K⊗C) W_hat Omega* = K⊗C", right.distance(kc), tol_span)
        cancel = OperatorSpan([np.kron(np.eye(n), m) @ self.beta(x) for m in q.M.basis() for x in b], dim=n * n)
        r.add("beta cancellation", "[(1⊗C(G)) beta(C)] = C⊗C(G)", cancel.distance(cm), tol_span)
        return r

    def coaction_defect(self) -> float:
        n = self.n
        dims = [n] * 3
        worst = 0.0
        for x in self.span.basis():
            bx = self.beta(x)
            u12 = place(self.U, [0, 1], dims)
            # legs (C, M, M): β applied again to the C leg of β(x)
            lhs = u12 @ place(bx, [1, 2], dims) @ dagger(u12)
            rhs = place(self.q.W, [1, 2], dims)
            rhs = dagger(rhs) @ place(bx, [0, 2], dims) @ rhs  # (ι⊗Δ)
            worst = max(worst, opnorm(lhs - rhs))
        return worst


def build_twisted_algebra(c: DualCocycle, data: DeformedDualData | None = None) -> TwistedGroupAlgebra:
    return TwistedGroupAlgebra(c, data or dual_weight_gns(c))


# ---------------------------------------------------------------------------
# quantization


def quantize(t: TwistedGroupAlgebra, nu: np.ndarray, f: np.ndarray) -> np.ndarray:
    """T_ν(f) = (ι⊗ν)(Ŵ_ΩΩ(f⊗1)(Ŵ_ΩΩ)*)."""
    a = t.data.what_omega_omega
    n = t.n
    return slice_leg(a @ np.kron(f, np.eye(n)) @ dagger(a), [n, n], 1, nu)


def dequantize(t: TwistedGroupAlgebra, omega: np.ndarray, x: np.ndarray) -> np.ndarray:
    """S_ω(x) = (ω⊗ι)β(x)."""
    return slice_leg(t.beta(x), [t.n, t.n], 0, omega)


def matrix_unit_functionals(n: int) -> list[np.ndarray]:
    return [matrix_unit(i, j, n) for i in range(n) for j in range(n)]


def quantization_report(t: TwistedGroupAlgebra, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    n = t.n
    q = t.q
    r = Report(f"quantization[{t.cocycle.label}]")
    nus = matrix_unit_functionals(n)
    fs = q.M.basis()
    images = [quantize(t, nu, f) for nu in nus for f in fs]
    # held to the identity tolerance: the projections agree to rounding
    r.add("spanning", "[T_nu(C(G))] = C*_r(Ghat;Omega)", OperatorSpan(images, dim=n).distance(t.span), tol)
    worst = 0.0
    for nu in nus:
        for f in fs:
            lhs = t.beta(quantize(t, nu, f))
            rhs = _tnu_tensor_id(t, nu, q.delta(f))
            worst = max(worst, opnorm(lhs - rhs))
    r.add("equivariance", "beta(T_nu(f)) = (T_nu⊗i)Delta(f)", worst, tol)
    r.add("unit", "T_nu(1) = nu(1) 1",
          max(opnorm(quantize(t, nu, np.eye(n)) - np.trace(nu) * np.eye(n)) for nu in nus), tol)
    r.add("dequantized unit", "S_w(1) = w(1) 1",
          max(opnorm(dequantize(t, w, np.eye(n)) - np.trace(w) * np.eye(n)) for w in nus), tol)
    worst = 0.0
    for w in nus:
        for x in t.span.basis():
            worst = max(worst, q.M.residual(dequantize(t, w, x)))
    r.add("dequantization lands in C(G)", "S_w(x) = (w⊗i)beta(x) in C(G)", worst, tol_span)
    worst = 0.0
    for w in nus:
        for x in t.span.basis():
            lhs = q.delta(dequantize(t, w, x))
            rhs = _slice_first_of_beta_beta(t, w, x)
            worst = max(worst, opnorm(lhs - rhs))
    r.add("dequantization equivariance", "Delta(S_w(x)) = (S_w⊗i)beta(x)", worst, tol)
    return r


def _tnu_tensor_id(t: TwistedGroupAlgebra, nu: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(T_ν⊗ι)(y) for y on two legs: (ν⊗ι⊗ι)((Ŵ_ΩΩ)₂₁ y₂₃ (Ŵ_ΩΩ)*₂₁) shifted."""
    n = t.n
    dims = [n] * 3
    s = flip(n)
    a21 = place(s @ t.data.what_omega_omega @ s, [0, 1], dims)
    big = a21 @ place(y, [1, 2], dims) @ dagger(a21)
    return slice_leg(big, dims, 0, nu)


def _slice_first_of_beta_beta(t: TwistedGroupAlgebra, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(S_ω⊗ι)β(x) = (ω⊗ι⊗ι)(β⊗ι)β(x)."""
    n = t.n
    dims = [n] * 3
    bx = t.beta(x)
    u12 = place(t.U, [0, 1], dims)
    bb = u12 @ place(bx, [1, 2], dims) @ dagger(u12)
    return slice_leg(bb, dims, 0, w)


def dequantize_after_quantize(t: TwistedGroupAlgebra, nu: np.ndarray, w: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """S_ω T_ν(f) computed directly and through (T_ν⊗ι)Δ(f)."""
    n = t.n
    direct = dequantize(t, w, quantize(t, nu, f))
    via = slice_leg(_tnu_tensor_id(t, nu, t.q.delta(f)), [n, n], 0, w)
    return direct, via


# ---------------------------------------------------------------------------
# group duals


def lambda_omega(t: TwistedGroupAlgebra, s: int, conjugate: bool = False) -> np.ndarray:
    """λ^Ω_s = λ_s · conj(Ω(s,·)) (or λ^{Ω̄}_s when ``conjugate``)."""
    gamma = t.q.group
    table = cocycle_table(t.cocycle)
    n = t.n
    lam = np.zeros((n, n), dtype=complex)
    for h in range(n):
        lam[gamma.mul(s, h), h] = 1.0
    row = table[s] if conjugate else np.conj(table[s])
    return lam @ np.diag(row)


def lambda_relation_defect(t: TwistedGroupAlgebra) -> float:
    """max over s,t of ‖λ^Ω_{st} − Ω(s,t)λ^Ω_sλ^Ω_t‖."""
    gamma = t.q.group
    table = cocycle_table(t.cocycle)
    n = t.n
    lam = [lambda_omega(t, s) for s in range(n)]
    return max(opnorm(lam[gamma.mul(s, u)] - table[s, u] * lam[s] @ lam[u]) for s in range(n) for u in range(n))


def quantization_example_defect(t: TwistedGroupAlgebra) -> float:
    """T_ν(λ_s) against ν(λ^{Ω̄}_s)·λ^Ω_s for all matrix-unit ν."""
    gamma = t.q.group
    n = t.n
    worst = 0.0
    for s in range(n):
        lam = np.zeros((n, n), dtype=complex)
        for h in range(n):
            lam[gamma.mul(s, h), h] = 1.0
        lo, lb = lambda_omega(t, s), lambda_omega(t, s, conjugate=True)
        for nu in matrix_unit_functionals(n):
            expect = np.trace(nu.T @ lb) * lo
            worst = max(worst, opnorm(quantize(t, nu, lam) - expect))
    return worst


def twisted_fourier_product(t: TwistedGroupAlgebra, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """(f₁⋆_Ω f₂)(r) = Σ_{st=r} f₁(s) f₂(t) conj(Ω(s,t))."""
    gamma = t.q.group
    table = cocycle_table(t.cocycle)
    n = t.n
    out = np.zeros(n, dtype=complex)
    for s in range(n):
        for u in range(n):
            out[gamma.mul(s, u)] += f1[s] * f2[u] * np.conj(table[s, u])
    return out


def pi_omega(t: TwistedGroupAlgebra, f: np.ndarray) -> np.ndarray:
    """π_Ω(f) = (f⊗ι)(ŴΩ*) with f a function on Γ read as a functional on ℓ∞(Γ)."""
    return t.pi(np.diag(np.asarray(f, dtype=complex)))


def fourier_report(t: TwistedGroupAlgebra, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    n = t.n
    r = Report(f"fourier[{t.cocycle.label}]")
    basis = np.eye(n)
    rep = max(opnorm(pi_omega(t, a) @ pi_omega(t, b) - pi_omega(t, twisted_fourier_product(t, a, b)))
              for a in basis for b in basis)
    r.add("pi_Omega representation", "pi_Omega(f1) pi_Omega(f2) = pi_Omega(f1 *_Omega f2)", rep, tol)
    assoc = max(np.abs(twisted_fourier_product(t, twisted_fourier_product(t, a, b), c)
                       - twisted_fourier_product(t, a, twisted_fourier_product(t, b, c))).max()
                for a in basis for b in basis for c in basis)
    r.add("associativity", "f1 *_Omega f2 = (f1⊗f2)(Dhat(.)Omega*) is associative", float(assoc), tol)
    img = OperatorSpan([pi_omega(t, a) for a in basis], dim=n)
    r.add("pi_Omega image *-closed", "pi_Omega(A(G)) is self-adjoint for finite groups", img.adjoint_defect(), tol_span)
    r.add("pi_Omega image", "pi_Omega(A(G)) spans C*_r(Ghat;Omega)", img.distance(t.span), tol_span)
    return r


# ---------------------------------------------------------------------------
# regularity and averaging


def regularity_check(t: TwistedGroupAlgebra, tol_span: float = TOL_SPAN) -> Report:
    n = t.n
    q = t.q
    r = Report(f"regularity[{t.cocycle.label}]")
    jmj = [q.J_hat.conjugate(y) for y in q.M_hat.basis()]
    prod = OperatorSpan([x @ y for x in t.span.basis() for y in jmj], dim=n)
    r.notes["product_span_dim"] = prod.dim
    r.add("regular", "[C*_r(Ghat;Omega) J_hat C(Ghat) J_hat] = K", float(n * n - prod.dim), 0.0)
    units = matrix_unit_functionals(n)
    t_op = t.cocycle.what_omega_star
    kk = OperatorSpan([np.kron(a, np.eye(n)) @ t_op @ np.kron(np.eye(n), b) for a in units for b in units], dim=n * n)
    r.notes["kwk_span_dim"] = kk.dim
    r.add("(K⊗1) W_hat Omega* (1⊗K) spans K⊗K", "(K⊗1) W_hat Omega* (1⊗K) in K⊗K", float(n ** 4 - kk.dim), 0.0)
    return r


class PositivityError(ValueError):
    pass


def haar_density(q) -> np.ndarray:
    """ρ with Tr(ρᵀa) = ⟨aξ₀, ξ₀⟩."""
    return np.outer(np.conj(q.xi0), q.xi0)


def average(t: TwistedGroupAlgebra, x: np.ndarray, tol: float = TOL_IDENTITY) -> tuple[complex, float]:
    """(ι⊗φ)β(x) = φ̃(x)·1 for positive x; returns φ̃(x) and the distance from scalars."""
    herm = (x + dagger(x)) / 2
    if np.linalg.eigvalsh(herm).min() < -tol:
        raise PositivityError("average needs a positive element")
    y = t.beta_at(x, haar_density(t.q))
    s = np.trace(y) / t.n
    return complex(s), opnorm(y - s * np.eye(t.n))


def point_sum(t: TwistedGroupAlgebra, x: np.ndarray) -> tuple[complex, float]:
    """Σ_g (ι⊗ev_g)β(x) over the points of a commutative L^∞(G)."""
    y = sum(t.beta_at(x, t.q.evaluation(p)) for p in t.q.points)
    s = np.trace(y) / t.n
    return complex(s), opnorm(y - s * np.eye(t.n))
