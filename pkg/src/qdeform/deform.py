"""Actions of finite quantum groups, crossed products and Ω-deformations.

Every operator algebra here is a finite span of matrices.  A left action
α of G on A ⊆ B(H_A) is stored through its values on an orthobasis of A and
extended linearly; the shipped systems also carry a unitary Z on H ⊗ H_A
with α(a) = Z*(1⊗a)Z, which makes leg computations cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cocycles import (
    DualCocycle,
    coboundary_twist,
    cocycle_on_deformed,
    product_cocycle,
    verify_cocycle,
)
from .fqg import FiniteQuantumGroup
from .report import Report
from .tensorkit import (
    RANK_RTOL,
    TOL_IDENTITY,
    TOL_SPAN,
    HilbertSpace,
    OperatorSpan,
    blocks,
    conj_on_legs,
    dagger,
    flip,
    matrix_unit,
    opnorm,
    place,
)
from .twisted import TwistedGroupAlgebra, build_twisted_algebra


class ActionError(ValueError):
    """A proposed action violates one of its defining identities."""


def _ad(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    return u @ x @ dagger(u)


def _coords_rank(vectors: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if vectors.size == 0:
        return 0
    s = np.linalg.svd(vectors, compute_uv=False)
    return int((s > rtol * max(s[0], 1e-300)).sum()) if s.size else 0


def k_tensor_check(images: Sequence[np.ndarray], n: int, inner: OperatorSpan) -> tuple[float, int]:
    """Compare span(images) with K ⊗ inner, K = B(C^n) on the first leg.

    Returns the largest relative residual of a first-leg block outside
    ``inner`` and the rank of the images.  Residual zero and rank
    n²·dim(inner) together mean the spans coincide.
    """
    worst = 0.0
    rows = []
    for x in images:
        bl = blocks(x, n)
        coords = []
        scale = max(np.linalg.norm(x), 1.0)
        for b in bl:
            c = inner.coordinates(b)
            r = np.linalg.norm(b.ravel() - inner.q @ c)
            worst = max(worst, float(r / scale))
            coords.append(c)
        rows.append(np.concatenate(coords))
    rank = _coords_rank(np.array(rows).T) if rows else 0
    return worst, rank


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True, eq=False)
class GSystem:
    """A left action α of G on a unital *-algebra A ⊆ B(H_A)."""

    q: FiniteQuantumGroup
    H_A: HilbertSpace
    A_span: OperatorSpan
    alpha_images: tuple
    name: str = "system"
    Z: np.ndarray | None = None
    # Z acts on H and the first factor (of this dimension) of H_A = C^m ⊗ C^r
    z_dim: int = 0

    @property
    def n(self) -> int:
        return self.q.n

    @property
    def dA(self) -> int:
        return self.H_A.dim

    @cached_property
    def basis(self) -> list[np.ndarray]:
        return self.A_span.basis()

    def alpha(self, a: np.ndarray) -> np.ndarray:
        """Linear extension of α from the orthobasis of A."""
        c = self.A_span.coordinates(a)
        return np.tensordot(c, self._alpha_stack, axes=(0, 0))

    @cached_property
    def _alpha_stack(self) -> np.ndarray:
        return np.array(self.alpha_images)

    @cached_property
    def alpha_span(self) -> OperatorSpan:
        return OperatorSpan(self.alpha_images, dim=self.n * self.dA)

    def iota_alpha(self, x: np.ndarray) -> np.ndarray:
        """(ι⊗α)(x) for x on (L, H_A); the result lives on (L, H, H_A)."""
        m = x.shape[0] // self.dA
        if self.Z is not None:
            zm = self.z_dim or self.dA
            dims = [m, self.n, zm, self.dA // zm]
            return conj_on_legs(dagger(self.Z), place(x, [0, 2, 3], dims), [1, 2], dims)
        t = x.reshape(m, self.dA, m, self.dA)
        out = np.zeros((m * self.n * self.dA,) * 2, dtype=complex)
        for i in range(m):
            for j in range(m):
                out += np.kron(matrix_unit(i, j, m), self.alpha(t[i, :, j, :]))
        return out

    def delta_iota(self, y: np.ndarray) -> np.ndarray:
        """(Δ⊗ι)(y) = W*₁₂ y₂₃ W₁₂ for y on (H, H_A)."""
        dims = [self.n, self.n, self.dA]
        return conj_on_legs(dagger(self.q.W), place(y, [1, 2], dims), [0, 1], dims)

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        q, n = self.q, self.n
        b = self.basis
        r = Report(f"system[{self.name}]")
        r.add("A is *-closed", "A unital *-algebra", self.A_span.adjoint_defect(), tol_span)
        r.add("A is product-closed", "A unital *-algebra", self.A_span.product_defect(), tol_span)
        r.add("alpha injective", "dim alpha(A) = dim A", float(abs(self.alpha_span.dim - self.A_span.dim)), 0.0)
        hom = max(opnorm(self.alpha(x @ y) - self.alpha(x) @ self.alpha(y)) for x in b for y in b)
        r.add("alpha multiplicative", "alpha(ab) = alpha(a)alpha(b)", hom, tol)
        star = max(opnorm(self.alpha(dagger(x)) - dagger(self.alpha(x))) for x in b)
        r.add("alpha *-preserving", "alpha(a*) = alpha(a)*", star, tol)
        unit = opnorm(self.alpha(np.eye(self.dA)) - np.eye(n * self.dA))
        r.add("alpha unital", "alpha(1) = 1", unit, tol)
        ma = OperatorSpan([np.kron(m, a) for m in q.M.basis() for a in b], dim=n * self.dA)
        r.add("alpha lands in M⊗A", "alpha(A) ⊆ M(C0(G)⊗A)", max(ma.residual(x) for x in self.alpha_images), tol_span)
        co = max(opnorm(self.iota_alpha(x) - self.delta_iota(x)) for x in self.alpha_images)
        r.add("coaction law", "(i⊗alpha)alpha = (Delta⊗i)alpha", co, tol)
        cancel = OperatorSpan([np.kron(m, np.eye(self.dA)) @ x for m in q.M.basis() for x in self.alpha_images],
                              dim=n * self.dA)
        r.add("cancellation", "[(C0(G)⊗1)alpha(A)] = C0(G)⊗A", cancel.distance(ma), tol_span)
        r.notes["dim_A"] = self.A_span.dim
        return r


def _require_valid(r: Report, what: str) -> None:
    if not r.passed:
        bad = r.failures()[0]
        raise ActionError(f"{what}: {bad.name} defect {bad.defect:.3e} exceeds {bad.tolerance:.1e}")


def system_from_unitary(q: FiniteQuantumGroup, A_span: OperatorSpan, Z: np.ndarray, name: str,
                        z_dim: int = 0) -> GSystem:
    """α(a) = Z*(1⊗a)Z on the given algebra.

    With ``z_dim = m`` the unitary ``Z`` acts on H ⊗ C^m only, where
    H_A = C^m ⊗ C^r, and is extended by the identity on C^r.
    """
    dA = A_span.ambient_dim
    zm = z_dim or dA
    if dA % zm or Z.shape != (q.n * zm, q.n * zm):
        raise ActionError(f"implementing unitary has shape {Z.shape}, expected {(q.n * zm,) * 2}")
    dims = [q.n, zm, dA // zm]
    imgs = tuple(conj_on_legs(dagger(Z), np.kron(np.eye(q.n), a), [0, 1], dims) for a in A_span.basis())
    return GSystem(q, HilbertSpace(dA, "A"), A_span, imgs, name, Z, z_dim)


def _star_closure(gens: list[np.ndarray], imgs: list[np.ndarray], dim: int) -> tuple[list, list]:
    """Unital *-algebra generated by ``gens``, carrying images along products."""
    elems: list[np.ndarray] = []
    images: list[np.ndarray] = []
    span = OperatorSpan([], dim=dim)

    def add(x, ax):
        nonlocal span
        if span.residual(x) > 1e3 * RANK_RTOL * max(1.0, np.linalg.norm(x)):
            elems.append(x)
            images.append(ax)
            span = OperatorSpan(elems, dim=dim)
            return True
        return False

    add(np.eye(dim, dtype=complex), None)
    for g, ag in zip(gens, imgs):
        add(g, ag)
        add(dagger(g), dagger(ag))
    grew = True
    while grew:
        grew = False
        cur = list(zip(elems, images))
        for x, ax in cur:
            for y, ay in cur:
                if ax is None or ay is None:
                    continue
                grew |= add(x @ y, ax @ ay)
    return elems, images


def make_gsystem(q: FiniteQuantumGroup, H_A: HilbertSpace, A_generators: Sequence[np.ndarray],
                 alpha_table: Sequence[np.ndarray] | Callable[[np.ndarray], np.ndarray],
                 name: str = "system", tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> GSystem:
    """Build and validate a system from α on generators of A.

    α is extended multiplicatively to the *-algebra generated by the
    generators; any inconsistency shows up as a failed invariant.
    """
    gens = [np.asarray(g, dtype=complex) for g in A_generators]
    if callable(alpha_table):
        imgs = [np.asarray(alpha_table(g), dtype=complex) for g in gens]
    else:
        imgs = [np.asarray(x, dtype=complex) for x in alpha_table]
    if len(imgs) != len(gens):
        raise ActionError("alpha_table must give one image per generator")
    d = H_A.dim
    for g, x in zip(gens, imgs):
        if g.shape != (d, d) or x.shape != (q.n * d, q.n * d):
            raise ActionError("generator or image has the wrong shape")
    elems, images = _star_closure(gens, imgs, d)
    images[0] = np.eye(q.n * d, dtype=complex)
    span = OperatorSpan(elems, dim=d)
    e = np.array([x.ravel() for x in elems]).T
    coef = np.linalg.lstsq(e, span.q, rcond=None)[0]
    stack = np.array(images)
    basis_images = tuple(np.tensordot(coef[:, k], stack, axes=(0, 0)) for k in range(span.dim))
    s = GSystem(q, H_A, span, basis_images, name)
    _require_valid(s.report(tol, tol_span), f"system {name!r}")
    return s


def translation_system(q: FiniteQuantumGroup) -> GSystem:
    """A = C(G) with α = Δ."""
    return system_from_unitary(q, q.M, q.W, "translation")


def trivial_system(q: FiniteQuantumGroup) -> GSystem:
    """A = C with the unit embedding."""
    return system_from_unitary(q, OperatorSpan([np.ones((1, 1))], dim=1), np.eye(q.n, dtype=complex), "trivial")


def full_matrix_system(q: FiniteQuantumGroup) -> GSystem:
    """A = B(ℓ²G) with α(a) = W*(1⊗a)W."""
    n = q.n
    units = [matrix_unit(i, j, n) for i in range(n) for j in range(n)]
    return system_from_unitary(q, OperatorSpan(units, dim=n), q.W, "full")


# ---------------------------------------------------------------------------
# actions of Ĝ^op and their crossed products


@dataclass(frozen=True, eq=False)
class OpSystem:
    """A left action γ(b) = Zγ*(1⊗b)Zγ of Ĝ^op on B ⊆ B(H_B)."""

    q: FiniteQuantumGroup
    B_span: OperatorSpan
    Z: np.ndarray
    name: str = "op-system"

    @property
    def dB(self) -> int:
        return self.B_span.ambient_dim

    def gamma(self, b: np.ndarray) -> np.ndarray:
        return dagger(self.Z) @ np.kron(np.eye(self.q.n), b) @ self.Z

    @cached_property
    def gamma_images(self) -> list[np.ndarray]:
        return [self.gamma(b) for b in self.B_span.basis()]

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        q, n, d = self.q, self.q.n, self.dB
        r = Report(f"op-system[{self.name}]")
        mb = OperatorSpan([np.kron(m, b) for m in q.M_hat.basis() for b in self.B_span.basis()], dim=n * d)
        r.add("gamma lands in M_hat⊗B", "gamma(B) ⊆ M(C0(Ghat)⊗B)", max(mb.residual(x) for x in self.gamma_images), tol_span)
        dims = [n, n, d]
        worst = 0.0
        for x in self.gamma_images:
            lhs = conj_on_legs(dagger(self.Z), place(x, [0, 2], dims), [1, 2], dims)
            rhs = conj_on_legs(q.W, place(x, [0, 2], dims), [0, 1], dims)
            worst = max(worst, opnorm(lhs - rhs))
        r.add("coaction law", "(i⊗gamma)gamma = (Dhat^op⊗i)gamma with Dhat^op(x) = W(x⊗1)W*", worst, tol)
        cancel = OperatorSpan([np.kron(m, np.eye(d)) @ x for m in q.M_hat.basis() for x in self.gamma_images], dim=n * d)
        r.add("cancellation", "[(C0(Ghat)⊗1)gamma(B)] = C0(Ghat)⊗B", cancel.distance(mb), tol_span)
        return r


def op_trivial(q: FiniteQuantumGroup) -> OpSystem:
    return OpSystem(q, OperatorSpan([np.ones((1, 1))], dim=1), np.eye(q.n, dtype=complex), "C")


def op_translation(q: FiniteQuantumGroup) -> OpSystem:
    """B = L^∞(Ĝ) with γ = Δ̂^op, i.e. Zγ = ΣW*."""
    return OpSystem(q, q.M_hat, q.sigma @ dagger(q.W), "Mhat")


def _y_dual(q: FiniteQuantumGroup, w: np.ndarray, dB: int) -> np.ndarray:
    """(1⊗JĴ⊗1)(w⊗1)(1⊗ĴJ⊗1) on (H, H, H_B)."""
    n = q.n
    left = np.kron(np.kron(np.eye(n), q.J_J_hat), np.eye(dB))
    right = np.kron(np.kron(np.eye(n), q.J_hat_J), np.eye(dB))
    return left @ np.kron(w, np.eye(dB)) @ right


def dual_crossed_system(ops: OpSystem) -> GSystem:
    """Ĝ^op ⋉ B = [(JMJ⊗1)γ(B)] with its dual action of G."""
    q, n, d = ops.q, ops.q.n, ops.dB
    jmj = [q.J.conjugate(m) for m in q.M.basis()]
    span = OperatorSpan([np.kron(m, np.eye(d)) @ g for m in jmj for g in ops.gamma_images], dim=n * d)
    y = _y_dual(q, dagger(q.W), d)
    return system_from_unitary(q, span, dagger(y), f"dual-{ops.name}")


@dataclass(frozen=True, eq=False)
class TwistedCrossedProduct:
    ops: OpSystem
    t: TwistedGroupAlgebra
    span: OperatorSpan
    right_span: OperatorSpan

    def action_unitary(self) -> np.ndarray:
        """(1⊗JĴ⊗1)(W_Ω*⊗1)(1⊗ĴJ⊗1)."""
        return _y_dual(self.ops.q, dagger(self.t.data.W_omega), self.ops.dB)

    def action(self, x: np.ndarray) -> np.ndarray:
        return _ad(self.action_unitary(), np.kron(np.eye(self.ops.q.n), x))

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        q, n, d = self.ops.q, self.ops.q.n, self.ops.dB
        data = self.t.data
        qo = data.quantum_group
        r = Report(f"twisted-crossed-product[{self.ops.name},{self.t.cocycle.label}]")
        r.add("one-sided span", "[(J Jhat C Jhat J⊗1)alpha(A)] = [alpha(A)(J Jhat C Jhat J⊗1)]",
              self.span.distance(self.right_span), tol_span)
        r.add("*-closed", "twisted crossed product is a *-algebra", self.span.adjoint_defect(), tol_span)
        r.add("product-closed", "twisted crossed product is an algebra", self.span.product_defect(), tol_span)
        imgs = [self.action(x) for x in self.span.basis()]
        target = OperatorSpan([np.kron(m, x) for m in qo.M.basis() for x in self.span.basis()], dim=n * n * d)
        r.add("action lands in C(G_Omega)⊗B", "action of G_Omega on the twisted crossed product",
              max(target.residual(x) for x in imgs), tol_span)
        yu = self.action_unitary()
        dims = [n, n, n * d]
        worst = 0.0
        for x in imgs:
            lhs = conj_on_legs(yu, place(x, [0, 2], dims), [1, 2], dims)
            rhs = conj_on_legs(dagger(data.W_omega), place(x, [1, 2], dims), [0, 1], dims)
            worst = max(worst, opnorm(lhs - rhs))
        r.add("action coaction law", "(i⊗a)a = (Delta_Omega⊗i)a with Delta_Omega(x) = W_Omega*(1⊗x)W_Omega", worst, tol)
        r.notes["dim"] = self.span.dim
        return r


def twisted_crossed_product(ops: OpSystem, c: DualCocycle, t: TwistedGroupAlgebra | None = None) -> TwistedCrossedProduct:
    """Ĝ^op ⋉_{γ,Ω} B generated by (JĴ C*_r(Ĝ;Ω) ĴJ ⊗ 1)γ(B)."""
    q, d = ops.q, ops.dB
    t = t or build_twisted_algebra(c)
    left = [q.J_J_hat @ x @ q.J_hat_J for x in t.span.basis()]
    a = [np.kron(x, np.eye(d)) for x in left]
    span = OperatorSpan([x @ g for x in a for g in ops.gamma_images], dim=q.n * d)
    right = OperatorSpan([g @ x for x in a for g in ops.gamma_images], dim=q.n * d)
    return TwistedCrossedProduct(ops, t, span, right)


# ---------------------------------------------------------------------------
# crossed product by G


@dataclass(frozen=True, eq=False)
class CrossedProduct:
    system: GSystem
    span: OperatorSpan

    @cached_property
    def generators(self) -> list[np.ndarray]:
        """M̂⊗1 and α(A); they generate the crossed product as an algebra."""
        s = self.system
        return [np.kron(m, np.eye(s.dA)) for m in s.q.M_hat.basis()] + list(s.alpha_images)

    def dual_action(self, x: np.ndarray) -> np.ndarray:
        """α̂(x) = (Ŵ^op⊗1)*(1⊗x)(Ŵ^op⊗1)."""
        s = self.system
        dims = [s.n, s.n, s.dA]
        return conj_on_legs(dagger(s.q.W_hat_op), place(x, [1, 2], dims), [0, 1], dims)

    def double_generators(self) -> list[np.ndarray]:
        """(JmJ⊗1⊗1)α̂(y) over m ∈ C(G), y in the crossed product."""
        s = self.system
        q = s.q
        imgs = [self.dual_action(y) for y in self.span.basis()]
        out = []
        for m in q.M.basis():
            jm = np.kron(q.J.conjugate(m), np.eye(s.n * s.dA))
            out.extend(jm @ y for y in imgs)
        return out

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        s = self.system
        q, n, d = s.q, s.n, s.dA
        r = Report(f"crossed-product[{s.name}]")
        r.add("*-closed", "[(C0(Ghat)⊗1)alpha(A)] is a *-algebra", self.span.adjoint_defect(), tol_span)
        r.add("product-closed", "[(C0(Ghat)⊗1)alpha(A)] is an algebra", self.span.product_defect(), tol_span)
        dims = [n, n, d]
        mhat = q.M_hat.basis()
        r.add("dual action on alpha(A)", "alpha_hat(alpha(a)) = 1⊗alpha(a)",
              max(opnorm(self.dual_action(x) - np.kron(np.eye(n), x)) for x in s.alpha_images), tol)
        r.add("dual action on C0(Ghat)", "alpha_hat(x⊗1) = Dhat^op(x)⊗1",
              max(opnorm(self.dual_action(np.kron(m, np.eye(d))) - np.kron(q.delta_hat_op(m), np.eye(d))) for m in mhat),
              tol)
        # coaction law on algebra generators; both sides are homomorphisms
        d4 = [n, n, n, d]
        worst = 0.0
        for g in self.generators:
            a = self.dual_action(g)
            lhs = conj_on_legs(dagger(q.W_hat_op), place(a, [0, 2, 3], d4), [1, 2], d4)
            rhs = conj_on_legs(q.W, place(a, [0, 2, 3], d4), [0, 1], d4)
            worst = max(worst, opnorm(lhs - rhs))
        r.add("dual action coaction law", "(i⊗alpha_hat)alpha_hat = (Dhat^op⊗i)alpha_hat", worst, tol)
        res, rank = self.takesaki_takai()
        r.add("Takesaki-Takai blocks", "Ad(W*⊗1) double crossed product ⊆ K⊗alpha(A)", res, tol_span)
        r.add("Takesaki-Takai dimension", "dim = dim(K)·dim(A)", float(abs(rank - n * n * s.A_span.dim)), 0.0)
        tres, trank = k_tensor_check(
            [np.kron(matrix_unit(i, j, n), np.eye(n * d)) @ s.iota_alpha(x)
             for i in range(n) for j in range(n) for x in s.alpha_images], n, s.alpha_span)
        r.add("K(i⊗alpha)alpha(A) = K⊗alpha(A)", "[(K⊗1)(i⊗alpha)alpha(A)] = K⊗alpha(A)",
              max(tres, float(abs(trank - n * n * s.A_span.dim))), tol_span)
        r.notes["dim"] = self.span.dim
        r.notes["double_dim"] = rank
        return r

    def takesaki_takai(self) -> tuple[float, int]:
        s = self.system
        w = np.kron(dagger(s.q.W), np.eye(s.dA))
        return k_tensor_check([_ad(w, x) for x in self.double_generators()], s.n, s.alpha_span)


def crossed_product(s: GSystem) -> CrossedProduct:
    """G ⋉ A = [(C(Ĝ)⊗1)α(A)]."""
    span = OperatorSpan([np.kron(m, np.eye(s.dA)) @ x for m in s.q.M_hat.basis() for x in s.alpha_images],
                        dim=s.n * s.dA)
    return CrossedProduct(s, span)


# ---------------------------------------------------------------------------
# deformation


@dataclass(frozen=True, eq=False)
class DeformedAlgebra:
    base: GSystem
    c: DualCocycle
    t: TwistedGroupAlgebra
    span: OperatorSpan
    quant_images: tuple

    @property
    def n(self) -> int:
        return self.base.n

    @cached_property
    def eta_unitary(self) -> np.ndarray:
        """(Ŵ_ΩΩ)₂₁."""
        s = flip(self.n)
        return s @ self.t.data.what_omega_omega @ s

    def eta(self, y: np.ndarray) -> np.ndarray:
        """η_Ω(y) = (Ŵ_ΩΩ)₂₁(1⊗y)(Ŵ_ΩΩ)*₂₁ for y on (H, H_A)."""
        dims = [self.n, self.n, self.base.dA]
        return conj_on_legs(self.eta_unitary, place(y, [1, 2], dims), [0, 1], dims)

    def beta_iota(self, x: np.ndarray) -> np.ndarray:
        """(β⊗ι)(x) on legs (C, M, A)."""
        dims = [self.n, self.n, self.base.dA]
        return conj_on_legs(self.t.U, place(x, [1, 2], dims), [0, 1], dims)

    def fixed_point_defect(self) -> float:
        return max((opnorm(self.beta_iota(x) - self.base.iota_alpha(x)) for x in self.span.basis()), default=0.0)

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        s = self.base
        r = Report(f"deformation[{s.name},{self.c.label}]")
        r.add("*-closed", "A_Omega = [(T_nu⊗i)alpha(A)] is self-adjoint", self.span.adjoint_defect(), tol_span)
        r.add("product-closed", "A_Omega = [(T_nu⊗i)alpha(A)] is an algebra", self.span.product_defect(), tol_span)
        ca = OperatorSpan([np.kron(x, a) for x in self.t.span.basis() for a in s.basis], dim=self.n * s.dA)
        r.add("lands in C⊗A", "A_Omega ⊆ M(C*_r(Ghat;Omega)⊗A)", max(ca.residual(x) for x in self.span.basis()), tol_span)
        r.add("fixed points", "(beta⊗i)(x) = (i⊗alpha)(x) on A_Omega", self.fixed_point_defect(), tol)
        r.notes["dim_A"] = s.A_span.dim
        r.notes["dim_A_Omega"] = self.span.dim
        return r


def deform(s: GSystem, c: DualCocycle, t: TwistedGroupAlgebra | None = None) -> DeformedAlgebra:
    """A_Ω spanned by (T_ν⊗ι)α(a), ν over matrix units and a over the basis of A."""
    if c.q is not s.q and opnorm(c.q.W - s.q.W) > TOL_IDENTITY:
        raise ActionError("cocycle and system live on different quantum groups")
    t = t or build_twisted_algebra(c)
    n = s.n
    dims = [n, n, s.dA]
    u = flip(n) @ t.data.what_omega_omega @ flip(n)
    etas = [conj_on_legs(u, place(x, [1, 2], dims), [0, 1], dims) for x in s.alpha_images]
    per_a = [blocks(e, n) for e in etas]
    images = tuple(per_a[k][nu] for nu in range(n * n) for k in range(len(per_a)))
    span = OperatorSpan(images, dim=n * s.dA)
    d = DeformedAlgebra(s, c, t, span, images)
    if d.span.adjoint_defect() > TOL_SPAN:
        raise ActionError(f"A_Omega for {s.name!r} is not *-closed; conventions are inconsistent")
    return d


def deformed_action(d: DeformedAlgebra) -> GSystem:
    """α_Ω(x) = (W_Ω*⊗1)(1⊗x)(W_Ω⊗1), an action of G_Ω on A_Ω."""
    data = d.t.data
    return system_from_unitary(data.quantum_group, d.span, data.W_omega, f"{d.base.name}_{d.c.label}", z_dim=d.n)


# ---------------------------------------------------------------------------
# fixed points


@dataclass
class FixedPoints:
    solved: OperatorSpan
    averaged: OperatorSpan | None
    report: Report


def _ca_basis(t: TwistedGroupAlgebra, s: GSystem) -> tuple[list, list]:
    return t.span.basis(), s.basis


def fixed_point_algebra(d: DeformedAlgebra, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> FixedPoints:
    """Diagonal fixed points {x ∈ C⊗A : (β⊗ι)(x) = (ι⊗α)(x)}.

    Always by a linear solve; when C(G) is commutative also by averaging
    β_g⊗α_g⁻¹ over the points g of G.
    """
    s, t = d.base, d.t
    n, dA = s.n, s.dA
    cb, ab = _ca_basis(t, s)
    betas = [t.beta(c) for c in cb]
    cols = []
    for c, bc in zip(cb, betas):
        for a, xa in zip(ab, s.alpha_images):
            lhs = np.kron(bc, a)
            rhs = np.kron(c, xa)
            cols.append((lhs - rhs).ravel())
    m = np.array(cols).T
    _, sv, vh = np.linalg.svd(m, full_matrices=False)
    cut = RANK_RTOL * max(sv[0] if sv.size else 0.0, 1.0)
    rank = int((sv > cut).sum())
    null = dagger(vh[rank:])
    if len(cols) > len(sv):
        raise np.linalg.LinAlgError("fixed-point system has more unknowns than equations")
    products = [np.kron(c, a) for c in cb for a in ab]
    pstack = np.array(products)
    solved = OperatorSpan([np.tensordot(null[:, k], pstack, axes=(0, 0)) for k in range(null.shape[1])],
                          dim=n * dA) if null.shape[1] else OperatorSpan([], dim=n * dA)

    r = Report(f"fixed-points[{s.name},{d.c.label}]")
    r.add("linear solve equals A_Omega", "A_Omega = (C*_r(Ghat;Omega)⊗A)^(beta⊗alpha)", solved.distance(d.span), tol_span)
    averaged = None
    if s.q.is_commutative:
        pts = [s.q.evaluation(p) for p in s.q.points]
        dc, da = len(cb), len(ab)
        e = np.zeros((dc * da, dc * da), dtype=complex)
        cspan, aspan = t.span, s.A_span
        for rho in pts:
            bg = np.array([cspan.coordinates(t.beta_at(c, rho)) for c in cb]).T
            ag = np.array([aspan.coordinates(_slice_first(s, x, rho)) for x in s.alpha_images]).T
            e += np.kron(bg, np.linalg.inv(ag))
        e /= len(pts)
        r.add("averaging map idempotent", "psi_(beta⊗alpha) is a projection", opnorm(e @ e - e), tol)
        uu, sv2, _ = np.linalg.svd(e)
        k = int((sv2 > 0.5).sum())
        averaged = OperatorSpan([np.tensordot(uu[:, j], pstack, axes=(0, 0)) for j in range(k)], dim=n * dA) \
            if k else OperatorSpan([], dim=n * dA)
        r.add("averaging equals A_Omega", "A_Omega = image of the averaging map", averaged.distance(d.span), tol_span)
        r.notes["points"] = len(pts)
    else:
        r.notes["averaging"] = "skipped: C(G) is not commutative"
    r.notes["dim"] = solved.dim
    return FixedPoints(solved, averaged, r)


def _slice_first(s: GSystem, x: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """(ev⊗ι)(x) for x on (H, H_A)."""
    t = x.reshape(s.n, s.dA, s.n, s.dA)
    return np.einsum("iajb,ij->ab", t, rho)


# ---------------------------------------------------------------------------
# theorem verifiers


def verify_ttwisted(d: DeformedAlgebra, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """Twisted double crossed product against K⊗A_Ω via the explicit unitary."""
    s, t = d.base, d.t
    q, n, dA = s.q, s.n, s.dA
    data = t.data
    jxj = q.J_hat.conjugate(data.X)
    left = np.kron(dagger(jxj), np.eye(n * dA))
    right = np.kron(jxj, np.eye(n * dA))
    u = left @ np.kron(d.eta_unitary, np.eye(dA)) @ right
    r = Report(f"ttwisted[{s.name},{d.c.label}]")
    r.add("U unitary", "U = (Jhat X* Jhat⊗1⊗1)(W_hat_Omega Omega)_21(Jhat X Jhat⊗1⊗1)",
          opnorm(u @ dagger(u) - np.eye(u.shape[0])), tol)
    jcj = [q.J_J_hat @ x @ q.J_hat_J for x in t.span.basis()]
    a = max(opnorm(_ad(u, np.kron(x, np.eye(n * dA))) - np.kron(x, np.eye(n * dA))) for x in jcj)
    r.add("(a) fixes J Jhat C Jhat J", "Ad U trivial on J Jhat C*_r(Ghat;Omega) Jhat J⊗1⊗1", a, tol)
    b = max(opnorm(_ad(u, np.kron(q.delta_hat_op(x), np.eye(dA))) - np.kron(x, np.eye(n * dA)))
            for x in q.M_hat.basis())
    r.add("(b) Dhat^op(x)⊗1 -> x⊗1⊗1", "Ad U(Dhat^op(x)⊗1) = x⊗1⊗1", b, tol)
    c_def = max(opnorm(_ad(u, np.kron(np.eye(n), x)) - _ad(left, d.eta(x))) for x in s.alpha_images)
    r.add("(c) 1⊗alpha(a) -> Ad(Jhat X* Jhat) eta_Omega", "Ad U(1⊗alpha(a)) = Ad(Jhat X* Jhat⊗1⊗1) eta_Omega(alpha(a))",
          c_def, tol)
    # generators of the twisted double crossed product
    cp = crossed_product(s)
    dual = [cp.dual_action(y) for y in cp.span.basis()]
    images = []
    for x in jcj:
        xx = np.kron(x, np.eye(n * dA))
        images.extend(_ad(u, xx @ y) for y in dual)
    res, rank = k_tensor_check(images, n, d.span)
    want = n * n * d.span.dim
    r.add("(d) image inside K⊗A_Omega", "Ad U maps the twisted double crossed product into K⊗A_Omega", res, tol_span)
    r.add("(d) image dimension", "dim = dim(K)·dim(A_Omega)", float(abs(rank - want)), 0.0)
    r.notes["double_dim"] = rank
    return r


def verify_dual_action_case(ops: OpSystem, c: DualCocycle, t: TwistedGroupAlgebra | None = None,
                            tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """(Ĝ^op⋉B)_Ω against 1⊗(Ĝ^op⋉_Ω B)."""
    q, n, dB = ops.q, ops.q.n, ops.dB
    t = t or build_twisted_algebra(c)
    s = dual_crossed_system(ops)
    d = deform(s, c, t)
    tcp = twisted_crossed_product(ops, c, t)
    w21 = flip(n) @ dagger(c.what_omega_star) @ flip(n)
    v = _y_dual(q, w21, dB)
    lhs = OperatorSpan([_ad(v, x) for x in d.span.basis()], dim=n * n * dB)
    rhs = OperatorSpan([np.kron(np.eye(n), x) for x in tcp.span.basis()], dim=n * n * dB)
    r = Report(f"dual-action-case[{ops.name},{c.label}]")
    r.add("deformation = twisted crossed product",
          "Ad((1⊗J Jhat⊗1)(W_hat Omega*)*_21(1⊗Jhat J⊗1)) maps A_Omega onto 1⊗(Ghat^op ⋉_Omega B)",
          lhs.distance(rhs), tol_span)
    comm = max(opnorm(v @ np.kron(np.eye(n), g) - np.kron(np.eye(n), g) @ v) for g in ops.gamma_images)
    r.add("unitary commutes with 1⊗gamma(B)", "(1⊗J Jhat⊗1)(W_hat Omega*)*_21(1⊗Jhat J⊗1) commutes with 1⊗gamma(B)",
          comm, tol)
    r.notes["dim_A_Omega"] = d.span.dim
    r.notes["dim_twisted_crossed_product"] = tcp.span.dim
    return r


def _theta(w: np.ndarray, x: np.ndarray, n: int, dA: int) -> np.ndarray:
    """w₂₁(1⊗x)w₂₁* for x on (H, H_A)."""
    dims = [n, n, dA]
    s = flip(n)
    return conj_on_legs(s @ w @ s, place(x, [1, 2], dims), [0, 1], dims)


def verify_stages(s: GSystem, c: DualCocycle, c1: DualCocycle, d: DeformedAlgebra | None = None,
                  tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """A_{Ω₁Ω} against (A_Ω)_{Ω₁} for a cocycle Ω₁ on Ĝ_Ω."""
    n, dA = s.n, s.dA
    d = d or deform(s, c)
    s_om = deformed_action(d)
    d1 = deform(s_om, c1)
    cp = product_cocycle(c1, c)
    dp = deform(s, cp)
    r = Report(f"stages[{s.name},{c.label},{c1.label}]")
    rc = verify_cocycle(cp)
    r.add("product cocycle", "Omega_1 Omega is a cocycle on Ghat", max(ch.defect for ch in rc.checks), tol_span)
    w_om = d.t.data.W_hat_omega
    w_p = dp.t.data.W_hat_omega
    theta_w = w_om @ c1.omega_star
    imgs = [_theta(theta_w, x, n, dA) for x in dp.span.basis()]
    lhs = OperatorSpan(imgs, dim=n * n * dA)
    r.add("stages isomorphism", "x -> (W_hat_Omega Omega_1*)_21(1⊗x)(...)* maps A_(Omega_1 Omega) onto (A_Omega)_(Omega_1)",
          lhs.distance(d1.span), tol_span)
    dims = [n] * 3
    a = d.t.data.what_omega_omega
    a23 = place(a, [1, 2], dims)
    eco5 = opnorm(a23 @ place(w_p @ cp.omega, [0, 1], dims) @ dagger(a23)
                  - place(w_p @ c1.omega, [0, 1], dims) @ place(a, [0, 2], dims))
    r.add("identity ecocycle5",
          "(W_hat_Omega Omega)_23 (W_hat_(O1 O) O1 O)_12 (W_hat_Omega Omega)*_23 = (W_hat_(O1 O) O1)_12 (W_hat_Omega Omega)_13",
          eco5, tol)
    r.add("iterated deformed unitary", "W_hat of (G_Omega)_(Omega_1) = W_hat_(Omega_1 Omega)",
          opnorm(d1.t.data.W_hat_omega - w_p), tol)
    # equivariance on A_{Ω₁Ω}
    s_p = deformed_action(dp)
    s_1 = deformed_action(d1)
    d4 = [n, n, n, dA]
    sw = flip(n) @ theta_w @ flip(n)
    worst = 0.0
    for x, tx in zip(dp.span.basis(), imgs):
        ax = s_p.alpha(x)
        lhs_x = conj_on_legs(sw, place(ax, [0, 2, 3], d4), [1, 2], d4)
        rhs_x = s_1.alpha(tx)
        worst = max(worst, opnorm(lhs_x - rhs_x))
    r.add("stages equivariance", "(alpha_Omega)_(Omega_1) theta = (i⊗theta) alpha_(Omega_1 Omega)", worst, tol)
    r.notes["dim_A_Omega"] = d.span.dim
    r.notes["dim_stage"] = d1.span.dim
    return r


def verify_round_trip(s: GSystem, c: DualCocycle, d: DeformedAlgebra | None = None,
                      tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """Stages with Ω₁ = Ω*: (A_Ω)_{Ω*} = η_Ω α(A) and A_{Ω*Ω} = α(A)."""
    d = d or deform(s, c)
    c_star, rc = cocycle_on_deformed(c, d.t.data)
    r = verify_stages(s, c, c_star, d, tol, tol_span)
    r.suite = f"round-trip[{s.name},{c.label}]"
    r.extend(rc.checks, "inverse cocycle: ")
    trivial = product_cocycle(c_star, c)
    d0 = deform(s, trivial)
    r.add("A_1 = alpha(A)", "deformation by the trivial cocycle is alpha(A)", d0.span.distance(s.alpha_span), tol_span)
    s_om = deformed_action(d)
    d1 = deform(s_om, c_star)
    eta_span = OperatorSpan([d.eta(x) for x in s.alpha_images], dim=s.n * s.n * s.dA)
    r.add("(A_Omega)_(Omega*) = eta_Omega alpha(A)", "eta_Omega alpha is an isomorphism A -> (A_Omega)_(Omega*)",
          eta_span.distance(d1.span), tol_span)
    return r


def verify_cohomology_invariance(s: GSystem, c: DualCocycle, u: np.ndarray, d: DeformedAlgebra | None = None,
                                 tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """Ad(u⊗1): A_Ω → A_{Ω_u}, with A_{Ω_u} built from scratch."""
    n, dA = s.n, s.dA
    d = d or deform(s, c)
    cu = coboundary_twist(c, u)
    du = deform(s, cu)
    uu = np.kron(u, np.eye(dA))
    moved = OperatorSpan([_ad(uu, x) for x in d.span.basis()], dim=n * dA)
    r = Report(f"cohomology[{s.name},{c.label}]")
    r.add("Ad(u⊗1) A_Omega = A_(Omega_u)", "Ad(u⊗1) defines A_Omega ≅ A_(Omega_u)", moved.distance(du.span), tol_span)
    juj = s.q.J_hat.conjugate(u)
    big = np.kron(np.kron(juj, u), np.eye(dA))
    eta = max(opnorm(du.eta(x) - _ad(big, d.eta(x))) for x in s.alpha_images)
    r.add("eta_(Omega_u) = Ad(Jhat u Jhat⊗u⊗1) eta_Omega", "eta_(Omega_u) = Ad(Jhat u Jhat⊗u⊗1) eta_Omega on alpha(A)", eta, tol)
    return r


def verify_tva(d: DeformedAlgebra, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    """Crossed products before and after deformation, and the two dual actions."""
    s = d.base
    q, n, dA = s.q, s.n, s.dA
    data = d.t.data
    c = d.c
    cp = crossed_product(s)
    r = Report(f"tVa[{s.name},{c.label}]")
    mix = OperatorSpan([np.kron(m, np.eye(dA)) @ x for m in q.M_hat.basis() for x in d.span.basis()], dim=n * dA)
    r.add("G ⋉ A = [(C0(Ghat_Omega)⊗1)A_Omega]", "G ⋉_alpha A = [(C0(Ghat_Omega)⊗1)A_Omega]", mix.distance(cp.span), tol_span)
    om21 = flip(n) @ c.omega @ flip(n)
    # η_Ω(x) = (W_Ω)*₁₂ Ω₂₁ α̂(x) Ω₂₁* (W_Ω)₁₂ = Ad(Q)(1⊗x)
    qmat = dagger(data.W_omega) @ om21 @ dagger(q.W_hat_op)
    dims = [n, n, dA]

    def eta_full(x):
        return conj_on_legs(qmat, place(x, [1, 2], dims), [0, 1], dims)

    r.add("eta on alpha(A) agrees", "eta_Omega(x) = (W_Omega)*_12 alpha_hat_Omega(x)(W_Omega)_12 restricts to eta_Omega",
          max(opnorm(eta_full(x) - d.eta(x)) for x in s.alpha_images), tol)
    r.add("eta on C0(Ghat)", "eta_Omega(y⊗1) = y⊗1⊗1",
          max(opnorm(eta_full(np.kron(m, np.eye(dA))) - np.kron(m, np.eye(n * dA))) for m in q.M_hat.basis()), tol)
    s_om = deformed_action(d)
    qo = data.quantum_group
    target = OperatorSpan([np.kron(m, np.eye(n * dA)) @ x for m in qo.M_hat.basis() for x in s_om.alpha_images],
                          dim=n * n * dA)
    image = OperatorSpan([eta_full(x) for x in cp.span.basis()], dim=n * n * dA)
    r.add("eta onto G_Omega ⋉ A_Omega", "eta_Omega: G ⋉_alpha A ≅ G_Omega ⋉ A_Omega", image.distance(target), tol_span)
    # intertwining on algebra generators
    w_op = qo.W_hat_op
    d4 = [n, n, n, dA]
    worst = 0.0
    for g in cp.generators:
        ah = conj_on_legs(om21 @ dagger(q.W_hat_op), place(g, [1, 2], dims), [0, 1], dims)
        lhs = conj_on_legs(qmat, place(ah, [0, 2, 3], d4), [1, 2], d4)
        rhs = conj_on_legs(dagger(w_op), place(eta_full(g), [1, 2, 3], d4), [0, 1], d4)
        worst = max(worst, opnorm(lhs - rhs))
    r.add("eta intertwines dual actions", "(i⊗eta_Omega) alpha_hat_Omega = (alpha_Omega)^ eta_Omega", worst, tol)
    return r


# ---------------------------------------------------------------------------
# presets and files

PRESETS: dict[str, Callable[[FiniteQuantumGroup], GSystem]] = {
    "translation": translation_system,
    "trivial": trivial_system,
    "full": full_matrix_system,
    "dual-trivial": lambda q: dual_crossed_system(op_trivial(q)),
    "dual-translation": lambda q: dual_crossed_system(op_translation(q)),
}

OP_PRESETS: dict[str, Callable[[FiniteQuantumGroup], OpSystem]] = {
    "dual-trivial": op_trivial,
    "dual-translation": op_translation,
}

# largest group order for which a preset is shipped (ambient sizes grow fast)
PRESET_MAX_ORDER = {"translation": 4, "trivial": 8, "full": 4, "dual-trivial": 4, "dual-translation": 3}


def make_preset(name: str, q: FiniteQuantumGroup) -> GSystem:
    if name not in PRESETS:
        raise KeyError(f"unknown system preset {name!r}; known: {', '.join(PRESETS)}")
    return PRESETS[name](q)


@dataclass
class SystemSpec:
    group: Path | None
    kind: str
    preset: str
    cocycle: Path | None
    verifiers: list[str] = field(default_factory=list)


def parse_system(text: str, base: Path | None = None) -> SystemSpec:
    """Parse a system file of ``key value`` lines.

    Keys: ``group`` (path, optional when given elsewhere), ``kind`` (group-algebra or function-algebra),
    ``preset``, ``cocycle`` (path, optional), ``verifiers`` (names).
    Paths are relative to the file's directory.
    """
    base = base or Path(".")
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if key not in {"group", "kind", "preset", "cocycle", "verifiers"}:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in fields:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    if "preset" not in fields:
        raise ValueError("missing key 'preset'")
    if fields["preset"] not in PRESETS:
        raise ValueError(f"unknown preset {fields['preset']!r}")
    kind = fields.get("kind", "group-algebra")
    if kind not in {"group-algebra", "function-algebra"}:
        raise ValueError(f"unknown kind {kind!r}")
    cocycle = base / fields["cocycle"] if "cocycle" in fields else None
    group = base / fields["group"] if "group" in fields else None
    return SystemSpec(group, kind, fields["preset"], cocycle, fields.get("verifiers", "").split())


def load_system(path: str | Path) -> SystemSpec:
    p = Path(path)
    return parse_system(p.read_text(), p.parent)
