"""Unitary dual 2-cocycles, the deformed coproduct and the deformed multiplicative unitary.

A cocycle Ω lives in L^∞(Ĝ)⊗L^∞(Ĝ), i.e. in the span of M̂⊗M̂ of a
:class:`~qdeform.fqg.FiniteQuantumGroup`.  For ``group_algebra(Γ)`` this is
ℓ∞(Γ)⊗ℓ∞(Γ) and Ω is a diagonal matrix with entries Ω(s, t).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .fqg import FiniteGroup, FiniteQuantumGroup, from_multiplicative_unitary, group_algebra
from .report import Report
from .tensorkit import (
    TOL_IDENTITY,
    TOL_SPAN,
    AntilinearOperator,
    OperatorSpan,
    antilinear_polar,
    blocks,
    dagger,
    flip,
    nullspace,
    opnorm,
    place,
    unitarity_defect,
)


class CocycleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DualCocycle:
    q: FiniteQuantumGroup
    omega: np.ndarray
    provenance: tuple = ("raw",)
    label: str = "omega"

    @property
    def n(self) -> int:
        return self.q.n

    @cached_property
    def omega_star(self) -> np.ndarray:
        return dagger(self.omega)

    @cached_property
    def what_omega_star(self) -> np.ndarray:
        """ŴΩ*."""
        return self.q.W_hat @ self.omega_star

    @cached_property
    def is_trivial(self) -> bool:
        return opnorm(self.omega - np.eye(self.n ** 2)) <= TOL_IDENTITY


def trivial_cocycle(q: FiniteQuantumGroup) -> DualCocycle:
    return DualCocycle(q, np.eye(q.n ** 2, dtype=complex), ("trivial",), "1")


def _delta_hat_leg1(q: FiniteQuantumGroup, x: np.ndarray) -> np.ndarray:
    """(Δ̂⊗ι)(x) for x on two legs: Ŵ*₁₂ x₂₃ Ŵ₁₂."""
    dims = [q.n] * 3
    w12 = place(q.W_hat, [0, 1], dims)
    return dagger(w12) @ place(x, [1, 2], dims) @ w12


def _delta_hat_leg2(q: FiniteQuantumGroup, x: np.ndarray) -> np.ndarray:
    """(ι⊗Δ̂)(x): Ŵ*₂₃ x₁₃ Ŵ₂₃."""
    dims = [q.n] * 3
    w23 = place(q.W_hat, [1, 2], dims)
    return dagger(w23) @ place(x, [0, 2], dims) @ w23


def mhat_tensor_span(q: FiniteQuantumGroup) -> OperatorSpan:
    b = q.M_hat.basis()
    return OperatorSpan([np.kron(x, y) for x in b for y in b], dim=q.n ** 2)


def cocycle_identity_defect(q: FiniteQuantumGroup, omega: np.ndarray) -> float:
    """‖(Ω⊗1)(Δ̂⊗ι)(Ω) − (1⊗Ω)(ι⊗Δ̂)(Ω)‖."""
    dims = [q.n] * 3
    lhs = place(omega, [0, 1], dims) @ _delta_hat_leg1(q, omega)
    rhs = place(omega, [1, 2], dims) @ _delta_hat_leg2(q, omega)
    return opnorm(lhs - rhs)


def verify_cocycle(c: DualCocycle, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
    q, n = c.q, c.n
    dims = [n] * 3
    r = Report(f"cocycle[{c.label}]")
    r.add("unitary", "Omega is a unitary element", unitarity_defect(c.omega), tol)
    r.add("membership M_hat⊗M_hat", "Omega in L^inf(G_hat)⊗L^inf(G_hat)", mhat_tensor_span(q).residual(c.omega), tol_span)
    r.add("cocycle identity", "(Omega⊗1)(Dhat⊗i)(Omega) = (1⊗Omega)(i⊗Dhat)(Omega)",
          cocycle_identity_defect(q, c.omega), tol)
    t = c.what_omega_star
    lhs = _delta_hat_leg1(q, t) @ place(c.omega_star, [0, 1], dims)
    rhs = place(t, [0, 2], dims) @ place(t, [1, 2], dims)
    r.add("rewritten cocycle identity", "(Dhat⊗i)(W_hat Omega*) Omega*_12 = (W_hat Omega*)_13 (W_hat Omega*)_23",
          opnorm(lhs - rhs), tol)
    return r


# ---------------------------------------------------------------------------
# scalar cocycles on a finite group Γ (the dual of group_algebra(Γ))


def _require_group_dual(q: FiniteQuantumGroup) -> FiniteGroup:
    if q.kind != "group_algebra" or q.group is None:
        raise CocycleError("scalar cocycles need the group algebra of a finite group")
    return q.group


def scalar_cocycle_defect(gamma: FiniteGroup, table: np.ndarray) -> tuple[float, tuple[int, int, int] | None]:
    """Max of |Ω(s,t)Ω(st,r) − Ω(t,r)Ω(s,tr)| and a worst triple."""
    m = gamma.mult
    n = gamma.order
    s, t, r = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    d = np.abs(table[s, t] * table[m[s, t], r] - table[t, r] * table[s, m[t, r]])
    k = int(np.argmax(d))
    worst = float(d.ravel()[k])
    return worst, (tuple(int(i) for i in np.unravel_index(k, d.shape)) if worst > 0 else None)


def scalar_cocycle(q: FiniteQuantumGroup, table: np.ndarray, label: str = "omega",
                   provenance: tuple = ("scalar",)) -> DualCocycle:
    """Embed a function Ω: Γ×Γ → T as the diagonal operator Σ Ω(s,t) e_ss ⊗ e_tt."""
    gamma = _require_group_dual(q)
    table = np.asarray(table, dtype=complex)
    if table.shape != (gamma.order, gamma.order):
        raise CocycleError(f"table must be {gamma.order}×{gamma.order}")
    return DualCocycle(q, np.diag(table.ravel()), provenance, label)


def cocycle_table(c: DualCocycle) -> np.ndarray:
    """Values Ω(s,t) of a diagonal cocycle."""
    n = c.n
    if opnorm(c.omega - np.diag(np.diag(c.omega))) > TOL_IDENTITY:
        raise CocycleError("cocycle is not diagonal in the group basis")
    return np.diag(c.omega).reshape(n, n)


def bicharacter_law_defect(gamma: FiniteGroup, psi: np.ndarray) -> tuple[float, tuple | None]:
    m = gamma.mult
    n = gamma.order
    worst, where = 0.0, None
    for s, s2, t in itertools.product(range(n), repeat=3):
        d1 = abs(psi[m[s, s2], t] - psi[s, t] * psi[s2, t])
        d2 = abs(psi[t, m[s, s2]] - psi[t, s] * psi[t, s2])
        if d1 > worst:
            worst, where = d1, ((int(m[s, s2]), t), "first argument", (s, s2))
        if d2 > worst:
            worst, where = d2, ((t, int(m[s, s2])), "second argument", (s, s2))
    return worst, where


def bicharacter_cocycle(q: FiniteQuantumGroup, psi: np.ndarray, label: str = "psi",
                        tol: float = TOL_IDENTITY) -> DualCocycle:
    gamma = _require_group_dual(q)
    psi = np.asarray(psi, dtype=complex)
    if not gamma.is_abelian:
        raise CocycleError("bicharacters are only generated for abelian groups")
    if np.abs(np.abs(psi) - 1).max() > tol:
        raise CocycleError("bicharacter values must have modulus one")
    worst, where = bicharacter_law_defect(gamma, psi)
    if worst > tol:
        pair, arg, (s, s2) = where
        raise CocycleError(f"bicharacter law violated at pair {pair} in the {arg} (product of {s} and {s2})")
    return scalar_cocycle(q, psi, label, ("bicharacter", label))


def _abelian_generators(gamma: FiniteGroup) -> list[tuple[int, int]]:
    """(element, order) pairs of an invariant-factor basis, found by brute force."""
    n = gamma.order
    m = gamma.mult
    e = gamma.identity

    def order(g):
        k, x = 1, g
        while x != e:
            x, k = m[x, g], k + 1
        return k

    def subgroup(gens):
        sub = {e}
        frontier = [e]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = int(m[x, g])
                if y not in sub:
                    sub.add(y)
                    frontier.append(y)
        return sub

    # greedy: repeatedly add the element of largest order whose cyclic group
    # meets the current subgroup trivially
    gens: list[tuple[int, int]] = []
    current = {e}
    while len(current) < n:
        best = None
        for g in range(n):
            if g in current:
                continue
            cyc = subgroup([g])
            if cyc & current == {e} and (best is None or order(g) > best[1]):
                best = (g, order(g))
        if best is None:
            raise CocycleError("could not find a direct-sum basis")
        gens.append(best)
        current = subgroup([g for g, _ in gens])
        if len(current) != math.prod(o for _, o in gens):
            raise CocycleError("greedy basis is not a direct sum")
    return gens


def enumerate_bicharacters(gamma: FiniteGroup) -> list[np.ndarray]:
    """All bicharacters Γ×Γ → T of a finite abelian group.

    Each is fixed by its values on pairs of basis generators, which must be
    gcd(n_i, n_j)-th roots of unity.  Non-symmetric bicharacters (those giving
    non-commutative twisted algebras) come first, then lexicographic order of
    the exponents.
    """
    if not gamma.is_abelian:
        raise CocycleError("bicharacters are only enumerated for abelian groups")
    gens = _abelian_generators(gamma)
    k = len(gens)
    m = gamma.mult
    # coordinates of each element in the generator basis
    coords = {}
    for exps in itertools.product(*[range(o) for _, o in gens]):
        x = gamma.identity
        for (g, _), a in zip(gens, exps):
            for _ in range(a):
                x = int(m[x, g])
        coords[x] = exps
    pairs = [(i, j) for i in range(k) for j in range(k)]
    out = []
    for choice in itertools.product(*[range(math.gcd(gens[i][1], gens[j][1])) for i, j in pairs]):
        psi = np.ones((gamma.order, gamma.order), dtype=complex)
        for s in range(gamma.order):
            for t in range(gamma.order):
                ph = 0.0
                for (i, j), c in zip(pairs, choice):
                    ph += coords[s][i] * coords[t][j] * c / math.gcd(gens[i][1], gens[j][1])
                psi[s, t] = np.exp(2j * np.pi * ph)
        out.append((choice, psi))
    out.sort(key=lambda cp: (bool(np.allclose(cp[1], cp[1].T)), cp[0]))
    return [p for _, p in out]


def sigma_z2xz2() -> np.ndarray:
    """σ((a,b),(c,d)) = (−1)^{bc} on Z₂×Z₂ with lexicographic element order."""
    els = list(itertools.product(range(2), range(2)))
    return np.array([[(-1.0) ** (s[1] * t[0]) for t in els] for s in els], dtype=complex)


def normalize_scalar(table: np.ndarray, identity: int) -> np.ndarray:
    """Cohomologous table with Ω(e,·) = Ω(·,e) = 1 (never applied implicitly).

    For a cocycle Ω(e,t) = Ω(e,e) = Ω(s,e) for all s, t, so dividing by the
    constant Ω(e,e) normalises.
    """
    return table / table[identity, identity]


# ---------------------------------------------------------------------------
# coboundaries and deformed coproduct


def coboundary_twist(c: DualCocycle, u: np.ndarray, tol: float = TOL_IDENTITY,
                     tol_span: float = TOL_SPAN) -> DualCocycle:
    """Ω_u = (u⊗u) Ω Δ̂(u)*."""
    q = c.q
    if unitarity_defect(u) > tol:
        raise CocycleError("u is not unitary")
    if q.M_hat.residual(u) > tol_span:
        raise CocycleError("u is not in L^inf(G_hat)")
    om = np.kron(u, u) @ c.omega @ dagger(q.delta_hat(u))
    return DualCocycle(q, om, ("coboundary", u, c), f"{c.label}_u")


def random_unitary_in_mhat(q: FiniteQuantumGroup, rng: np.random.Generator) -> np.ndarray:
    """exp(iH) for a random self-adjoint H in M̂."""
    from scipy.linalg import expm

    b = q.M_hat.basis()
    h = sum(complex(rng.normal(), rng.normal()) * x for x in b)
    h = (h + dagger(h)) / 2
    return expm(1j * h)


def deformed_coproduct(c: DualCocycle):
    """x ↦ Ω Δ̂(x) Ω*."""
    q = c.q

    def dhat_omega(x: np.ndarray) -> np.ndarray:
        return c.omega @ q.delta_hat(x) @ c.omega_star

    return dhat_omega


def coassociativity_defect(c: DualCocycle) -> float:
    q, n = c.q, c.n
    dims = [n] * 3
    om12 = place(c.omega, [0, 1], dims)
    om23 = place(c.omega, [1, 2], dims)
    d = deformed_coproduct(c)
    worst = 0.0
    for x in q.M_hat.basis():
        dx = d(x)
        left = om12 @ _delta_hat_leg1(q, dx) @ dagger(om12)
        right = om23 @ _delta_hat_leg2(q, dx) @ dagger(om23)
        worst = max(worst, opnorm(left - right))
    return worst


# ---------------------------------------------------------------------------
# dual weight GNS data


@dataclass(frozen=True, eq=False)
class DeformedDualData:
    cocycle: DualCocycle
    twisted_span: OperatorSpan
    lambda_tilde: object
    well_defined_defect: float
    S_tilde: AntilinearOperator
    J_tilde: AntilinearOperator
    Delta_tilde: np.ndarray
    X: np.ndarray
    W_hat_omega: np.ndarray

    @cached_property
    def W_omega(self) -> np.ndarray:
        """W_Ω = ΣŴ_Ω*Σ."""
        s = flip(self.cocycle.n)
        return s @ dagger(self.W_hat_omega) @ s

    @cached_property
    def what_omega_omega(self) -> np.ndarray:
        """Ŵ_Ω Ω."""
        return self.W_hat_omega @ self.cocycle.omega

    def coproduct_defect(self) -> float:
        """Ŵ_Ω*(1⊗x)Ŵ_Ω against Ω Δ̂(x) Ω* on the M̂ basis."""
        c = self.cocycle
        n = c.n
        d = deformed_coproduct(c)
        w = self.W_hat_omega
        return max(opnorm(dagger(w) @ np.kron(np.eye(n), x) @ w - d(x)) for x in c.q.M_hat.basis())

    def flipped_coproduct_defect(self) -> float:
        """ΣŴ_Ω(x⊗1)Ŵ_Ω*Σ against Ω Δ̂(x) Ω*; reported, not required."""
        c = self.cocycle
        n = c.n
        s = flip(n)
        d = deformed_coproduct(c)
        w = self.W_hat_omega
        return max(opnorm(s @ w @ np.kron(x, np.eye(n)) @ dagger(w) @ s - d(x)) for x in c.q.M_hat.basis())

    @cached_property
    def quantum_group(self) -> FiniteQuantumGroup:
        """G_Ω: L^∞(Ĝ_Ω) = L^∞(Ĝ) keeps its modular conjugation Ĵ."""
        q = self.cocycle.q
        return from_multiplicative_unitary(self.W_omega, kind=f"deformed({q.kind})", j_hat=q.J_hat, group=q.group)

    def identity_ecocycle4(self) -> float:
        """(Ŵ_ΩΩ)₂₃Ŵ₁₂(Ŵ_ΩΩ)*₂₃ − (ŴΩ*)₁₂(Ŵ_ΩΩ)₁₃."""
        c = self.cocycle
        dims = [c.n] * 3
        a = self.what_omega_omega
        a23 = place(a, [1, 2], dims)
        lhs = a23 @ place(c.q.W_hat, [0, 1], dims) @ dagger(a23)
        rhs = place(c.what_omega_star, [0, 1], dims) @ place(a, [0, 2], dims)
        return opnorm(lhs - rhs)

    def report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        c = self.cocycle
        n = c.n
        dims = [n] * 3
        w = self.W_hat_omega
        r = Report(f"deformed-dual[{c.label}]")
        r.add("Lambda_tilde well defined", "Lambda_tilde((w⊗i)(W_hat Omega*)) = Lambda((w⊗i)(W_hat))",
              self.well_defined_defect, tol_span)
        r.add("J_tilde involutive", "modular involution J_tilde^2 = 1", opnorm(self.J_tilde * self.J_tilde - np.eye(n)), tol)
        r.add("J_tilde antiunitary", "J_tilde antiunitary", unitarity_defect(self.J_tilde.matrix), tol)
        r.add("X unitary", "X = J_tilde J", unitarity_defect(self.X), tol)
        r.add("X in M_hat", "X = J_tilde J lies in L^inf(G_hat)", c.q.M_hat.residual(self.X), tol_span)
        r.add("coassociativity", "Dhat_Omega = Omega Dhat(.) Omega* is coassociative", coassociativity_defect(c), tol)
        r.add("W_hat_Omega unitary", "W_hat_Omega = (J_tilde⊗J_hat) Omega W_hat* (J⊗J_hat) Omega*",
              unitarity_defect(w), tol)
        pent = opnorm(place(w, [0, 1], dims) @ place(w, [0, 2], dims) @ place(w, [1, 2], dims)
                      - place(w, [1, 2], dims) @ place(w, [0, 1], dims))
        r.add("W_hat_Omega pentagon", "pentagon relation for W_hat_Omega", pent, tol)
        r.add("W_hat_Omega implements Dhat_Omega", "Dhat_Omega(x) = W_hat_Omega*(1⊗x)W_hat_Omega",
              self.coproduct_defect(), tol)
        r.add("identity ecocycle4", "(W_hat_Omega Omega)_23 W_hat_12 (W_hat_Omega Omega)*_23 = (W_hat Omega*)_12 (W_hat_Omega Omega)_13",
              self.identity_ecocycle4(), tol)
        return r


def twisted_generators(c: DualCocycle) -> list[np.ndarray]:
    """(ω_ij⊗ι)(ŴΩ*) in row-major (i, j) order."""
    return blocks(c.what_omega_star, c.n)


def dual_weight_gns(c: DualCocycle) -> DeformedDualData:
    q, n = c.q, c.n
    gens = twisted_generators(c)
    images = [b @ q.xi0 for b in blocks(q.W_hat, n)]
    g = np.array([x.ravel() for x in gens]).T
    lmat = np.array(images).T
    rel = nullspace(g)
    well = float(np.linalg.norm(lmat @ rel, 2)) if rel.shape[1] else 0.0
    span = OperatorSpan(gens, dim=n)

    def lambda_tilde(x: np.ndarray) -> np.ndarray:
        coef = np.linalg.lstsq(g, x.ravel(), rcond=None)[0]
        return lmat @ coef

    basis = span.basis()
    if len(basis) != n:
        raise CocycleError(f"twisted algebra has dimension {len(basis)}, expected {n}")
    v = np.array([lambda_tilde(b) for b in basis]).T
    w = np.array([lambda_tilde(dagger(b)) for b in basis]).T
    s_tilde = AntilinearOperator(w @ np.conj(np.linalg.inv(v)))
    j_tilde, delta = antilinear_polar(s_tilde)
    x = j_tilde * q.J
    jj_left = j_tilde.tensor(q.J_hat)
    jj_right = q.J.tensor(q.J_hat)
    w_hat_omega = jj_left.sandwich(c.omega @ dagger(q.W_hat), jj_right) @ c.omega_star
    return DeformedDualData(c, span, lambda_tilde, well, s_tilde, j_tilde, delta, x, w_hat_omega)


def deformed_multiplicative_unitary(c: DualCocycle, d: DeformedDualData | None = None) -> np.ndarray:
    return (d or dual_weight_gns(c)).W_hat_omega


def cocycle_on_deformed(c: DualCocycle, d: DeformedDualData | None = None) -> tuple[DualCocycle, Report]:
    """Ω* as a cocycle on Ĝ_Ω, with the span identity C*_r(Ĝ_Ω;Ω*) = Ĵ C*_r(Ĝ;Ω) Ĵ."""
    d = d or dual_weight_gns(c)
    q_om = d.quantum_group
    c_star = DualCocycle(q_om, c.omega_star, ("inverse", c), f"{c.label}*")
    r = verify_cocycle(c_star)
    r.suite = f"inverse-cocycle[{c.label}]"
    lhs = OperatorSpan(blocks(d.what_omega_omega, c.n), dim=c.n)
    rhs = OperatorSpan([c.q.J_hat.conjugate(x) for x in d.twisted_span.basis()], dim=c.n)
    r.add("twisted algebra of inverse", "C*_r(Ghat_Omega; Omega*) = J_hat C*_r(Ghat; Omega) J_hat",
          lhs.distance(rhs), TOL_SPAN)
    return c_star, r


def product_cocycle(c1: DualCocycle, c: DualCocycle) -> DualCocycle:
    """Ω₁Ω as a cocycle on the undeformed Ĝ."""
    return DualCocycle(c.q, c1.omega @ c.omega, ("product", c1, c), f"{c1.label}.{c.label}")


# ---------------------------------------------------------------------------
# file format


def parse_cocycle(text: str, q: FiniteQuantumGroup, force_unverified: bool = False) -> DualCocycle:
    """Parse a cocycle file.

    ::

        cocycle <name>
        bicharacter            # or: scalar, raw
        <s> <t> <turns>        # value exp(2πi·turns); unlisted pairs are 1

    ``raw`` is followed by n² rows of n² Python complex literals.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise CocycleError("empty cocycle file")
    name = "omega"
    if lines[0].startswith("cocycle"):
        parts = lines[0].split()
        name = parts[1] if len(parts) > 1 else name
        lines = lines[1:]
    if not lines:
        raise CocycleError("missing cocycle section")
    kind = lines[0].split()[0]
    body = lines[1:]
    n = q.n
    if kind in ("bicharacter", "scalar"):
        table = np.ones((n, n), dtype=complex)
        for ln in body:
            parts = ln.split()
            if len(parts) != 3:
                raise CocycleError(f"expected 's t turns', got {ln!r}")
            s, t, turns = int(parts[0]), int(parts[1]), float(parts[2])
            if not (0 <= s < n and 0 <= t < n):
                raise CocycleError(f"element index out of range in {ln!r}")
            table[s, t] = np.exp(2j * np.pi * turns)
        if kind == "bicharacter":
            c = bicharacter_cocycle(q, table, name) if not force_unverified else scalar_cocycle(q, table, name, ("bicharacter", name))
        else:
            c = scalar_cocycle(q, table, name)
    elif kind == "raw":
        rows = [[complex(x) for x in ln.split()] for ln in body]
        mat = np.array(rows, dtype=complex)
        if mat.shape != (n * n, n * n):
            raise CocycleError(f"raw cocycle must be {n * n}×{n * n}")
        c = DualCocycle(q, mat, ("raw",), name)
    else:
        raise CocycleError(f"unknown cocycle section {kind!r}")
    if not force_unverified:
        rep = verify_cocycle(c)
        if not rep.passed:
            bad = ", ".join(f"{x.name} ({x.defect:.3e})" for x in rep.failures())
            raise CocycleError(f"cocycle fails verification: {bad}")
    return c


def load_cocycle(path: str | Path, q: FiniteQuantumGroup, force_unverified: bool = False) -> DualCocycle:
    return parse_cocycle(Path(path).read_text(), q, force_unverified)


def format_bicharacter(psi: np.ndarray, name: str = "psi") -> str:
    out = [f"cocycle {name}", "bicharacter"]
    n = psi.shape[0]
    for s in range(n):
        for t in range(n):
            turns = (np.angle(psi[s, t]) / (2 * np.pi)) % 1.0
            turns = 0.0 if min(turns, 1 - turns) < 1e-12 else turns
            if turns:
                out.append(f"{s} {t} {turns:.17g}")
    return "\n".join(out) + "\n"


def sigma_cocycle(q: FiniteQuantumGroup | None = None) -> DualCocycle:
    from .fqg import abelian

    q = q or group_algebra(abelian(2, 2))
    return bicharacter_cocycle(q, sigma_z2xz2(), "sigma")
