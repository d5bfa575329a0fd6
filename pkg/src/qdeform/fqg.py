"""Finite groups and the finite quantum groups built from them.

Two constructors are provided: the function algebra C(G), realised as
diagonal matrices on ℓ²(G), and the group algebra C*(Γ) generated by the left
regular representation.  Both come with multiplicative unitaries W, Ŵ, V,
Haar GNS vectors and modular conjugations J, Ĵ.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

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
    right_blocks,
    unitarity_defect,
)


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    mult: np.ndarray  # mult[i, j] = index of g_i g_j
    elements: tuple[str, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.mult, dtype=int)
        n = m.shape[0]
        if m.shape != (n, n) or n < 1:
            raise GroupError("multiplication table must be square and non-empty")
        for i in range(n):
            for j in range(n):
                if not 0 <= m[i, j] < n:
                    raise GroupError(f"entry ({i}, {j}) = {m[i, j]} out of range")
        for i in range(n):
            seen = set()
            for j in range(n):
                if m[i, j] in seen:
                    raise GroupError(f"not a Latin square: row {i} repeats {m[i, j]} at cell ({i}, {j})")
                seen.add(m[i, j])
        for j in range(n):
            seen = set()
            for i in range(n):
                if m[i, j] in seen:
                    raise GroupError(f"not a Latin square: column {j} repeats {m[i, j]} at cell ({i}, {j})")
                seen.add(m[i, j])
        if not (m[m, :] == m[:, m]).all():
            # (ab)c == a(bc)
            a, b, c = next((a, b, c) for a, b, c in itertools.product(range(n), repeat=3)
                           if m[m[a, b], c] != m[a, m[b, c]])
            raise GroupError(f"not associative at ({a}, {b}, {c})")
        ids = [e for e in range(n) if all(m[e, j] == j and m[j, e] == j for j in range(n))]
        if not ids:
            raise GroupError("no identity element")
        m.setflags(write=False)
        object.__setattr__(self, "mult", m)
        if not self.elements:
            object.__setattr__(self, "elements", tuple(str(i) for i in range(n)))

    @property
    def order(self) -> int:
        return self.mult.shape[0]

    @cached_property
    def identity(self) -> int:
        m = self.mult
        return next(e for e in range(self.order) if (m[e] == np.arange(self.order)).all())

    @cached_property
    def inverse(self) -> np.ndarray:
        e = self.identity
        return np.array([int(np.where(self.mult[g] == e)[0][0]) for g in range(self.order)])

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    @property
    def is_abelian(self) -> bool:
        return bool((self.mult == self.mult.T).all())


def cyclic(n: int) -> FiniteGroup:
    r = np.arange(n)
    return FiniteGroup(f"Z{n}", (r[:, None] + r[None, :]) % n)


def abelian(*factors: int) -> FiniteGroup:
    """Z_{n1} × ... × Z_{nk}; elements ordered lexicographically (first factor slowest)."""
    factors = tuple(factors) or (1,)
    els = list(itertools.product(*[range(f) for f in factors]))
    index = {e: i for i, e in enumerate(els)}
    mult = np.array([[index[tuple((x + y) % f for x, y, f in zip(a, b, factors))] for b in els] for a in els])
    name = "x".join(f"Z{f}" for f in factors)
    return FiniteGroup(name, mult, tuple(",".join(map(str, e)) for e in els))


def symmetric(k: int) -> FiniteGroup:
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    # (pq)(i) = p(q(i))
    mult = np.array([[index[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms])
    return FiniteGroup(f"S{k}", mult, tuple("".join(map(str, p)) for p in perms))


def parse_group(text: str) -> FiniteGroup:
    """Parse the line-oriented group format.

    ::

        group <name> order <n>
        table
        <n rows of n indices>

    or ``abelian n1 n2 ...`` in place of the table.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GroupError("empty group file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "group" or head[2] != "order":
        raise GroupError("header must read 'group <name> order <n>'")
    name, n = head[1], int(head[3])
    body = lines[1].split()
    if body[0] == "abelian":
        g = abelian(*[int(x) for x in body[1:]])
        if g.order != n:
            raise GroupError(f"declared order {n} but invariant factors give {g.order}")
        return FiniteGroup(name, g.mult, g.elements)
    if body[0] != "table":
        raise GroupError("expected 'table' or 'abelian'")
    rows = [[int(x) for x in ln.split()] for ln in lines[2:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GroupError(f"table must have {n} rows of {n} entries")
    return FiniteGroup(name, np.array(rows))


def load_group(path: str | Path) -> FiniteGroup:
    return parse_group(Path(path).read_text())


def format_group(g: FiniteGroup) -> str:
    out = [f"group {g.name} order {g.order}", "table"]
    out += [" ".join(str(int(x)) for x in row) for row in g.mult]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# quantum groups


def tomita_conjugation(basis: list[np.ndarray], lam) -> AntilinearOperator:
    """Modular conjugation of ``Λ(x) ↦ Λ(x*)`` over the linear span of ``basis``.

    ``lam`` maps an operator to its GNS vector.  The span must map onto the
    whole Hilbert space.
    """
    v = np.array([lam(b) for b in basis]).T
    w = np.array([lam(dagger(b)) for b in basis]).T
    if v.shape[0] != v.shape[1]:
        raise np.linalg.LinAlgError("GNS map is not a bijection onto the Hilbert space")
    s = AntilinearOperator(w @ np.conj(np.linalg.inv(v)))
    j, _ = antilinear_polar(s)
    return j


def _fixed_vector(w: np.ndarray, n: int) -> np.ndarray:
    """Unit vector ξ with W(η ⊗ ξ) = η ⊗ ξ for all η, phase fixed."""
    rows = []
    for i in range(n):
        # (W - 1)(e_i ⊗ ·) as a map C^n → C^{n²}
        rows.append((w - np.eye(n * n))[:, i * n:(i + 1) * n])
    ker = nullspace(np.vstack(rows))
    if ker.shape[1] != 1:
        raise np.linalg.LinAlgError(f"fixed space of W has dimension {ker.shape[1]}, expected 1")
    xi = ker[:, 0]
    k = int(np.argmax(np.abs(xi) > 1e-8))
    return xi * (abs(xi[k]) / xi[k])


@dataclass(frozen=True, eq=False)
class FiniteQuantumGroup:
    """A finite quantum group in its GNS representation on ℓ²(G) ≅ C^n.

    ``xi0`` implements the left Haar weight on ``M`` (φ(x) = ⟨x ξ₀, ξ₀⟩) and
    ``xi0_hat`` the dual Haar weight on ``M̂``.
    """

    kind: str
    W: np.ndarray
    J: AntilinearOperator
    J_hat: AntilinearOperator
    xi0: np.ndarray
    xi0_hat: np.ndarray
    group: FiniteGroup | None = None

    @property
    def n(self) -> int:
        return self.xi0.shape[0]

    @cached_property
    def sigma(self) -> np.ndarray:
        return flip(self.n)

    @cached_property
    def W_hat(self) -> np.ndarray:
        return self.sigma @ dagger(self.W) @ self.sigma

    @cached_property
    def V(self) -> np.ndarray:
        jj = self.J_hat.tensor(self.J_hat)
        return jj.conjugate(self.W_hat)

    @cached_property
    def M(self) -> OperatorSpan:
        """L^∞(G) = span of (ι⊗ω)(W)."""
        return OperatorSpan(right_blocks(self.W, self.n), dim=self.n)

    @cached_property
    def M_hat(self) -> OperatorSpan:
        """L^∞(Ĝ) = span of (ω⊗ι)(W)."""
        return OperatorSpan(blocks(self.W, self.n), dim=self.n)

    def delta(self, x: np.ndarray) -> np.ndarray:
        """Δ(x) = W*(1⊗x)W."""
        return dagger(self.W) @ np.kron(np.eye(self.n), x) @ self.W

    def delta_hat(self, x: np.ndarray) -> np.ndarray:
        """Δ̂(x) = ΣW(x⊗1)W*Σ = Ŵ*(1⊗x)Ŵ."""
        return dagger(self.W_hat) @ np.kron(np.eye(self.n), x) @ self.W_hat

    def delta_hat_op(self, x: np.ndarray) -> np.ndarray:
        """Opposite coproduct Σ Δ̂(x) Σ = W(x⊗1)W*."""
        return self.W @ np.kron(x, np.eye(self.n)) @ dagger(self.W)

    @cached_property
    def W_hat_op(self) -> np.ndarray:
        """Multiplicative unitary (J⊗J)Ŵ(J⊗J) of Ĝ^op."""
        return self.J.tensor(self.J).conjugate(self.W_hat)

    def haar(self, x: np.ndarray) -> complex:
        return complex(np.vdot(self.xi0, x @ self.xi0))

    def lam(self, x: np.ndarray) -> np.ndarray:
        """GNS map Λ(x) = x ξ₀."""
        return x @ self.xi0

    @cached_property
    def J_J_hat(self) -> np.ndarray:
        """The linear operator J Ĵ."""
        return self.J * self.J_hat

    @cached_property
    def J_hat_J(self) -> np.ndarray:
        return self.J_hat * self.J

    @cached_property
    def is_commutative(self) -> bool:
        b = self.M.basis()
        return all(opnorm(x @ y - y @ x) <= TOL_IDENTITY for x in b for y in b)

    @cached_property
    def points(self) -> list[np.ndarray]:
        """Minimal projections of a commutative M, i.e. the points of G.

        Ordered so that the identity point (the one fixing the counit) comes
        first and the rest by the first basis index they touch.
        """
        if not self.is_commutative:
            raise ValueError("points exist only when L^∞(G) is commutative")
        rng = np.random.default_rng(12345)
        b = self.M.basis()
        h = sum(rng.normal() * (x + dagger(x)) + 1j * rng.normal() * (x - dagger(x)) for x in b)
        w, v = np.linalg.eigh((h + dagger(h)) / 2)
        projs = []
        i = 0
        while i < len(w):
            j = i
            while j + 1 < len(w) and abs(w[j + 1] - w[i]) < 1e-8:
                j += 1
            vv = v[:, i:j + 1]
            projs.append(vv @ dagger(vv))
            i = j + 1
        if len(projs) != self.M.dim:
            raise np.linalg.LinAlgError("failed to separate the points of G")
        key = lambda p: int(np.argmax(np.abs(np.diag(p)) > 1e-8))  # noqa: E731
        projs.sort(key=key)
        return projs

    def evaluation(self, p: np.ndarray) -> np.ndarray:
        """Density ρ with Tr(ρᵀ a) = value of a ∈ M at the point ``p``."""
        return (p / np.trace(p).real).T

    def structure_report(self, tol: float = TOL_IDENTITY, tol_span: float = TOL_SPAN) -> Report:
        """Check the defining identities of the quantum group."""
        r = Report(f"quantum-group[{self.kind}]")
        n = self.n
        dims = [n, n, n]

        def pent(u):
            return opnorm(place(u, [0, 1], dims) @ place(u, [0, 2], dims) @ place(u, [1, 2], dims)
                          - place(u, [1, 2], dims) @ place(u, [0, 1], dims))

        for name, u in (("W", self.W), ("W_hat", self.W_hat), ("V", self.V)):
            r.add(f"unitary {name}", f"{name} is unitary", unitarity_defect(u), tol)
            r.add(f"pentagon {name}", "pentagon relation U12 U13 U23 = U23 U12", pent(u), tol)
        coprod = max((opnorm(self.delta(x) - self.V @ np.kron(x, np.eye(n)) @ dagger(self.V))
                      for x in self.M.basis()), default=0.0)
        r.add("coproduct W vs V", "Delta(x) = W*(1⊗x)W = V(x⊗1)V*", coprod, tol)
        jw = self.J_hat.tensor(self.J)
        r.add("unitary antipode on W", "(J_hat⊗J) W* (J_hat⊗J) = W", opnorm(jw.conjugate(dagger(self.W)) - self.W), tol)
        mm = OperatorSpan([np.kron(x, y) for x in self.M.basis() for y in self.M.basis()], dim=n * n)
        r.add("Delta(M) in M⊗M", "Delta maps L^inf(G) into L^inf(G)⊗L^inf(G)",
              max((mm.residual(self.delta(x)) for x in self.M.basis()), default=0.0), tol_span)
        mh = OperatorSpan([np.kron(x, y) for x in self.M_hat.basis() for y in self.M_hat.basis()], dim=n * n)
        r.add("Delta_hat(M_hat) in M_hat⊗M_hat", "dual coproduct Sigma W (x⊗1) W* Sigma",
              max((mh.residual(self.delta_hat(x)) for x in self.M_hat.basis()), default=0.0), tol_span)
        r.add("J involutive", "J^2 = 1", opnorm(self.J * self.J - np.eye(n)), tol)
        r.add("J_hat involutive", "J_hat^2 = 1", opnorm(self.J_hat * self.J_hat - np.eye(n)), tol)
        r.add("J M J = M'", "modular conjugation maps M onto its commutant",
              max((opnorm(self.J.conjugate(x) @ y - y @ self.J.conjugate(x))
                   for x in self.M.basis() for y in self.M.basis()), default=0.0), tol)
        r.add("W_hat_op in M_hat ⊗ M'", "W_hat_op = (J⊗J) W_hat (J⊗J)",
              _op_membership(self), tol_span)
        r.add("biduality", "dual of dual recovers the quantum group",
              max(dual(dual(self)).M.distance(self.M), dual(dual(self)).M_hat.distance(self.M_hat)), tol_span)
        return r


def _op_membership(q: FiniteQuantumGroup) -> float:
    mprime = [q.J.conjugate(x) for x in q.M.basis()]
    sp = OperatorSpan([np.kron(a, b) for a in q.M_hat.basis() for b in mprime], dim=q.n ** 2)
    return sp.residual(q.W_hat_op)


def group_algebra(gamma: FiniteGroup) -> FiniteQuantumGroup:
    """C*(Γ) with Ŵ(δ_s⊗δ_t) = δ_s⊗δ_{st} and Haar trace τ(λ_s) = δ_{s,e}."""
    n = gamma.order
    w_hat = np.zeros((n * n, n * n))
    for s in range(n):
        for t in range(n):
            w_hat[s * n + gamma.mul(s, t), s * n + t] = 1.0
    sig = flip(n)
    w = sig @ w_hat.T @ sig
    inv = np.zeros((n, n))
    for s in range(n):
        inv[gamma.inverse[s], s] = 1.0
    xi0 = np.zeros(n, dtype=complex)
    xi0[gamma.identity] = 1.0
    return FiniteQuantumGroup("group_algebra", w.astype(complex), AntilinearOperator(inv.astype(complex)),
                              AntilinearOperator(np.eye(n, dtype=complex)), xi0, np.ones(n, dtype=complex), gamma)


def function_algebra(g: FiniteGroup) -> FiniteQuantumGroup:
    """C(G) as diagonal matrices, counting-measure Haar, (Wξ)(s,t) = ξ(s, s⁻¹t)."""
    n = g.order
    w = np.zeros((n * n, n * n))
    for s in range(n):
        for t in range(n):
            w[s * n + g.mul(s, t), s * n + t] = 1.0
    inv = np.zeros((n, n))
    for s in range(n):
        inv[g.inverse[s], s] = 1.0
    xi0_hat = np.zeros(n, dtype=complex)
    xi0_hat[g.identity] = 1.0
    return FiniteQuantumGroup("function_algebra", w.astype(complex), AntilinearOperator(np.eye(n, dtype=complex)),
                              AntilinearOperator(inv.astype(complex)), np.ones(n, dtype=complex), xi0_hat, g)


_DUAL_KIND = {"function_algebra": "group_algebra", "group_algebra": "function_algebra"}


def dual(q: FiniteQuantumGroup) -> FiniteQuantumGroup:
    return FiniteQuantumGroup(_DUAL_KIND.get(q.kind, f"dual({q.kind})"), q.W_hat, q.J_hat, q.J,
                              q.xi0_hat, q.xi0, q.group)


def gns(q: FiniteQuantumGroup):
    """(Λ, J) recomputed from the Haar vector by Tomita's construction."""
    return q.lam, tomita_conjugation(q.M.basis(), q.lam)


def from_multiplicative_unitary(w: np.ndarray, kind: str = "generic", j_hat: AntilinearOperator | None = None,
                                group: FiniteGroup | None = None) -> FiniteQuantumGroup:
    """Quantum group of a multiplicative unitary acting on C^n ⊗ C^n.

    Haar vectors are the unit fixed vectors of the second legs of W and Ŵ; J
    and Ĵ come from Tomita's construction.  ``j_hat`` overrides Ĵ when it is
    known to be preserved (deformations keep L^∞(Ĝ) in standard form).
    """
    n = int(round(np.sqrt(w.shape[0])))
    sig = flip(n)
    w_hat = sig @ dagger(w) @ sig
    xi0 = _fixed_vector(w, n)
    xi0_hat = _fixed_vector(w_hat, n)
    m = OperatorSpan(right_blocks(w, n), dim=n)
    mh = OperatorSpan(blocks(w, n), dim=n)
    j = tomita_conjugation(m.basis(), lambda x: x @ xi0)
    if j_hat is None:
        j_hat = tomita_conjugation(mh.basis(), lambda x: x @ xi0_hat)
    return FiniteQuantumGroup(kind, w, j, j_hat, xi0, xi0_hat, group)
