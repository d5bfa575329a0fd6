"""Dense linear algebra on small tensor products of Hilbert spaces.

Operators on ``H_1 ⊗ ... ⊗ H_k`` are plain complex matrices whose row and
column indices use the row-major mixed-radix encoding of basis multi-indices
in the listed leg order.  The helpers here place operators on chosen legs,
slice legs against functionals, handle antilinear operators and compare
linear spans of operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import chain
from math import prod
from typing import Iterable, Sequence

import numpy as np

TOL_IDENTITY = 1e-10
TOL_SPAN = 1e-8
# relative singular-value cutoff used to decide the rank of a span
RANK_RTOL = 1e-9


class LegError(ValueError):
    """Raised on leg-label or dimension mismatches."""


# above this side length defects are bounded by the Frobenius norm instead
EXACT_NORM_MAX_DIM = 256


def opnorm(x: np.ndarray) -> float:
    """Operator norm (largest singular value).

    When both sides exceed ``EXACT_NORM_MAX_DIM`` the Frobenius norm is
    returned; it bounds the operator norm from above, so a defect below a
    tolerance stays a valid certificate.
    """
    if x.size == 0:
        return 0.0
    if min(x.shape) > EXACT_NORM_MAX_DIM:
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(x, 2))


def dagger(x: np.ndarray) -> np.ndarray:
    return x.conj().T


def unitarity_defect(u: np.ndarray) -> float:
    eye = np.eye(u.shape[0])
    return max(opnorm(u @ dagger(u) - eye), opnorm(dagger(u) @ u - eye))


def flip(n: int, m: int | None = None) -> np.ndarray:
    """The flip Σ: C^n ⊗ C^m → C^m ⊗ C^n."""
    m = n if m is None else m
    s = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            s[j * n + i, i * m + j] = 1.0
    return s


def matrix_unit(i: int, j: int, n: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def permute_legs(x: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor legs: new leg ``k`` is old leg ``perm[k]``."""
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise LegError(f"not a permutation of {k} legs: {perm}")
    t = x.reshape(tuple(dims) * 2)
    axes = list(perm) + [k + p for p in perm]
    d = prod(dims)
    return t.transpose(axes).reshape(d, d)


def place(x: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Put ``x`` on the ambient legs ``targets`` (in x's own leg order).

    ``place(W, [0, 2], [n, n, n])`` is the leg-numbered operator W₁₃.
    """
    dims = list(dims)
    if len(set(targets)) != len(targets):
        raise LegError(f"repeated target legs {targets}")
    if any(t < 0 or t >= len(dims) for t in targets):
        raise LegError(f"target legs {targets} outside {len(dims)}-leg space")
    sub = prod(dims[t] for t in targets)
    if x.shape != (sub, sub):
        raise LegError(f"operator of shape {x.shape} does not fit legs {targets} with dims {dims}")
    rest = [i for i in range(len(dims)) if i not in targets]
    full = np.kron(x, np.eye(prod(dims[i] for i in rest)))
    order = list(targets) + rest
    # full acts on legs in ``order``; move them back to ambient positions
    inv = [order.index(i) for i in range(len(dims))]
    return permute_legs(full, [dims[i] for i in order], inv)


def apply_on_legs(u: np.ndarray, x: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """``u_targets @ x`` without forming the padded operator ``u_targets``."""
    dims = list(dims)
    d = prod(dims)
    k = len(targets)
    sub = [dims[t] for t in targets]
    if u.shape != (prod(sub), prod(sub)):
        raise LegError(f"operator of shape {u.shape} does not fit legs {targets} with dims {dims}")
    t = x.reshape(dims + [x.shape[1]])
    r = np.tensordot(u.reshape(sub + sub), t, axes=(list(range(k, 2 * k)), list(targets)))
    r = np.moveaxis(r, list(range(k)), list(targets))
    return r.reshape(d, x.shape[1])


def conj_on_legs(u: np.ndarray, x: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """``u_targets x u_targets*``."""
    y = apply_on_legs(u, x, targets, dims)
    return dagger(apply_on_legs(u, dagger(y), targets, dims))


def slice_leg(x: np.ndarray, dims: Sequence[int], leg: int, rho: np.ndarray) -> np.ndarray:
    """Apply the functional ``a ↦ Tr(ρᵀ a)`` to one leg of ``x``.

    The remaining legs keep their order.
    """
    dims = list(dims)
    if not 0 <= leg < len(dims):
        raise LegError(f"unknown leg {leg}")
    k = len(dims)
    t = x.reshape(tuple(dims) * 2)
    t = np.tensordot(t, rho, axes=([leg, k + leg], [0, 1]))
    rd = prod(dims) // dims[leg]
    return t.reshape(rd, rd)


def slice_legs(x: np.ndarray, dims: Sequence[int], legs: Sequence[int], rhos: Sequence[np.ndarray]) -> np.ndarray:
    """Slice several legs at once (legs given in ambient numbering)."""
    dims = list(dims)
    for leg, rho in sorted(zip(legs, rhos), key=lambda p: -p[0]):
        x = slice_leg(x, dims, leg, rho)
        dims.pop(leg)
    return x


def blocks(x: np.ndarray, n: int) -> list[np.ndarray]:
    """Slices of the first leg (dimension ``n``) by all matrix units ω_ij, row-major in (i, j)."""
    m = x.shape[0] // n
    t = x.reshape(n, m, n, m)
    return [t[i, :, j, :] for i in range(n) for j in range(n)]


def right_blocks(x: np.ndarray, m: int) -> list[np.ndarray]:
    """Slices of the last leg (dimension ``m``) by all matrix units."""
    n = x.shape[0] // m
    t = x.reshape(n, m, n, m)
    return [t[:, i, :, j] for i in range(m) for j in range(m)]


# ---------------------------------------------------------------------------
# labelled wrappers


@dataclass(frozen=True)
class HilbertSpace:
    dim: int
    label: str
    basis_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not self.basis_names:
            object.__setattr__(self, "basis_names", tuple(str(i) for i in range(self.dim)))
        if len(self.basis_names) != self.dim:
            raise ValueError("basis_names length differs from dim")
        if len(set(self.basis_names)) != self.dim:
            raise ValueError("duplicate basis names")


@dataclass(frozen=True, eq=False)
class LegOperator:
    """A matrix together with the labelled legs it acts on."""

    spaces: tuple[HilbertSpace, ...]
    entries: np.ndarray

    def __post_init__(self):
        labels = [s.label for s in self.spaces]
        if len(set(labels)) != len(labels):
            raise LegError(f"duplicate leg labels {labels}")
        d = prod(s.dim for s in self.spaces)
        ent = np.asarray(self.entries, dtype=complex)
        if ent.shape != (d, d):
            raise LegError(f"entries of shape {ent.shape}, expected {(d, d)}")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.spaces]

    @property
    def dims(self) -> list[int]:
        return [s.dim for s in self.spaces]

    def __matmul__(self, other: "LegOperator") -> "LegOperator":
        if self.labels != other.labels:
            raise LegError("operators act on different legs")
        return LegOperator(self.spaces, self.entries @ other.entries)

    def adjoint(self) -> "LegOperator":
        return LegOperator(self.spaces, dagger(self.entries))

    def close_to(self, other: "LegOperator", tol: float = TOL_IDENTITY) -> bool:
        return self.labels == other.labels and opnorm(self.entries - other.entries) <= tol


def kron(a: LegOperator, b: LegOperator) -> LegOperator:
    return LegOperator(a.spaces + b.spaces, np.kron(a.entries, b.entries))


def place_op(x: LegOperator, target_legs: Sequence[str], ambient: Sequence[HilbertSpace]) -> LegOperator:
    labels = [s.label for s in ambient]
    try:
        targets = [labels.index(t) for t in target_legs]
    except ValueError as exc:
        raise LegError(f"unknown leg label in {list(target_legs)}") from exc
    if [ambient[t].dim for t in targets] != x.dims:
        raise LegError("dimension mismatch between operator legs and target legs")
    return LegOperator(tuple(ambient), place(x.entries, targets, [s.dim for s in ambient]))


def leg_permute(x: LegOperator, order: Sequence[str]) -> LegOperator:
    perm = [x.labels.index(lab) for lab in order]
    spaces = tuple(x.spaces[p] for p in perm)
    return LegOperator(spaces, permute_legs(x.entries, x.dims, perm))


def slice_op(x: LegOperator, leg: str, functional: np.ndarray) -> LegOperator:
    if leg not in x.labels:
        raise LegError(f"unknown leg {leg!r}")
    k = x.labels.index(leg)
    spaces = tuple(s for s in x.spaces if s.label != leg)
    if not spaces:
        spaces = (HilbertSpace(1, "scalar"),)
    return LegOperator(spaces, slice_leg(x.entries, x.dims, k, np.asarray(functional)))


# ---------------------------------------------------------------------------
# antilinear operators


@dataclass(frozen=True, eq=False)
class AntilinearOperator:
    """ξ ↦ M · conj(ξ)."""

    matrix: np.ndarray

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(xi)

    def then(self, other: "AntilinearOperator") -> np.ndarray:
        """Linear operator ``other ∘ self``."""
        return other.matrix @ np.conj(self.matrix)

    def __mul__(self, other: "AntilinearOperator") -> np.ndarray:
        """Linear operator ``self ∘ other``: matrix M₁ · conj(M₂)."""
        return self.matrix @ np.conj(other.matrix)

    def adjoint(self) -> "AntilinearOperator":
        # ⟨S*ξ, η⟩ = ⟨Sη, ξ⟩ forces matrix part Mᵀ
        return AntilinearOperator(self.matrix.T)

    def conjugate(self, a: np.ndarray) -> np.ndarray:
        """J a J for J = self and a linear operator a."""
        return self.matrix @ np.conj(a) @ np.conj(self.matrix)

    def sandwich(self, a: np.ndarray, right: "AntilinearOperator") -> np.ndarray:
        """self ∘ a ∘ right, which is linear."""
        return self.matrix @ np.conj(a) @ np.conj(right.matrix)

    def tensor(self, other: "AntilinearOperator") -> "AntilinearOperator":
        return AntilinearOperator(np.kron(self.matrix, other.matrix))

    def is_antiunitary(self, tol: float = TOL_IDENTITY) -> bool:
        return unitarity_defect(self.matrix) <= tol


def complex_conjugation(n: int) -> AntilinearOperator:
    return AntilinearOperator(np.eye(n, dtype=complex))


def _psd_power(d: np.ndarray, p: float) -> np.ndarray:
    d = (d + dagger(d)) / 2
    w, v = np.linalg.eigh(d)
    if w.min() <= 0:
        raise np.linalg.LinAlgError("operator is not positive invertible")
    return (v * w**p) @ dagger(v)


def antilinear_polar(s: AntilinearOperator) -> tuple[AntilinearOperator, np.ndarray]:
    """Polar decomposition ``s = J Δ^{1/2}`` of an invertible antilinear operator.

    Returns the antiunitary ``J`` and the positive operator ``Δ = s* s``.
    """
    m = np.asarray(s.matrix, dtype=complex)
    if np.linalg.cond(m) > 1e12:
        raise np.linalg.LinAlgError("antilinear operator is singular")
    delta = m.T @ np.conj(m)
    j = m @ np.conj(_psd_power(delta, -0.5))
    return AntilinearOperator(j), (delta + dagger(delta)) / 2


# ---------------------------------------------------------------------------
# spans


def orthobasis(vectors: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal columns spanning the columns of ``vectors`` (D × k)."""
    if vectors.size == 0 or vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    r = int((s > rtol * s[0]).sum())
    return u[:, :r]


# generators are absorbed this many at a time
SPAN_CHUNK = 96


def _extend_basis(q: np.ndarray, chunk: np.ndarray, floor: float) -> np.ndarray:
    """Append to ``q`` an orthonormal basis of the part of ``chunk`` outside span(q)."""
    r = chunk
    if q.shape[1]:
        # two passes of Gram-Schmidt keep the new columns orthogonal to q
        r = r - q @ (dagger(q) @ r)
        r = r - q @ (dagger(q) @ r)
        # columns already in the span carry no new direction
        r = r[:, np.linalg.norm(r, axis=0) > floor]
        if r.shape[1] == 0:
            return q
    if r.shape[0] > 4 * r.shape[1]:
        # tall chunk: SVD of the triangular factor is much cheaper
        qr, rr = np.linalg.qr(r)
        u, s, _ = np.linalg.svd(rr)
        u = qr @ u
    else:
        u, s, _ = np.linalg.svd(r, full_matrices=False)
    k = int((s > floor).sum())
    if k == 0:
        return q
    return np.hstack([q, u[:, :k]])


def incremental_orthobasis(columns: Iterable[np.ndarray], length: int,
                           rtol: float = RANK_RTOL) -> tuple[np.ndarray, int]:
    """Orthobasis of a stream of vectors, absorbed in chunks to bound memory.

    A residual counts as new when it exceeds ``rtol`` times the largest
    vector norm seen so far.  Returns the basis and the number of vectors read.
    """
    q = np.zeros((length, 0), dtype=complex)
    pending: list[np.ndarray] = []
    scale = 0.0
    count = 0
    for v in columns:
        v = np.asarray(v, dtype=complex).ravel()
        if v.shape[0] != length:
            raise LegError(f"vector of length {v.shape[0]} in a span over length {length}")
        scale = max(scale, float(np.linalg.norm(v)))
        pending.append(v)
        count += 1
        if len(pending) == SPAN_CHUNK:
            q = _extend_basis(q, np.array(pending).T, rtol * scale)
            pending = []
    if pending:
        q = _extend_basis(q, np.array(pending).T, rtol * scale)
    if scale == 0.0:
        return np.zeros((length, 0), dtype=complex), count
    return q, count


class OperatorSpan:
    """Linear span of operators on a fixed ambient space, Frobenius geometry."""

    def __init__(self, generators: Iterable[np.ndarray], dim: int | None = None, rtol: float = RANK_RTOL):
        it = iter(generators)
        if dim is None:
            try:
                first = np.asarray(next(it), dtype=complex)
            except StopIteration:
                raise ValueError("ambient dimension needed for an empty span") from None
            dim = first.shape[0]
            it = chain([first], it)
        self.ambient_dim = dim

        def checked():
            for g in it:
                g = np.asarray(g, dtype=complex)
                if g.shape != (dim, dim):
                    raise LegError(f"generator of shape {g.shape} in span over dimension {dim}")
                yield g

        self.q, self.ngenerators = incremental_orthobasis(checked(), dim * dim, rtol)
        self.q.setflags(write=False)

    @classmethod
    def from_orthobasis(cls, q: np.ndarray, dim: int) -> "OperatorSpan":
        obj = cls.__new__(cls)
        obj.ambient_dim = dim
        obj.q = q
        obj.ngenerators = q.shape[1]
        return obj

    @property
    def dim(self) -> int:
        return self.q.shape[1]

    def basis(self) -> list[np.ndarray]:
        n = self.ambient_dim
        return [np.ascontiguousarray(self.q[:, k]).reshape(n, n) for k in range(self.dim)]

    def project(self, x: np.ndarray) -> np.ndarray:
        v = x.ravel()
        return (self.q @ (dagger(self.q) @ v)).reshape(x.shape)

    def residual(self, x: np.ndarray) -> float:
        """Frobenius distance of ``x`` to the span, relative to ``max(‖x‖, 1)``."""
        r = np.linalg.norm(x - self.project(x))
        return float(r / max(np.linalg.norm(x), 1.0))

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        return dagger(self.q) @ x.ravel()

    def _check_ambient(self, other: "OperatorSpan"):
        if self.ambient_dim != other.ambient_dim:
            raise LegError("spans live on different ambient spaces")

    def containment_defect(self, other: "OperatorSpan") -> float:
        """Operator norm of ``(1 - P_self) P_other``; zero iff other ⊆ self."""
        self._check_ambient(other)
        if other.dim == 0:
            return 0.0
        r = other.q - self.q @ (dagger(self.q) @ other.q)
        return opnorm(r)

    def distance(self, other: "OperatorSpan") -> float:
        """‖P_self - P_other‖ in operator norm."""
        self._check_ambient(other)
        if self.dim != other.dim:
            return 1.0
        if self.dim == 0:
            return 0.0
        return max(self.containment_defect(other), other.containment_defect(self))

    def contains(self, other: "OperatorSpan", tol: float = TOL_SPAN) -> bool:
        return self.containment_defect(other) <= tol

    def equals(self, other: "OperatorSpan", tol: float = TOL_SPAN) -> bool:
        return self.distance(other) <= tol

    def adjoint_defect(self) -> float:
        """Largest residual of x* for x in the orthobasis."""
        return max((self.residual(dagger(b)) for b in self.basis()), default=0.0)

    def product_defect(self, other: "OperatorSpan | None" = None) -> float:
        """Largest residual in ``self`` of products ``x y``, x ∈ self, y ∈ other."""
        other = self if other is None else other
        worst = 0.0
        ob = other.basis()
        for x in self.basis():
            prods = np.array([(x @ y).ravel() for y in ob]).T
            if prods.size:
                r = prods - self.q @ (dagger(self.q) @ prods)
                worst = max(worst, float(np.linalg.norm(r, axis=0).max()))
        return worst

    def center_dim(self) -> int:
        """Dimension of {x ∈ span : xy = yx for all y in span}, by a linear solve."""
        b = self.basis()
        if not b:
            return 0
        rows = []
        for y in b:
            rows.append(np.array([(x @ y - y @ x).ravel() for x in b]).T)
        m = np.vstack(rows)
        s = np.linalg.svd(m, compute_uv=False)
        tol = RANK_RTOL * max(s[0] if s.size else 0.0, 1.0)
        return len(b) - int((s > tol).sum())


def span_equal(a: OperatorSpan, b: OperatorSpan, tol: float = TOL_SPAN) -> bool:
    return a.equals(b, tol)


def span_contains(a: OperatorSpan, b: OperatorSpan, tol: float = TOL_SPAN) -> bool:
    return a.contains(b, tol)


def span_dim(a: OperatorSpan) -> int:
    return a.dim


def product_span(xs: Sequence[np.ndarray], ys: Sequence[np.ndarray], rtol: float = RANK_RTOL) -> OperatorSpan:
    """Span of all products x·y."""
    return OperatorSpan([x @ y for x in xs for y in ys], dim=xs[0].shape[0], rtol=rtol)


def tensor_span(a: OperatorSpan, b: OperatorSpan) -> OperatorSpan:
    return OperatorSpan([np.kron(x, y) for x in a.basis() for y in b.basis()],
                        dim=a.ambient_dim * b.ambient_dim)


def nullspace(m: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker m."""
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(m)
    tol = rtol * max(s[0] if s.size else 0.0, 1.0)
    r = int((s > tol).sum())
    return dagger(vh[r:])
