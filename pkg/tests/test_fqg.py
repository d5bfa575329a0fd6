import numpy as np
import pytest

from qdeform import fqg
from qdeform.tensorkit import OperatorSpan, blocks, dagger, flip, opnorm, place, span_equal

GROUPS = {
    "Z1": fqg.cyclic(1),
    "Z2": fqg.cyclic(2),
    "Z3": fqg.cyclic(3),
    "Z4": fqg.cyclic(4),
    "Z2xZ2": fqg.abelian(2, 2),
    "S3": fqg.symmetric(3),
}
KINDS = {"function": fqg.function_algebra, "group": fqg.group_algebra}


def all_quantum_groups():
    return [pytest.param(KINDS[k](g), id=f"{k}-{name}") for name, g in GROUPS.items() for k in KINDS]


def pentagon(u, n):
    d = [n] * 3
    return opnorm(place(u, [0, 1], d) @ place(u, [0, 2], d) @ place(u, [1, 2], d) - place(u, [1, 2], d) @ place(u, [0, 1], d))


def test_group_tables():
    s3 = GROUPS["S3"]
    assert s3.order == 6 and not s3.is_abelian
    for g in GROUPS.values():
        m, e, inv = g.mult, g.identity, g.inverse
        assert all(m[x, inv[x]] == e and m[inv[x], x] == e for x in range(g.order))


def test_parse_group_formats():
    g = fqg.parse_group("group Z3 order 3\ntable\n0 1 2\n1 2 0\n2 0 1\n")
    assert g.order == 3 and g.is_abelian
    a = fqg.parse_group("# comment\ngroup K order 4\nabelian 2 2\n")
    assert np.array_equal(a.mult, fqg.abelian(2, 2).mult)
    assert np.array_equal(fqg.parse_group(fqg.format_group(GROUPS["S3"])).mult, GROUPS["S3"].mult)


@pytest.mark.parametrize("text, fragment", [
    ("group X order 2\ntable\n0 1\n0 1\n", "column 0 repeats 0 at cell (1, 0)"),
    ("group X order 2\ntable\n0 0\n1 0\n", "row 0 repeats 0 at cell (0, 1)"),
    ("group X order 3\nabelian 2\n", "declared order"),
    ("grp X\n", "header"),
    ("group X order 2\ntable\n0 1\n", "2 rows"),
])
def test_parse_group_errors(text, fragment):
    with pytest.raises(fqg.GroupError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        fqg.parse_group(text)


def test_non_associative_latin_square_rejected():
    # a Latin square of order 5 with identity 0 that is not a group (a loop)
    rows = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(fqg.GroupError, match="associative"):
        fqg.FiniteGroup("loop", np.array(rows))


@pytest.mark.parametrize("q", all_quantum_groups())
def test_structure_invariants(q):
    r = q.structure_report()
    assert r.passed, [(c.name, c.defect) for c in r.failures()]
    for u in (q.W, q.W_hat, q.V):
        assert pentagon(u, q.n) <= 1e-10


def test_group_algebra_w_hat_on_basis_z2():
    q = fqg.group_algebra(GROUPS["Z2"])
    e = np.eye(2)
    # Ŵ(δ_1⊗δ_1) = δ_1⊗δ_0
    assert np.allclose(q.W_hat @ np.kron(e[1], e[1]), np.kron(e[1], e[0]))
    assert np.allclose(q.W_hat @ np.kron(e[1], e[0]), np.kron(e[1], e[1]))


def test_trivial_group_structure_is_identity():
    for make in KINDS.values():
        q = make(GROUPS["Z1"])
        assert np.allclose(q.W, 1) and np.allclose(q.V, 1) and np.allclose(q.J.matrix, 1)


def test_function_algebra_z2_dual_span_is_flip():
    q = fqg.function_algebra(GROUPS["Z2"])
    lam = np.array([[0, 1], [1, 0]])
    assert span_equal(q.M_hat, OperatorSpan([np.eye(2), lam], dim=2))
    assert q.M.dim == 2 and q.is_commutative


@pytest.mark.parametrize("name", list(GROUPS))
def test_function_algebra_conjugation_is_entrywise(name):
    q = fqg.function_algebra(GROUPS[name])
    x = np.diag(np.arange(q.n) + 1j * np.arange(q.n) ** 2)
    assert np.allclose(q.J.conjugate(x), np.conj(x))


@pytest.mark.parametrize("name", list(GROUPS))
def test_duality_between_constructors(name):
    g = GROUPS[name]
    fa, ga = fqg.function_algebra(g), fqg.group_algebra(g)
    assert span_equal(fa.M, fqg.dual(ga).M)
    assert span_equal(fqg.dual(fa).M, ga.M)
    assert np.array_equal(fqg.dual(fa).W, fa.W_hat)
    assert np.allclose(fqg.dual(fa).W_hat, flip(fa.n) @ dagger(fa.W_hat) @ flip(fa.n))


@pytest.mark.parametrize("name", ["Z3", "S3"])
def test_biduality(name):
    q = fqg.group_algebra(GROUPS[name])
    qq = fqg.dual(fqg.dual(q))
    assert span_equal(qq.M, q.M) and span_equal(qq.M_hat, q.M_hat)


def test_gns_group_algebra_z3():
    q = fqg.group_algebra(GROUPS["Z3"])
    lam, j = fqg.gns(q)
    e = np.eye(3)
    lambdas = [blk for blk in blocks(q.W_hat, 3) if np.count_nonzero(blk) == 3]
    # Λ(λ_s) = δ_s for the translation operators λ_s δ_t = δ_{st}
    for s in range(3):
        ls = np.zeros((3, 3))
        for t in range(3):
            ls[(s + t) % 3, t] = 1
        assert np.allclose(lam(ls), e[s])
        assert np.allclose(j(e[s]), e[(-s) % 3])
    assert opnorm(j * j - np.eye(3)) < 1e-12
    assert len(lambdas) == 3


def test_gns_function_algebra_z2():
    q = fqg.function_algebra(GROUPS["Z2"])
    lam, j = fqg.gns(q)
    assert np.allclose(lam(np.diag([1.0, 0.0])), [1, 0])
    assert np.allclose(j.matrix, np.eye(2))


@pytest.mark.parametrize("q", all_quantum_groups())
def test_recomputed_modular_conjugations(q):
    _, j = fqg.gns(q)
    assert opnorm(j.matrix - q.J.matrix) < 1e-10
    _, jh = fqg.gns(fqg.dual(q))
    assert opnorm(jh.matrix - q.J_hat.matrix) < 1e-10


@pytest.mark.parametrize("name", ["Z2", "Z3", "Z4", "Z2xZ2"])
def test_abelian_dual_commutative(name):
    q = fqg.function_algebra(GROUPS[name])
    d = fqg.dual(q)
    assert d.is_commutative and d.M.dim == q.n


def test_from_multiplicative_unitary_recovers_data():
    q = fqg.group_algebra(GROUPS["S3"])
    r = fqg.from_multiplicative_unitary(q.W, kind="rebuilt")
    assert r.structure_report().passed
    assert span_equal(r.M, q.M) and span_equal(r.M_hat, q.M_hat)


def test_points_of_function_algebra():
    q = fqg.function_algebra(GROUPS["Z3"])
    pts = q.points
    assert len(pts) == 3
    assert all(opnorm(p @ p - p) < 1e-10 for p in pts)
    assert opnorm(sum(pts) - np.eye(3)) < 1e-10
