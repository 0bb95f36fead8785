from fractions import Fraction

import hypothesis.strategies as st
import pytest
import sympy
from hypothesis import given

from atomlab.errors import InsufficientOrder, InvalidCI, NotFano
from atomlab.exactalg import PolyQ, charpoly
from atomlab.qde import (
    CompleteIntersection,
    JumpMatrix,
    build_qde,
    eliminate,
    fit_jump_matrix_from_series,
    givental_series,
    grading,
    small_connection,
    solve_jump_matrix,
)

q_, u_, P_ = sympy.symbols("q u P")

QUADRIC3 = CompleteIntersection(5, (2,))
CUBIC3 = CompleteIntersection(5, (3,))
CUBIC4 = CompleteIntersection(6, (3,))


def fano_cis():
    out = []
    for N in range(3, 8):
        for degs in ((2,), (3,), (4,), (2, 2), (2, 3)):
            try:
                ci = CompleteIntersection(N, degs)
            except InvalidCI:
                continue
            if ci.index >= 1:
                out.append(ci)
    return out


def rows(A: JumpMatrix):
    return A.to_strings()


def sympy_qde_on(ci, s):
    """Apply the quantum differential operator, written out directly, to q^s."""
    D = lambda g: sympy.expand(u_ * q_ * sympy.diff(g, q_))
    f = q_**s
    lhs = f
    for _ in range(ci.N - ci.k):
        lhs = D(lhs)
    rhs = f
    for d in ci.degrees:
        for m in range(1, d):
            rhs = sympy.expand(u_ * (d * q_ * sympy.diff(rhs, q_) + m * rhs))
        rhs = d * rhs
    return sympy.expand(lhs - (-1) ** ci.index * q_ * rhs)


# -- CompleteIntersection


def test_ci_invariants():
    assert (CUBIC4.dim, CUBIC4.index, CUBIC4.degree, CUBIC4.k) == (4, 3, 3, 1)
    ci = CompleteIntersection(7, (2, 3))
    assert (ci.d_tot, ci.dim, ci.index, ci.degree) == (5, 4, 2, 6)


@pytest.mark.parametrize(
    "N, degs",
    [(2, (2,)), (5, ()), (5, (1,)), (5, (3, 3)), (3, (2, 2))],
)
def test_ci_rejects(N, degs):
    with pytest.raises(InvalidCI):
        CompleteIntersection(N, degs)


# -- build_qde


def test_qde_quadric_threefold():
    assert str(build_qde(QUADRIC3)) == "D^4 + 4*q*D + 2*q*u"


@pytest.mark.parametrize("ci", fano_cis() + [CompleteIntersection(5, (5,))], ids=lambda c: c.label())
def test_qde_matches_direct_expansion(ci):
    L = build_qde(ci)
    for s in range(3):
        ours = sum(
            sympy.Rational(c.numerator, c.denominator) * q_**i * u_**j
            for (i, j), c in L.apply_to_monomial(s).items()
        )
        assert sympy.expand(ours - sympy_qde_on(ci, s)) == 0


def test_qde_cubic_threefold_rhs():
    L = build_qde(CUBIC3)
    # rhs factor 3 (3D + u)(3D + 2u); on q^0 only 6 u^2 q survives
    assert L.order == 4
    assert sympy.expand(
        sum(
            sympy.Rational(c.numerator, c.denominator) * q_**i * u_**j
            for (i, j), c in L.apply_to_monomial(0).items()
        )
    ) == -6 * q_ * u_**2


# -- Givental series


@pytest.mark.parametrize("ci", fano_cis(), ids=lambda c: c.label())
def test_givental_d0_is_unit(ci):
    s = givental_series(ci, 1)
    assert s.vector(0) == [1] + [0] * ci.dim


@pytest.mark.parametrize("ci", [QUADRIC3, CUBIC3, CUBIC4, CompleteIntersection(7, (2, 3))], ids=lambda c: c.label())
def test_givental_d1_matches_sympy_series(ci):
    num = sympy.Integer(1)
    for d in ci.degrees:
        for m in range(1, d + 1):
            num *= d * P_ + m
    expr = sympy.series(num / (P_ + 1) ** ci.N, P_, 0, ci.dim + 1).removeO()
    ref = [sympy.Poly(expr, P_).coeff_monomial(P_**a) for a in range(ci.dim + 1)]
    ours = givental_series(ci, 1).vector(1)
    assert [sympy.Rational(x.numerator, x.denominator) for x in ours] == ref


def test_givental_constants():
    assert givental_series(QUADRIC3, 1).vector(1)[0] == 2
    assert givental_series(CUBIC4, 1).vector(1)[0] == 6


def test_givental_rejects_order_zero():
    with pytest.raises(ValueError):
        givental_series(QUADRIC3, 0)


# -- jump matrices


def test_quadric_threefold_matrix():
    assert rows(solve_jump_matrix(QUADRIC3)) == [
        ["0", "0", "2*q", "0"],
        ["1", "0", "0", "2*q"],
        ["0", "1", "0", "0"],
        ["0", "0", "1", "0"],
    ]


def test_cubic_fourfold_matrix():
    A = rows(solve_jump_matrix(CUBIC4))
    expected = [["0"] * 5 for _ in range(5)]
    for i in range(4):
        expected[i + 1][i] = "1"
    expected[0][2], expected[1][3], expected[2][4] = "6*q", "15*q", "6*q"
    assert A == expected


def test_cubic_threefold_matrix():
    A = solve_jump_matrix(CUBIC3)
    lin = A.q_coefficient(1)
    assert (lin[0][1], lin[1][2], lin[2][3]) == (6, 15, 6)
    assert A[0, 3] == PolyQ([0, 0, 36])
    # dropping the q^2 entry breaks the QDE
    assert eliminate(3, 2, {(1, 0, 1): 6, (1, 1, 2): 15, (1, 2, 3): 6}) != build_qde(CUBIC3)
    assert eliminate(3, 2, {(1, 0, 1): 6, (1, 1, 2): 15, (1, 2, 3): 6, (2, 0, 3): 36}) == build_qde(CUBIC3)


@pytest.mark.parametrize("ci", fano_cis(), ids=lambda c: c.label())
def test_two_routes_agree_with_shape(ci):
    A = solve_jump_matrix(ci)
    assert fit_jump_matrix_from_series(ci) == A
    assert A.has_jump_shape(ci.index)
    assert A.is_centrosymmetric()
    n = A.size
    assert A.at(0) == [[Fraction(1 if i == j + 1 else 0) for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("ci", fano_cis(), ids=lambda c: c.label())
def test_minimal_series_order_suffices(ci):
    need = -(-(ci.dim + 1) // ci.index)
    assert fit_jump_matrix_from_series(ci, need) == solve_jump_matrix(ci)
    if need > 1:
        with pytest.raises(InsufficientOrder):
            fit_jump_matrix_from_series(ci, need - 1)


def test_insufficient_order_quadric():
    with pytest.raises(InsufficientOrder):
        fit_jump_matrix_from_series(CUBIC4, 1)


def test_calabi_yau_rejected():
    cy = CompleteIntersection(5, (5,))
    with pytest.raises(NotFano):
        fit_jump_matrix_from_series(cy, 3)
    with pytest.raises(NotFano):
        solve_jump_matrix(cy)
    with pytest.raises(NotFano):
        small_connection(cy)


# -- small connection


def test_small_connection_examples():
    c3 = small_connection(CUBIC3)
    assert c3.K == c3.A.scaled(2)
    assert c3.G == tuple(Fraction(x, 2) for x in (-3, -1, 1, 3))
    c4 = small_connection(CUBIC4)
    assert c4.K == c4.A.scaled(3)
    assert c4.G == (-2, -1, 0, 1, 2)
    assert small_connection(QUADRIC3).K == solve_jump_matrix(QUADRIC3).scaled(3)


def test_cubic_fourfold_charpoly():
    K = small_connection(CUBIC4).K.at(1)
    assert charpoly(K) == PolyQ([0, 0, -729, 0, 0, 1])


@given(st.integers(1, 12))
def test_grading_properties(n):
    g = grading(n)
    assert sum(g) == 0
    assert all(b - a == 1 for a, b in zip(g, g[1:]))
