from fractions import Fraction

import hypothesis.strategies as st
import numpy as np
import pytest
import sympy
from hypothesis import assume, given

from atomlab.errors import NotCommuting, NotDegreeRaising
from atomlab.exactalg import identity, mat_mul
from atomlab.fbundle import (
    ConnectionGerm,
    blocks_to_matrix,
    cyclic_vector_check,
    dilation,
    exponential_shift,
    external_sum,
    generated_algebra,
    germ_from_connection,
    krylov_rank,
    nef_gauge_check,
    power_shift,
    projector_defects,
    residual_kappa,
    spectral_split,
)
from atomlab.qde import CompleteIntersection, small_connection

from conftest import degree_raising, fractions, rational_matrices

u_ = sympy.symbols("u", positive=True)
CUBIC4 = small_connection(CompleteIntersection(6, (3,)))


def germ(kappa, grading=None):
    n = len(kappa)
    return ConnectionGerm(tuple(map(tuple, kappa)), tuple(grading or [0] * n))


def eig_sorted(m):
    vals = np.linalg.eigvals(np.array([[float(x) for x in r] for r in m], dtype=complex)) if len(m) else []
    return sorted(vals, key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def spectrum_points(sp):
    pts = []
    for e in sp:
        pts += [e.value] * e.multiplicity
    return sorted(pts, key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def close_multisets(a, b, tol=1e-6):
    if len(a) != len(b):
        return False
    left = list(b)
    for z in a:
        j = min(range(len(left)), key=lambda k: abs(left[k] - z))
        if abs(left[j] - z) > tol:
            return False
        left.pop(j)
    return True


# -- residual endomorphism


def test_residual_kappa_cubic_fourfold():
    base = [[0, 0, 6, 0, 0], [1, 0, 0, 15, 0], [0, 1, 0, 0, 6], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]]
    assert residual_kappa(CUBIC4, 1) == [[3 * x for x in r] for r in base]


def test_residual_kappa_classical_limit():
    k0 = residual_kappa(CUBIC4, 0)
    assert k0 == [[3 if i == j + 1 else 0 for j in range(5)] for i in range(5)]


def test_residual_kappa_quadric():
    conn = small_connection(CompleteIntersection(5, (2,)))
    assert residual_kappa(conn, 1) == [[3 * x for x in r] for r in conn.A.at(1)]


def test_germ_from_connection_grading():
    g = germ_from_connection(CUBIC4)
    assert g.grading == (-2, -1, 0, 1, 2)
    assert g.degrees == (0, 2, 4, 6, 8)


def test_germ_rejects_inconsistent_grading():
    with pytest.raises(ValueError):
        ConnectionGerm(((0,),), (1,), (0,), 0)


# -- spectral split


def test_split_cubic_fourfold():
    split = spectral_split(residual_kappa(CUBIC4, 1))
    by_dim = sorted((b.dimension, round(abs(b.eigenvalue), 9)) for b in split)
    assert by_dim == [(1, 9.0), (1, 9.0), (1, 9.0), (2, 0.0)]
    args = sorted(round(np.angle(b.eigenvalue), 9) for b in split if b.dimension == 1)
    assert np.allclose(args, [-2 * np.pi / 3, 0, 2 * np.pi / 3])
    d = projector_defects(split, residual_kappa(CUBIC4, 1))
    assert max(d.values()) < 1e-8


def test_split_identity_and_diagonal():
    s = spectral_split(identity(3))
    assert s.dims() == [3]
    assert np.allclose(s.blocks[0].projector, np.eye(3))
    s = spectral_split([[1, 0], [0, 2]])
    got = {round(b.eigenvalue.real): b.projector for b in s}
    assert np.allclose(got[1], np.diag([1, 0]))
    assert np.allclose(got[2], np.diag([0, 1]))
    assert all(b.exact_projector is not None for b in s)


@given(rational_matrices(max_n=5, bound=4))
def test_projector_identities(m):
    split = spectral_split(m)
    assert sum(split.dims()) == len(m)
    d = projector_defects(split, m)
    assert d["rank"] == 0
    for key in ("idempotent", "orthogonal", "partition", "commute"):
        assert d[key] < 1e-8, key


@given(rational_matrices(max_n=5, bound=4))
def test_split_eigenvalues_match_numpy(m):
    split = spectral_split(m)
    ours = spectrum_points(split.spectrum)
    assert close_multisets(ours, eig_sorted(m), tol=1e-3)


# -- external sum and symmetries


def test_external_sum_rank_one():
    c = external_sum(germ([[2]]), germ([[5]]))
    assert c.kappa_matrix() == [[2, 0], [0, 5]]
    empty = ConnectionGerm((), ())
    g = germ([[1, 2], [3, 4]], [Fraction(-1, 2), Fraction(1, 2)])
    assert external_sum(g, empty) == g
    assert external_sum(empty, g) == g


@given(rational_matrices(max_n=3, bound=4), rational_matrices(max_n=3, bound=4))
def test_external_sum_spectrum_union(a, b):
    c = external_sum(germ(a), germ(b))
    assert c.rank == len(a) + len(b)
    ours = spectrum_points(c.spectrum(1e-9))
    union = eig_sorted(a) + eig_sorted(b)
    assert close_multisets(ours, union, tol=1e-3)


def test_dilation_examples():
    g = germ([[4, 0], [0, 6]])
    assert dilation(g, 1) == g
    assert dilation(g, 2).kappa_matrix() == [[2, 0], [0, 3]]
    with pytest.raises(ValueError):
        dilation(g, 0)


@given(rational_matrices(max_n=4, bound=4), fractions(), fractions())
def test_dilation_group_law(m, a, b):
    assume(a != 0 and b != 0)
    g = germ(m)
    assert dilation(dilation(g, a), b) == dilation(g, a * b)
    ours = spectrum_points(dilation(g, a).spectrum(1e-9))
    assert close_multisets(ours, [z / float(a) for z in eig_sorted(m)], tol=1e-3)


def test_exponential_shift_examples():
    g = germ([[0, 0], [0, 9]])
    assert exponential_shift(g, 0) == g
    assert exponential_shift(g, 1).kappa_matrix() == [[1, 0], [0, 10]]


@given(rational_matrices(max_n=4, bound=4), fractions(), fractions())
def test_exponential_shifts_add_and_translate(m, a, b):
    g = germ(m)
    assert exponential_shift(exponential_shift(g, a), b) == exponential_shift(g, a + b)
    before = g.spectrum(1e-9)
    after = exponential_shift(g, a).spectrum(1e-9)
    assert len(before) == len(after)
    assert close_multisets(spectrum_points(after), [z + float(a) for z in spectrum_points(before)], 1e-6)


def test_power_shift_examples():
    g = germ([[0, 0], [1, 0]], [Fraction(-1, 2), Fraction(1, 2)])
    assert power_shift(g, 0) == g
    assert power_shift(g, Fraction(1, 2)).grading == (0, 1)


@given(rational_matrices(max_n=4, bound=4), fractions(), fractions())
def test_power_shift_keeps_kappa_and_adds(m, a, b):
    g = germ(m)
    s = power_shift(power_shift(g, a), b)
    assert s.kappa == g.kappa
    assert s.grading == power_shift(g, a + b).grading


# -- maximality


def test_cyclic_examples():
    assert cyclic_vector_check([[[1, 0], [0, 2]]], [1, 1]) == "Maximal"
    assert cyclic_vector_check([identity(2)], [1, 0]) == "Neither"
    J = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    assert cyclic_vector_check([J], [0, 0, 1]) == "Maximal"
    assert cyclic_vector_check([J, mat_mul(J, J), J], [0, 0, 1]) == "Overmaximal"
    assert cyclic_vector_check([J], [1, 0, 0]) == "Neither"


def test_cyclic_rejects_noncommuting():
    with pytest.raises(NotCommuting) as err:
        cyclic_vector_check([[[1, 0], [0, 2]], [[0, 1], [0, 0]]], [1, 1])
    assert err.value.pair == (0, 1)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4), st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_maximal_implies_full_algebra(diag, h):
    n = len(diag)
    M = [[Fraction(diag[i]) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    verdict = cyclic_vector_check([M], h[:n])
    if verdict == "Maximal":
        assert len(generated_algebra([M])) == n
        assert krylov_rank([M], h[:n]) == n
    # diagonal case: cyclic iff distinct eigenvalues and h has full support
    cyclic = len(set(diag)) == n and all(h[:n])
    assert (verdict != "Neither") == cyclic


# -- nef gauge


def sympy_gauge(degs, D, kappa):
    """Independent gauge computation with sympy matrices."""
    n = len(degs)
    T = [(d - D) % 2 for d in degs]
    Gr = sympy.diag(*[sympy.Rational(d - D, 2) for d in degs])
    Tm = sympy.diag(*[sympy.Rational(t, 2) for t in T])
    K = sympy.Matrix(n, n, lambda i, j: sympy.Rational(kappa[i][j].numerator, kappa[i][j].denominator))
    omega = -K / u_**2 + Gr / u_ + Tm / u_
    g = Gr + Tm
    ug = sympy.diag(*[u_ ** g[i, i] for i in range(n)])
    ugi = sympy.diag(*[u_ ** (-g[i, i]) for i in range(n)])
    new = sympy.simplify(ug * omega * ugi - g / u_)
    return new


def test_gauge_zero_kappa():
    g = ConnectionGerm.from_degrees([[0] * 3] * 3, [0, 2, 4], 2)
    r = nef_gauge_check(g)
    assert r.ok and r.pole_order == 0
    assert all(x == 0 for row in r.residue for x in row)


def test_gauge_rejects_non_raising():
    g = ConnectionGerm.from_degrees([[0, 1], [0, 0]], [0, 2], 1)
    with pytest.raises(NotDegreeRaising):
        nef_gauge_check(g)


def test_gauge_blocks_interface():
    degs = [0, 2, 4]
    blocks = {(0, 1): [[5]], (2, 1): [[7]], (0, 2): [[1]]}
    k = blocks_to_matrix(degs, blocks)
    assert k == [[0, 0, 0], [5, 0, 0], [1, 7, 0]]
    g = ConnectionGerm.from_degrees(k, degs, 2)
    r = nef_gauge_check(g, blocks)
    assert r.ok and r.pole_order == 1
    R = [list(row) for row in r.residue]
    assert mat_mul(mat_mul(R, R), R) == [[0] * 3] * 3


@given(degree_raising(max_dim=7))
def test_gauge_matches_sympy(data):
    degs, D, kappa = data
    g = ConnectionGerm.from_degrees(kappa, degs, D)
    r = nef_gauge_check(g)
    assert r.ok and r.pole_order <= 1 and r.residue_nilpotent and r.residue_lowers_degree
    ref = sympy_gauge(degs, D, kappa)
    n = len(degs)
    for i in range(n):
        for j in range(n):
            expected = ref[i, j]
            ours = sum(
                sympy.Rational(m[i][j].numerator, m[i][j].denominator) * u_**e for e, m in r.coefficients.items()
            )
            assert sympy.simplify(expected - ours) == 0
