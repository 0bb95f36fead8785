import json
from fractions import Fraction

import hypothesis.strategies as st
import numpy as np
import pytest
import sympy
from hypothesis import given

from atomlab.blowup import (
    BlowupScenario,
    blp3pt,
    build_blowup_kappa,
    build_gr_kappa,
    cluster_verify,
    eigenvalues,
    predicted_centers,
    split_cohomology_dims,
)
from atomlab.errors import ClusterMismatch, DimensionMismatch

lam = sympy.symbols("lam")


def zero(r, c):
    return [[0] * c for _ in range(r)]


def bare(hx, hz, r, Qhat=1, epsilon=1):
    return BlowupScenario(
        dimHX=hx, dimHZ=hz, r=r, KX=zero(hx, hx), KZminusC1=zero(hz, hz),
        iota_lower=zero(hx, hz), iota_upper=zero(hz, hx),
        chern=tuple(zero(hz, hz) for _ in range(r - 2)), Qhat=Qhat, epsilon=epsilon,
    )


@st.composite
def scenarios(draw, epsilon=Fraction(1, 10**4)):
    hx = draw(st.integers(1, 3))
    hz = draw(st.integers(1, 2))
    r = draw(st.integers(2, 5))
    ent = st.integers(-3, 3)
    mat = lambda a, b: [[draw(ent) for _ in range(b)] for _ in range(a)]
    return BlowupScenario(
        dimHX=hx, dimHZ=hz, r=r, KX=mat(hx, hx), KZminusC1=mat(hz, hz),
        iota_lower=mat(hx, hz), iota_upper=mat(hz, hx),
        chern=tuple(mat(hz, hz) for _ in range(r - 2)), c1=mat(hz, hz),
        Qhat=draw(st.integers(1, 3)), epsilon=epsilon,
    )


def test_blp3pt_matrix_shape():
    s = blp3pt(epsilon=1)
    M = build_blowup_kappa(s)
    assert len(M) == 6 and s.rank == 6
    expected = [
        [0, 0, 0, 0, 0, 0],
        [-4, 0, 0, 0, 0, 0],
        [0, -4, 0, 0, 0, 0],
        [0, 0, -4, 0, 0, 2],
        [-2, 0, 0, 0, 0, 2],
        [0, 0, 0, 0, -2, 0],
    ]
    assert M == expected


def test_blp3pt_gr_nonzeros():
    G = build_gr_kappa(blp3pt())
    nz = {(i, j): x for i, row in enumerate(G) for j, x in enumerate(row) if x}
    assert nz == {(4, 0): -2, (4, 5): 2, (5, 4): -2}


def test_blp3pt_clusters():
    s = blp3pt()
    rep = cluster_verify(build_blowup_kappa(s), s, 0.1)
    assert rep.sizes == (4, 1, 1)
    assert np.allclose(rep.centers, [0, 2j, -2j])
    # every geometric block is degree raising, so the spectrum is exact
    assert sorted(eigenvalues(build_blowup_kappa(s)), key=lambda z: z.imag) == [-2j, 0, 0, 0, 0, 2j]


def test_qhat_zero_single_cluster():
    s = blp3pt(Qhat=0)
    rep = cluster_verify(build_gr_kappa(s), s)
    assert rep.sizes == (6,)
    assert all(abs(z) < 1e-12 for z in eigenvalues(build_gr_kappa(s)))


def test_r5_centers():
    s = bare(1, 1, 5)
    rep = cluster_verify(build_blowup_kappa(s), s)
    assert rep.sizes == (1, 1, 1, 1, 1)
    want = [4 * np.exp(1j * np.pi * (2 * j - 1) / 4) for j in range(1, 5)]
    got = rep.centers[1:]
    assert all(min(abs(w - g) for g in got) < 1e-12 for w in want)


def test_r2_corner():
    s = BlowupScenario(dimHX=1, dimHZ=1, r=2, KX=[[0]], KZminusC1=[[3]], iota_lower=[[0]],
                       iota_upper=[[1]], c1=[[5]], Qhat=2, epsilon=1)
    M = build_blowup_kappa(s)
    # single Z block: diagonal K_Z plus corner (Qhat + c1), with K_Z = 3 + 5
    assert M[1][1] == (3 + 5) + (2 + 5)
    assert M[1][0] == -1


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
def test_gr_z_part_charpoly(r):
    s = bare(1, 1, r, Qhat=Fraction(3, 2))
    G = build_gr_kappa(s)
    Z = sympy.Matrix([[sympy.nsimplify(x) for x in row[1:]] for row in G[1:]])
    ref = sympy.expand(lam ** (r - 1) - (-1) ** r * (r - 1) ** (r - 1) * sympy.Rational(3, 2))
    assert sympy.expand(Z.charpoly(lam).as_expr() - ref) == 0
    got = sorted(predicted_centers(s), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    ref_roots = sorted((complex(z) for z in sympy.Poly(ref, lam).nroots(n=30)), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    assert np.allclose(got, ref_roots)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_qhat_scaling(r):
    c1 = predicted_centers(bare(1, 1, r, Qhat=1))
    c2 = predicted_centers(bare(1, 1, r, Qhat=2 ** (r - 1)))
    assert np.allclose(sorted(np.array(c1) * 2, key=np.angle), sorted(c2, key=np.angle))
    ev1 = eigenvalues(build_gr_kappa(bare(1, 1, r, Qhat=1)))
    ev2 = eigenvalues(build_gr_kappa(bare(1, 1, r, Qhat=2 ** (r - 1))))
    nz1 = sorted((2 * z for z in ev1 if abs(z) > 1e-9), key=np.angle)
    nz2 = sorted((z for z in ev2 if abs(z) > 1e-9), key=np.angle)
    assert np.allclose(nz1, nz2)


@given(scenarios())
def test_gr_is_epsilon_zero(s):
    zeroed = BlowupScenario(**{**s.__dict__, "epsilon": Fraction(0)})
    assert build_gr_kappa(s) == build_blowup_kappa(zeroed)


@given(scenarios())
def test_random_scenarios_cluster(s):
    M = build_blowup_kappa(s)
    rep = cluster_verify(M, s, radius=0.05 * float(s.Qhat) ** (1 / (s.r - 1)))
    assert sum(rep.sizes) == s.rank
    ref = np.linalg.eigvals(np.array(M, dtype=float))
    ours = np.array(eigenvalues(M))
    for z in ours:
        assert np.min(np.abs(ref - z)) < 1e-4


def test_cluster_mismatch_reports_observed():
    s = blp3pt(epsilon=1)
    M = build_blowup_kappa(s)
    M[0][0] = Fraction(1)  # move one eigenvalue out of every disk
    with pytest.raises(ClusterMismatch) as err:
        cluster_verify(M, s, 0.1)
    assert sum(err.value.observed.sizes) == 5


def test_cluster_rejects_wrong_size_and_overlap():
    s = blp3pt()
    with pytest.raises(DimensionMismatch):
        cluster_verify([[0]], s)
    with pytest.raises(ClusterMismatch):
        cluster_verify(build_blowup_kappa(s), s, radius=1.5)


def test_scenario_validation():
    with pytest.raises(DimensionMismatch):
        bare(1, 1, 1)
    with pytest.raises(DimensionMismatch):
        BlowupScenario(dimHX=2, dimHZ=1, r=2, KX=[[0]], KZminusC1=[[0]], iota_lower=[[0], [0]], iota_upper=[[0, 0]])
    with pytest.raises(DimensionMismatch):
        BlowupScenario(dimHX=1, dimHZ=1, r=3, KX=[[0]], KZminusC1=[[0]], iota_lower=[[0]], iota_upper=[[0]])


@given(scenarios())
def test_json_round_trip(s):
    doc = json.loads(json.dumps(s.to_dict()))
    assert BlowupScenario.from_dict(doc) == s


def test_json_missing_keys():
    with pytest.raises(ValueError):
        BlowupScenario.from_json('{"dimHX": 1}')


def test_split_cohomology_example():
    assert split_cohomology_dims([1, 0, 1, 0, 1, 0, 1], [1], 3) == [1, 0, 2, 0, 2, 0, 1]
    with pytest.raises(DimensionMismatch):
        split_cohomology_dims([1], [1], 1)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=8), st.lists(st.integers(0, 9), min_size=1, max_size=6),
       st.integers(2, 5))
def test_split_cohomology_additive(bX, bZ, r):
    out = split_cohomology_dims(bX, bZ, r)
    assert sum(out) == sum(bX) + (r - 1) * sum(bZ)
    for k, b in enumerate(out):
        assert b == (bX[k] if k < len(bX) else 0) + sum(
            bZ[k - 2 * i] for i in range(1, r) if 0 <= k - 2 * i < len(bZ)
        )
