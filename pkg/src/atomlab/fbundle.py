"""Germ-level F-bundle operations at a single base point.

A germ is recorded by its residual endomorphism ``kappa`` (the action of
``nabla_{u^2 d/du}`` at ``u = 0``) and its grading operator; the connection in
the u-direction is ``d/du - u^-2 kappa + u^-1 Gr``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import NotCommuting, NotDegreeRaising
from .exactalg import (
    DEFAULT_TOL,
    PolyQ,
    _mp_to_complex,
    Spectrum,
    block_diag,
    charpoly,
    identity,
    is_zero_matrix,
    mat_add,
    mat_mul,
    mat_pow,
    mat_scale,
    matrix_polynomial,
    rank,
    raw_roots,
    roots_clustered,
    to_qmatrix,
    zeros,
)
from .qde import SmallConnection

# kappa is +Eu* at the residue; this reproduces the spectrum {0, 9, 9z, 9z^2}
# of the cubic fourfold.  Exponential shifts translate kappa by +c.
EXP_SHIFT_SIGN = 1


@dataclass(frozen=True)
class ConnectionGerm:
    kappa: tuple[tuple[Fraction, ...], ...]
    grading: tuple[Fraction, ...]
    degrees: tuple[int, ...] | None = None
    top_degree: int | None = None

    def __post_init__(self):
        k = tuple(tuple(Fraction(x) for x in row) for row in self.kappa)
        g = tuple(Fraction(x) for x in self.grading)
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "grading", g)
        n = len(k)
        if any(len(row) != n for row in k) or len(g) != n:
            raise ValueError("kappa must be square and match the grading size")
        if self.degrees is not None:
            if len(self.degrees) != n or self.top_degree is None:
                raise ValueError("degree labels need one entry per basis vector and a top degree")
            for gi, di in zip(g, self.degrees):
                if gi != Fraction(di - self.top_degree, 2):
                    raise ValueError("grading must equal (deg - D)/2 on labelled bases")

    @classmethod
    def from_degrees(cls, kappa, degrees: Sequence[int], top_degree: int) -> "ConnectionGerm":
        g = [Fraction(d - top_degree, 2) for d in degrees]
        return cls(tuple(map(tuple, to_qmatrix(kappa))), tuple(g), tuple(degrees), top_degree)

    @property
    def rank(self) -> int:
        return len(self.kappa)

    def kappa_matrix(self) -> list[list[Fraction]]:
        return [list(row) for row in self.kappa]

    def spectrum(self, tol: float = DEFAULT_TOL) -> Spectrum:
        if self.rank == 0:
            return Spectrum(())
        return roots_clustered(charpoly(self.kappa_matrix()), tol)


def germ_from_connection(conn: SmallConnection, q0=1) -> ConnectionGerm:
    n = conn.rank
    return ConnectionGerm.from_degrees(
        residual_kappa(conn, q0), [2 * i for i in range(n)], n - 1
    )


def residual_kappa(conn: SmallConnection, q0) -> list[list[Fraction]]:
    return conn.K.at(Fraction(q0))


# --------------------------------------------------------------------------
# Spectral splitting


@dataclass(frozen=True)
class Block:
    eigenvalue: complex
    dimension: int
    projector: np.ndarray
    exact_projector: tuple[tuple[Fraction, ...], ...] | None = None


@dataclass(frozen=True)
class SplitBlocks:
    blocks: tuple[Block, ...]
    spectrum: Spectrum

    def dims(self) -> list[int]:
        return [b.dimension for b in self.blocks]

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def _hermite_idempotents(roots, n):
    """Polynomials e_c, one per cluster, with e_c = 1 to the right order at the
    cluster's roots and 0 to the right order at all other roots.

    ``roots`` is a list of (cluster index, mp root, multiplicity).  Solved as a
    confluent Vandermonde system in extended precision.
    """
    rows = []
    for _, z, mult in roots:
        for k in range(mult):
            # k-th derivative of x^j at z
            row = []
            for j in range(n):
                if j < k:
                    row.append(mpmath.mpc(0))
                else:
                    row.append(mpmath.ff(j, k) * z ** (j - k))
            rows.append(row)
    V = mpmath.matrix(rows)
    clusters = sorted({c for c, _, _ in roots})
    out = {}
    for c in clusters:
        rhs = []
        for ci, _, mult in roots:
            rhs.append(mpmath.mpc(1 if ci == c else 0))
            rhs.extend([mpmath.mpc(0)] * (mult - 1))
        out[c] = mpmath.lu_solve(V, mpmath.matrix(rhs))
    return out


def _exact_idempotent(p: PolyQ, factor: PolyQ, mult: int) -> PolyQ:
    """CRT idempotent for the rational factor ``factor^mult`` of ``p``."""
    f = factor**mult
    g = p // f
    # s f + t g = 1
    r0, r1 = f, g
    s0, s1 = PolyQ([1]), PolyQ()
    t0, t1 = PolyQ(), PolyQ([1])
    while not r1.is_zero():
        qt, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - qt * s1
        t0, t1 = t1, t0 - qt * t1
    c = r0.lead()
    t0 = PolyQ(x / c for x in t0.coeffs)
    return (t0 * g) % p


def _rational_root(p: PolyQ, z: complex) -> Fraction | None:
    """The rational number ``z`` approximates, if it is an exact root of ``p``."""
    if abs(z.imag) > 1e-12:
        return None
    r = Fraction(z.real).limit_denominator(10**6)
    return r if p(r) == 0 else None


def spectral_split(kappa, tol: float = DEFAULT_TOL) -> SplitBlocks:
    """Generalized-eigenspace decomposition of ``kappa`` along clustered eigenvalues."""
    k = to_qmatrix(kappa)
    n = len(k)
    if n == 0:
        return SplitBlocks((), Spectrum(()))
    p = charpoly(k)
    spec = roots_clustered(p, tol)
    roots = raw_roots(p)
    pts = [_mp_to_complex(z) for z, _, _ in roots]

    def cluster_of(z):
        return min(range(len(spec.entries)), key=lambda c: abs(spec.entries[c].value - z))

    tagged = [(cluster_of(z), zmp, m) for z, (zmp, m, _) in zip(pts, roots)]

    blocks = []
    exact = [_rational_root(p, z) for z in pts]
    if all(r is not None for r in exact):
        # every root is rational: exact CRT idempotents over Q
        for c, entry in enumerate(spec.entries):
            factor = PolyQ([1])
            for (ci, _, m), r in zip(tagged, exact):
                if ci == c:
                    factor = factor * (PolyQ([-r, 1]) ** m)
            e = _exact_idempotent(p, factor, 1)
            proj = matrix_polynomial(e, k)
            arr = np.array([[complex(x) for x in row] for row in proj])
            blocks.append(Block(entry.value, entry.multiplicity, arr, tuple(map(tuple, proj))))
        return SplitBlocks(tuple(blocks), spec)

    with mpmath.workdps(50):
        polys = _hermite_idempotents(tagged, n)
        K = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in k])
        for c, entry in enumerate(spec.entries):
            coeffs = polys[c]
            acc = mpmath.zeros(n, n)
            for j in range(n - 1, -1, -1):
                acc = acc * K + coeffs[j] * mpmath.eye(n)
            arr = np.array(
                [[complex(float(mpmath.re(acc[i, j])), float(mpmath.im(acc[i, j]))) for j in range(n)] for i in range(n)]
            )
            blocks.append(Block(entry.value, entry.multiplicity, arr))
    return SplitBlocks(tuple(blocks), spec)


def projector_defects(split: SplitBlocks, kappa) -> dict[str, float]:
    """Max-norm residuals of the projector identities."""
    k = np.array([[complex(x) for x in row] for row in to_qmatrix(kappa)])
    n = k.shape[0]
    ps = [b.projector for b in split.blocks]
    out = {
        "idempotent": max((np.abs(p @ p - p).max() for p in ps), default=0.0),
        "orthogonal": max(
            (np.abs(ps[i] @ ps[j]).max() for i in range(len(ps)) for j in range(len(ps)) if i != j),
            default=0.0,
        ),
        "partition": float(np.abs(sum(ps, np.zeros((n, n))) - np.eye(n)).max()),
        "commute": max((np.abs(k @ p - p @ k).max() for p in ps), default=0.0),
        "rank": max(
            (abs(np.linalg.matrix_rank(b.projector, tol=1e-6) - b.dimension) for b in split.blocks),
            default=0,
        ),
    }
    return out


# --------------------------------------------------------------------------
# External sum and symmetries


def external_sum(c1: ConnectionGerm, c2: ConnectionGerm) -> ConnectionGerm:
    kappa = block_diag(c1.kappa_matrix(), c2.kappa_matrix()) if c1.rank and c2.rank else (
        c1.kappa_matrix() or c2.kappa_matrix()
    )
    grading = c1.grading + c2.grading
    if c1.degrees is not None and c2.degrees is not None and c1.top_degree == c2.top_degree:
        return ConnectionGerm(tuple(map(tuple, kappa)), grading, c1.degrees + c2.degrees, c1.top_degree)
    return ConnectionGerm(tuple(map(tuple, kappa)), grading)


def dilation(c: ConnectionGerm, lam) -> ConnectionGerm:
    """Pull back along ``u = lam u'``: kappa scales by ``1/lam``."""
    lam = Fraction(lam)
    if lam == 0:
        raise ValueError("dilation factor must be nonzero")
    kappa = mat_scale(c.kappa_matrix(), 1 / lam)
    return ConnectionGerm(tuple(map(tuple, kappa)), c.grading, c.degrees, c.top_degree)


def exponential_shift(c: ConnectionGerm, c2) -> ConnectionGerm:
    """Twist by ``d + c2 u^-2 du``: kappa translates by ``EXP_SHIFT_SIGN * c2``."""
    shift = EXP_SHIFT_SIGN * Fraction(c2)
    kappa = mat_add(c.kappa_matrix(), mat_scale(identity(c.rank), shift))
    return ConnectionGerm(tuple(map(tuple, kappa)), c.grading, c.degrees, c.top_degree)


def power_shift(c: ConnectionGerm, c1) -> ConnectionGerm:
    """Twist by ``d + c1 u^-1 du``: grading translates by ``c1``; kappa unchanged."""
    c1 = Fraction(c1)
    grading = tuple(g + c1 for g in c.grading)
    # the shifted grading no longer matches any integer degree labelling
    return ConnectionGerm(c.kappa, grading) if c1 else c


# --------------------------------------------------------------------------
# Maximality


def _span_basis(vectors):
    """Row-reduce and return an independent subset of the given vectors."""
    basis = []
    for v in vectors:
        if rank(basis + [v]) > len(basis):
            basis.append(v)
    return basis


def generated_algebra(mu) -> list[list[list[Fraction]]]:
    """Basis of the unital algebra generated by commuting matrices ``mu``."""
    n = len(mu[0]) if mu else 0
    flat = lambda m: [x for row in m for x in row]
    algebra = [identity(n)]
    frontier = [identity(n)]
    while frontier:
        nxt = []
        for a in frontier:
            for g in mu:
                cand = mat_mul(g, a)
                if rank([flat(m) for m in algebra] + [flat(cand)]) > len(algebra):
                    algebra.append(cand)
                    nxt.append(cand)
        frontier = nxt
    return algebra


def cyclic_vector_check(mu, h) -> str:
    """Classify ``h`` as 'Maximal', 'Overmaximal' or 'Neither'.

    The tangent directions are the listed operators; they generate a unital
    commutative algebra whose evaluation at ``h`` is compared with the fiber.
    Redundant (linearly dependent) directions make a surjective evaluation
    overmaximal rather than maximal.
    """
    mats = [to_qmatrix(m) for m in mu]
    h = [Fraction(x) for x in h]
    n = len(h)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if mat_mul(mats[i], mats[j]) != mat_mul(mats[j], mats[i]):
                raise NotCommuting(i, j)
    algebra = generated_algebra(mats) if mats else [identity(n)]
    images = [[sum((a[i][j] * h[j] for j in range(n)), Fraction(0)) for i in range(n)] for a in algebra]
    if rank(images) < n:
        return "Neither"
    flat = [[x for row in m for x in row] for m in mats]
    if mats and rank(flat) < len(mats):
        return "Overmaximal"
    return "Maximal"


def krylov_rank(mu, h) -> int:
    mats = [to_qmatrix(m) for m in mu]
    h = [Fraction(x) for x in h]
    n = len(h)
    algebra = generated_algebra(mats) if mats else [identity(n)]
    images = [[sum((a[i][j] * h[j] for j in range(n)), Fraction(0)) for i in range(n)] for a in algebra]
    return rank(images)


# --------------------------------------------------------------------------
# Regular singularity for nef canonical class


@dataclass(frozen=True)
class GaugeReport:
    """Gauge-transformed coefficient of the u-connection as ``{u-exponent: matrix}``."""

    coefficients: dict
    pole_order: int
    residue: tuple[tuple[Fraction, ...], ...]
    residue_nilpotent: bool
    residue_lowers_degree: bool
    ok: bool
    notes: tuple[str, ...] = field(default=())


def blocks_to_matrix(degrees: Sequence[int], kappa_blocks: dict) -> list[list[Fraction]]:
    """Assemble kappa from blocks keyed (i, j): H^i -> H^(i+2j)."""
    idx: dict[int, list[int]] = {}
    for pos, d in enumerate(degrees):
        idx.setdefault(d, []).append(pos)
    n = len(degrees)
    out = zeros(n)
    for (i, j), block in kappa_blocks.items():
        src, tgt = idx.get(i, []), idx.get(i + 2 * j, [])
        block = to_qmatrix(block)
        if len(block) != len(tgt) or any(len(r) != len(src) for r in block):
            raise ValueError(f"block ({i},{j}) has the wrong shape")
        for a, t in enumerate(tgt):
            for b, s in enumerate(src):
                out[t][s] = block[a][b]
    return out


def nef_gauge_check(c: ConnectionGerm, kappa_blocks: dict | None = None) -> GaugeReport:
    """Apply ``u^g`` with ``g = Gr + T/2`` to ``nabla + (1/2) u^-1 T du``.

    Entry (t, s) of the transformed ``d/du`` coefficient is
    ``-u^(-2 + g_t - g_s) kappa_ts``; the grading terms cancel exactly.
    """
    if c.degrees is None:
        raise ValueError("nef_gauge_check needs degree labels")
    degs = c.degrees
    D = c.top_degree
    kappa = blocks_to_matrix(degs, kappa_blocks) if kappa_blocks is not None else c.kappa_matrix()
    n = len(degs)
    for t in range(n):
        for s in range(n):
            if kappa[t][s] != 0 and degs[t] - degs[s] < 2:
                raise NotDegreeRaising(degs[s], degs[t])
    T = [1 if (d - D) % 2 else 0 for d in degs]
    g = [Fraction(d - D, 2) + Fraction(t, 2) for d, t in zip(degs, T)]
    assert all(x.denominator == 1 for x in g)
    gi = [int(x) for x in g]
    grading = [Fraction(d - D, 2) for d in degs]
    coeffs: dict[int, list[list[Fraction]]] = {}
    notes = []
    # grading part: u^-1 (Gr + T/2) - u^-1 g = 0 on the diagonal
    residual_diag = [grading[i] + Fraction(T[i], 2) - g[i] for i in range(n)]
    if any(residual_diag):
        notes.append("grading terms failed to cancel")
        coeffs.setdefault(-1, zeros(n))
        for i in range(n):
            coeffs[-1][i][i] += residual_diag[i]
    for t in range(n):
        for s in range(n):
            x = kappa[t][s]
            if x:
                e = -2 + gi[t] - gi[s]
                coeffs.setdefault(e, zeros(n))[t][s] -= x
    coeffs = {e: m for e, m in coeffs.items() if not is_zero_matrix(m)}
    pole = max((-e for e in coeffs if e < 0), default=0)
    residue = coeffs.get(-1, zeros(n))
    nilpotent = is_zero_matrix(mat_pow(residue, n)) if n else True
    lowers = all(
        residue[t][s] == 0 or degs[t] > degs[s] for t in range(n) for s in range(n)
    )
    if pole > 1:
        notes.append(f"pole order {pole} > 1")
    return GaugeReport(
        coeffs,
        pole,
        tuple(map(tuple, residue)),
        nilpotent,
        lowers,
        pole <= 1 and nilpotent,
        tuple(notes),
    )
