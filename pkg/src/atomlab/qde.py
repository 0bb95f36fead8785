"""Quantum differential equation of a complete intersection and the matrix of
quantum multiplication by the hyperplane class.

Two routes to the same matrix ``A``:

* :func:`solve_jump_matrix` eliminates the first-order system ``D Psi = -A Psi``
  down to one scalar operator and matches it with the QDE coefficient by
  coefficient;
* :func:`fit_jump_matrix_from_series` never forms the QDE at all; it pushes the
  explicit hypergeometric series through the first-order system order by order
  in ``q``.

Throughout ``D = u q d/dq``.  Givental's variables are ``q = e^t`` and
``u = -hbar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    CrossCheckFailure,
    Inconsistent,
    InsufficientOrder,
    InvalidCI,
    NoSolution,
    NotFano,
)
from .exactalg import DiffOp, PolyQ, TruncSeries, rational_str, row_reduce, solve_linear

MAX_DIM = 12


@dataclass(frozen=True)
class CompleteIntersection:
    """Smooth complete intersection of multidegree ``degrees`` in P^(N-1)."""

    N: int
    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if self.N < 3:
            raise InvalidCI(f"ambient P^{self.N - 1} too small (need N >= 3)")
        if not self.degrees:
            raise InvalidCI("need at least one defining equation")
        if any(d < 2 for d in self.degrees):
            raise InvalidCI("all degrees must be >= 2")
        if self.d_tot > self.N:
            raise InvalidCI(
                f"d_tot = {self.d_tot} > N = {self.N}: neither Fano nor Calabi-Yau"
            )
        if self.dim < 1:
            raise InvalidCI(f"dim X = {self.dim} < 1")

    @property
    def k(self) -> int:
        return len(self.degrees)

    @property
    def d_tot(self) -> int:
        return sum(self.degrees)

    @property
    def dim(self) -> int:
        return self.N - 1 - self.k

    @property
    def index(self) -> int:
        return self.N - self.d_tot

    @property
    def degree(self) -> int:
        return math.prod(self.degrees)

    @property
    def rank(self) -> int:
        """Rank of the ambient subring spanned by 1, P, ..., P^dim."""
        return self.dim + 1

    def label(self) -> str:
        ds = ",".join(map(str, self.degrees))
        return f"X_({ds}) in P^{self.N - 1}"


# --------------------------------------------------------------------------
# The QDE


def build_qde(ci: CompleteIntersection) -> DiffOp:
    """``D^(N-k) - (-1)^(N-d_tot) q prod_i d_i prod_m (d_i D + m u)``.

    Uses ``u (d_i q d/dq + m) = d_i D + m u``.
    """
    D, u = DiffOp.D(), DiffOp.u()
    rhs = DiffOp.const(1)
    for d in ci.degrees:
        rhs = rhs * d
        for m in range(1, d):
            rhs = rhs * (d * D + m * u)
    sign = -1 if ci.index % 2 else 1
    return D ** (ci.N - ci.k) - sign * (DiffOp.q() * rhs)


# --------------------------------------------------------------------------
# Jump matrices


class JumpMatrix:
    """Square matrix with entries in Q[q] (stored as PolyQ in q)."""

    def __init__(self, rows):
        self.rows: list[list[PolyQ]] = [
            [x if isinstance(x, PolyQ) else PolyQ([x]) for x in row] for row in rows
        ]

    @property
    def size(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, JumpMatrix) and self.rows == other.rows

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def scaled(self, c) -> "JumpMatrix":
        return JumpMatrix([[x * c for x in row] for row in self.rows])

    def at(self, q0) -> list[list[Fraction]]:
        q0 = Fraction(q0)
        return [[x(q0) if not x.is_zero() else Fraction(0) for x in row] for row in self.rows]

    def q_coefficient(self, m: int) -> list[list[Fraction]]:
        return [[x[m] for x in row] for row in self.rows]

    def q_degree(self) -> int:
        return max((x.degree for row in self.rows for x in row), default=-1)

    def is_centrosymmetric(self) -> bool:
        n = self.size
        return all(
            self.rows[i][j] == self.rows[n - 1 - j][n - 1 - i]
            for i in range(n)
            for j in range(n)
        )

    def has_jump_shape(self, f: int) -> bool:
        """Subdiagonal ones and integer multiples of q^m at offset j - i = m f - 1."""
        n = self.size
        for i in range(n):
            for j in range(n):
                x = self.rows[i][j]
                if i == j + 1:
                    if x != PolyQ([1]):
                        return False
                    continue
                if x.is_zero():
                    continue
                nz = [k for k, c in enumerate(x.coeffs) if c != 0]
                if len(nz) != 1:
                    return False
                m = nz[0]
                if m < 1 or j - i != m * f - 1 or x[m].denominator != 1:
                    return False
        return True

    def entry_str(self, i: int, j: int) -> str:
        return self.rows[i][j].format("q")

    def to_strings(self) -> list[list[str]]:
        return [[self.entry_str(i, j) for j in range(self.size)] for i in range(self.size)]

    def __repr__(self):
        return f"JumpMatrix({self.to_strings()})"


def jump_positions(n: int, f: int, m: int) -> list[tuple[int, int]]:
    """Entries carrying q^m in an (n+1)x(n+1) jump matrix of step f."""
    off = m * f - 1
    return [(i, i + off) for i in range(n + 1) if i + off <= n]


def max_jump_order(ci: CompleteIntersection) -> int:
    return (ci.dim + 1) // ci.index


def _assemble(n: int, f: int, values: dict[tuple[int, int, int], Fraction]) -> JumpMatrix:
    rows = [[PolyQ() for _ in range(n + 1)] for _ in range(n + 1)]
    for i in range(1, n + 1):
        rows[i][i - 1] = PolyQ([1])
    for (m, i, j), c in values.items():
        rows[i][j] = rows[i][j] + PolyQ.monomial(m, c)
    return JumpMatrix(rows)


def _require_fano(ci: CompleteIntersection):
    if ci.index < 1:
        raise NotFano(f"{ci.label()} has index 0; q-corrections not recoverable by this route")


# --------------------------------------------------------------------------
# Route 1: elimination against the QDE


def eliminate(n: int, f: int, values: dict[tuple[int, int, int], Fraction]) -> DiffOp:
    """Scalar operator annihilating psi_n, normalised to leading term D^(n+1).

    Solves ``psi_{i-1} = -D psi_i - sum a q^m psi_j`` downwards from
    ``psi_n = phi`` and returns ``(-1)^n (D psi_0 + sum a_0j q^m psi_j)``.
    """
    by_row: dict[int, list[tuple[int, int, Fraction]]] = {}
    for (m, i, j), c in values.items():
        if c:
            by_row.setdefault(i, []).append((m, j, c))
    D = DiffOp.D()
    L: list[DiffOp | None] = [None] * (n + 1)
    L[n] = DiffOp.const(1)
    for i in range(n, 0, -1):
        op = -(D * L[i])
        for m, j, c in by_row.get(i, ()):
            op = op - c * (DiffOp.q(m) * L[j])
        L[i - 1] = op
    E = D * L[0]
    for m, j, c in by_row.get(0, ()):
        E = E + c * (DiffOp.q(m) * L[j])
    return E if n % 2 == 0 else -E


def _affine_solve(columns, base, target, unknowns, where: str):
    """Solve ``base + sum x_k columns_k = target`` on the union of keys."""
    keys = sorted(set(target) | set(base) | {k for col in columns for k in col})
    mat = [[col.get(key, Fraction(0)) for col in columns] for key in keys]
    rhs = [target.get(key, Fraction(0)) - base.get(key, Fraction(0)) for key in keys]
    x, ok = solve_linear(mat, rhs)
    if not ok:
        raise Inconsistent(f"{where}: coefficient matching has no solution")
    r = len(row_reduce(mat)[1]) if mat else 0
    if r < len(unknowns):
        raise NoSolution(f"{where}: {len(unknowns) - r} unknown(s) left undetermined")
    return dict(zip(unknowns, x))


def solve_jump_matrix(ci: CompleteIntersection) -> JumpMatrix:
    _require_fano(ci)
    n, f = ci.dim, ci.index
    target = build_qde(ci)
    values: dict[tuple[int, int, int], Fraction] = {}
    for m in range(1, max_jump_order(ci) + 1):
        unknowns = [(m, i, j) for i, j in jump_positions(n, f, m)]
        base_op = eliminate(n, f, values).q_part(m)
        base = {(b, c): x for (_, b, c), x in base_op.terms.items()}
        columns = []
        for key in unknowns:
            trial = dict(values)
            trial[key] = Fraction(1)
            op = eliminate(n, f, trial).q_part(m)
            col = {(b, c): x for (_, b, c), x in op.terms.items()}
            columns.append({k: col.get(k, Fraction(0)) - base.get(k, Fraction(0)) for k in set(col) | set(base)})
        tgt = {(b, c): x for (_, b, c), x in target.q_part(m).terms.items()}
        values.update(_affine_solve(columns, base, tgt, unknowns, f"q^{m} matching"))
    if eliminate(n, f, values) != target:
        raise Inconsistent("eliminated operator differs from the QDE after solving")
    return _assemble(n, f, values)


# --------------------------------------------------------------------------
# Givental's hypergeometric series


class AmbientLaurent:
    """Element of Q[P]/(P^(top+1)) tensor Q[u, 1/u], as {(P-power, u-power): c}."""

    __slots__ = ("top", "terms")

    def __init__(self, top: int, terms: dict | None = None):
        self.top = top
        self.terms: dict[tuple[int, int], Fraction] = {
            k: Fraction(c) for k, c in (terms or {}).items() if c and k[0] <= top
        }

    @classmethod
    def one(cls, top: int) -> "AmbientLaurent":
        return cls(top, {(0, 0): 1})

    @classmethod
    def linear(cls, top: int, p_coef, u_coef) -> "AmbientLaurent":
        """``p_coef * P + u_coef * u``."""
        return cls(top, {(1, 0): p_coef, (0, 1): u_coef})

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return AmbientLaurent(self.top, out)

    def __neg__(self):
        return AmbientLaurent(self.top, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, AmbientLaurent):
            c = Fraction(other)
            return AmbientLaurent(self.top, {k: c * v for k, v in self.terms.items()})
        out: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), x in self.terms.items():
            for (a2, b2), y in other.terms.items():
                if a1 + a2 <= self.top:
                    key = (a1 + a2, b1 + b2)
                    out[key] = out.get(key, Fraction(0)) + x * y
        return AmbientLaurent(self.top, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, AmbientLaurent) and self.terms == other.terms

    def inverse_of_linear(self) -> "AmbientLaurent":
        """Inverse of ``a P + m u`` with m != 0, expanded in powers of P."""
        a = self.terms.get((1, 0), Fraction(0))
        m = self.terms.get((0, 1), Fraction(0))
        if set(self.terms) - {(1, 0), (0, 1)} or m == 0:
            raise ValueError("only a P + m u with m != 0 is invertible here")
        # (m u)^-1 (1 + a P/(m u))^-1
        return AmbientLaurent(
            self.top,
            {(k, -k - 1): (-a) ** k / m ** (k + 1) for k in range(self.top + 1)},
        )

    def flip_u(self) -> "AmbientLaurent":
        """Substitute u -> -u."""
        return AmbientLaurent(
            self.top, {(a, b): (-c if b % 2 else c) for (a, b), c in self.terms.items()}
        )

    def at_u(self, u0) -> list[Fraction]:
        u0 = Fraction(u0)
        vec = [Fraction(0)] * (self.top + 1)
        for (a, b), c in self.terms.items():
            vec[a] += c * u0**b
        return vec

    def component(self, a: int) -> dict[int, Fraction]:
        return {b: c for (p, b), c in self.terms.items() if p == a}

    def __repr__(self):
        return f"AmbientLaurent({self.terms})"


@dataclass(frozen=True)
class GiventalSeries:
    """Coefficients ``Gamma_d`` of Givental's series, in the hbar normalisation.

    ``Gamma_d = prod_i prod_{m<=d d_i} (d_i P + m h) / prod_{m<=d} (P + m h)^N``
    with ``h`` recorded as the Laurent variable; the horizontal section in the
    (q, u) coordinates is ``q^(-P/u) sum_d Gamma_d(P, -u) q^d``.
    """

    ci: CompleteIntersection
    order: int
    series: TruncSeries

    def coefficient(self, d: int) -> AmbientLaurent:
        return self.series[d]

    def vector(self, d: int, u0=1) -> list[Fraction]:
        return self.series[d].at_u(u0)


def gamma_coefficient(ci: CompleteIntersection, d: int) -> AmbientLaurent:
    top = ci.dim
    num = AmbientLaurent.one(top)
    for di in ci.degrees:
        for m in range(1, d * di + 1):
            num = num * AmbientLaurent.linear(top, di, m)
    den_inv = AmbientLaurent.one(top)
    for m in range(1, d + 1):
        inv = AmbientLaurent.linear(top, 1, m).inverse_of_linear()
        for _ in range(ci.N):
            den_inv = den_inv * inv
    return num * den_inv


def givental_series(ci: CompleteIntersection, M: int) -> GiventalSeries:
    if M < 1:
        raise ValueError("truncation order must be >= 1")
    zero = AmbientLaurent(ci.dim)
    coeffs = [gamma_coefficient(ci, d) for d in range(M + 1)]
    return GiventalSeries(ci, M, TruncSeries(coeffs, M, zero))


# --------------------------------------------------------------------------
# Route 2: first-order system applied to the series


def default_order(ci: CompleteIntersection) -> int:
    return -(-(ci.dim + 1) // ci.index) + 1


def _series_rows(ci, gammas, values, d, psis):
    """Psi_d by the downward recursion, given Psi_0..Psi_{d-1} and the A entries.

    Row i of ``D Psi = -A Psi`` twisted by ``q^(-P/u)`` reads
    ``(d u - P) psi_{d,i} = -psi_{d,i-1} - sum_m A_m[i][j] psi_{d-m,j}``.
    Returns (Psi_d, residual of row 0).
    """
    n = ci.dim
    shift = AmbientLaurent.linear(n, -1, d)
    by_row: dict[int, list[tuple[int, int, Fraction]]] = {}
    for (m, i, j), c in values.items():
        if c and m <= d:
            by_row.setdefault(i, []).append((m, j, c))
    col = [None] * (n + 1)
    col[n] = gammas[d]
    for i in range(n, 0, -1):
        acc = -(shift * col[i])
        for m, j, c in by_row.get(i, ()):
            acc = acc - psis[d - m][j] * c
        col[i - 1] = acc
    resid = shift * col[0]
    for m, j, c in by_row.get(0, ()):
        resid = resid + psis[d - m][j] * c
    return col, resid


def fit_jump_matrix_from_series(ci: CompleteIntersection, M: int | None = None) -> JumpMatrix:
    _require_fano(ci)
    n, f = ci.dim, ci.index
    need = -(-(n + 1) // f)
    if M is None:
        M = default_order(ci)
    if M < need:
        raise InsufficientOrder(f"need M >= {need} q-orders, got {M}")
    series = givental_series(ci, M)
    gammas = [series.coefficient(d).flip_u() for d in range(M + 1)]
    values: dict[tuple[int, int, int], Fraction] = {}
    psis: list[list[AmbientLaurent]] = []
    for d in range(M + 1):
        unknowns = [(d, i, j) for i, j in jump_positions(n, f, d)] if d >= 1 else []
        col, resid = _series_rows(ci, gammas, values, d, psis + [None])
        if unknowns:
            base = resid.terms
            columns = []
            for key in unknowns:
                trial = dict(values)
                trial[key] = Fraction(1)
                _, r = _series_rows(ci, gammas, trial, d, psis + [None])
                columns.append({k: r.terms.get(k, Fraction(0)) - base.get(k, Fraction(0)) for k in set(r.terms) | set(base)})
            values.update(_affine_solve(columns, base, {}, unknowns, f"series order q^{d}"))
            col, resid = _series_rows(ci, gammas, values, d, psis + [None])
        if resid.terms:
            raise Inconsistent(f"series order q^{d}: first-order system not satisfied")
        psis.append(col)
    return _assemble(n, f, values)


# --------------------------------------------------------------------------
# Small quantum connection


@dataclass(frozen=True)
class SmallConnection:
    ci: CompleteIntersection
    A: JumpMatrix
    K: JumpMatrix
    G: tuple[Fraction, ...]
    checks: tuple[str, ...] = ()

    @property
    def rank(self) -> int:
        return self.A.size

    def grading_matrix(self) -> list[list[Fraction]]:
        n = len(self.G)
        return [[self.G[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)]


def grading(dim: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(2 * i - dim, 2) for i in range(dim + 1))


def small_connection(ci: CompleteIntersection, M: int | None = None) -> SmallConnection:
    A = solve_jump_matrix(ci)
    B = fit_jump_matrix_from_series(ci, M)
    if A != B:
        raise CrossCheckFailure(
            f"QDE elimination gave {A.to_strings()} but the series fit gave {B.to_strings()}"
        )
    checks = ["elimination == series fit"]
    if not A.has_jump_shape(ci.index):
        raise CrossCheckFailure("recovered A violates the diagonal-jump shape")
    if not A.is_centrosymmetric():
        raise CrossCheckFailure("recovered A is not centro-symmetric")
    checks += ["jump shape", "centro-symmetry"]
    return SmallConnection(ci, A, A.scaled(ci.index), grading(ci.dim), tuple(checks))


def qde_str(ci: CompleteIntersection) -> str:
    return str(build_qde(ci))


def matrix_rows_str(m) -> list[list[str]]:
    return [[rational_str(x) for x in row] for row in m]
