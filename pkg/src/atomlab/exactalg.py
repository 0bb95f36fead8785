"""Exact arithmetic layer.

Rationals are :class:`fractions.Fraction`.  On top of them this module
provides Gaussian rationals, dense univariate polynomials, truncated power
series, small dense matrix routines over any exact field, and the normal-form
algebra of differential operators in ``D = u q d/dq``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .errors import ClusterAmbiguity, Singular

DEFAULT_TOL = 1e-9
_MP_DPS = 60


def Q(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as a rational")


def rational_str(x: Fraction) -> str:
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# Gaussian rationals


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Q(self.re))
        object.__setattr__(self, "im", Q(self.im))

    @classmethod
    def of(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Q(x), Fraction(0))

    def __add__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return _as_gauss(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return rational_str(self.re)
        if self.re == 0:
            return f"{rational_str(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{rational_str(self.re)}{sign}{rational_str(abs(self.im))}i"


I = GaussianRational(0, 1)


def _as_gauss(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return GaussianRational(Fraction(x))
    return NotImplemented


# --------------------------------------------------------------------------
# Univariate polynomials over Q


class PolyQ:
    """Dense polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def x(cls) -> "PolyQ":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "PolyQ":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "PolyQ":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PolyQ([other])
        return isinstance(other, PolyQ) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyQ(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PolyQ(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyQ([1])
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "PolyQ") -> tuple["PolyQ", "PolyQ"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(len(rem) - other.degree, 1)
        lead = other.lead()
        while len(rem) - 1 >= other.degree and any(rem):
            shift = len(rem) - 1 - other.degree
            c = rem[-1] / lead
            quot[shift] = c
            for i, b in enumerate(other.coeffs):
                rem[i + shift] -= c * b
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return PolyQ(quot), PolyQ(rem)

    def __floordiv__(self, other):
        return self.divmod(_as_poly(other))[0]

    def __mod__(self, other):
        return self.divmod(_as_poly(other))[1]

    def monic(self) -> "PolyQ":
        if self.is_zero():
            return self
        lc = self.lead()
        return PolyQ(c / lc for c in self.coeffs)

    def derivative(self) -> "PolyQ":
        return PolyQ(k * c for k, c in enumerate(self.coeffs) if k)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mp(self, z):
        acc = mpmath.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def trailing_zeros(self) -> int:
        k = 0
        while k < len(self.coeffs) and self.coeffs[k] == 0:
            k += 1
        return k

    def __repr__(self):
        return f"PolyQ({self})"

    def __str__(self):
        return self.format("λ")

    def format(self, var: str = "x") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                body = rational_str(mag)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if mag == 1 else f"{rational_str(mag)}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _as_poly(x) -> PolyQ:
    if isinstance(x, PolyQ):
        return x
    return PolyQ([x])


def poly_gcd(a: PolyQ, b: PolyQ) -> PolyQ:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def square_free_decomposition(p: PolyQ) -> list[tuple[PolyQ, int]]:
    """Yun's algorithm: monic square-free ``s_k`` with ``p ~ prod s_k^k``."""
    if p.degree < 1:
        return []
    p = p.monic()
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    out = []
    k = 1
    while b.degree >= 1:
        g = poly_gcd(b, d)
        if g.degree >= 1:
            out.append((g, k))
        b = b // g
        c = d // g
        d = c - b.derivative()
        k += 1
    return out


# --------------------------------------------------------------------------
# Dense matrices over an exact field (Fraction or GaussianRational)


def to_qmatrix(rows) -> list[list[Fraction]]:
    return [[Q(x) for x in row] for row in rows]


def identity(n: int, one=Fraction(1), zero=Fraction(0)):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def zeros(n: int, m: int | None = None, zero=Fraction(0)):
    return [[zero] * (n if m is None else m) for _ in range(n)]


def mat_mul(a, b):
    m = len(b[0]) if b else 0
    out = []
    for row in a:
        new = []
        for j in range(m):
            acc = 0
            for k, x in enumerate(row):
                if x != 0:
                    y = b[k][j]
                    if y != 0:
                        acc = acc + x * y
            new.append(acc if not isinstance(acc, int) else Fraction(acc))
        out.append(new)
    return out


def mat_vec(a, v):
    out = []
    for row in a:
        acc = 0
        for x, y in zip(row, v):
            if x != 0 and y != 0:
                acc = acc + x * y
        out.append(Fraction(acc) if isinstance(acc, int) else acc)
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(r, s)] for r, s in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in row] for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def mat_pow(a, k: int):
    n = len(a)
    out = identity(n)
    for _ in range(k):
        out = mat_mul(out, a)
    return out


def is_zero_matrix(a) -> bool:
    return all(x == 0 for row in a for x in row)


def block_diag(a, b):
    n, m = len(a), len(b)
    out = zeros(n + m)
    for i in range(n):
        for j in range(n):
            out[i][j] = a[i][j]
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = b[i][j]
    return out


def row_reduce(a):
    """Reduced row echelon form; returns (rref, pivot columns)."""
    m = [list(row) for row in a]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col] if not isinstance(m[r][col], GaussianRational) else m[r][col].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(a) -> int:
    if not a:
        return 0
    return len(row_reduce(a)[1])


def solve_linear(a, b):
    """Solve ``a x = b`` exactly.

    Returns ``(x, consistent)``; free variables are set to zero.  ``x`` is
    ``None`` when the system is inconsistent.
    """
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = row_reduce(aug)
    if n in pivots:
        return None, False
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = red[i][n]
    return x, True


def inverse(a):
    n = len(a)
    one = Fraction(1)
    zero = Fraction(0)
    if any(isinstance(x, GaussianRational) for row in a for x in row):
        one, zero = GaussianRational(1), GaussianRational(0)
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(a)]
    red, pivots = row_reduce(aug)
    if pivots[:n] != list(range(n)):
        raise Singular("matrix is not invertible")
    return [row[n:] for row in red]


def charpoly(m) -> PolyQ:
    """``det(xI - M)`` by Faddeev-LeVerrier, exact over Q."""
    m = to_qmatrix(m)
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("charpoly needs a square matrix")
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = zeros(n)
    for k in range(1, n + 1):
        # M_k = M (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k)/k
        prev = [row[:] for row in mk]
        for i in range(n):
            prev[i][i] += coeffs[n - k + 1]
        mk = mat_mul(m, prev)
        tr = sum((mk[i][i] for i in range(n)), Fraction(0))
        coeffs[n - k] = -tr / k
    return PolyQ(coeffs)


def matrix_str(m) -> list[list[str]]:
    return [[rational_str(x) if isinstance(x, (int, Fraction)) else repr(x) for x in row] for row in m]


# --------------------------------------------------------------------------
# Root extraction and clustering


@dataclass(frozen=True)
class Eigen:
    value: complex
    multiplicity: int
    exact: str | None = None
    members: tuple[complex, ...] = ()


@dataclass(frozen=True)
class Spectrum:
    entries: tuple[Eigen, ...]

    @property
    def total(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def values(self) -> list[complex]:
        return [e.value for e in self.entries]

    def multiplicities(self) -> list[int]:
        return [e.multiplicity for e in self.entries]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _mp_to_complex(z) -> complex:
    re_, im_ = float(mpmath.re(z)), float(mpmath.im(z))
    # drop extended-precision noise left over from polyroots
    scale = max(1.0, abs(re_), abs(im_))
    if abs(im_) < 1e-30 * scale:
        im_ = 0.0
    if abs(re_) < 1e-30 * scale:
        re_ = 0.0
    return complex(re_, im_)


def _binomial_roots(m: int, c: Fraction):
    """Roots of ``x^m - c`` with exact labels."""
    with mpmath.workdps(_MP_DPS):
        mag = mpmath.root(abs(mpmath.mpf(c.numerator) / c.denominator), m)
        base = mpmath.pi if c < 0 else 0
        out = []
        for k in range(m):
            theta = (base + 2 * mpmath.pi * k) / m
            z = mag * mpmath.expj(theta)
            num = (1 if c < 0 else 0) + 2 * k
            den = m
            g = math.gcd(num, den) or 1
            num, den = num // g, den // g
            rtxt = _format_radius(c, m)
            if num == 0:
                label = rtxt
            else:
                label = f"{rtxt}*exp({num}πi/{den})" if den != 1 else f"-{rtxt}"
            out.append((z, label))
    return out


def _format_radius(c: Fraction, m: int) -> str:
    a = abs(c)
    num = _int_root(a.numerator, m)
    den = _int_root(a.denominator, m)
    if num is not None and den is not None:
        return rational_str(Fraction(num, den))
    return f"({rational_str(a)})^(1/{m})"


def _int_root(n: int, m: int):
    r = round(n ** (1.0 / m)) if n else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**m == n:
            return cand
    return None


def _numeric_roots(p: PolyQ) -> list:
    """High-precision roots of a square-free polynomial, one Newton polish each."""
    if p.degree < 1:
        return []
    if p.degree == 1:
        r = -p[0] / p[1]
        return [mpmath.mpc(mpmath.mpf(r.numerator) / r.denominator)]
    with mpmath.workdps(_MP_DPS):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p.coeffs)]
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * _MP_DPS)
        dp = p.derivative()
        polished = []
        for z in roots:
            z = mpmath.mpc(z)
            d = dp.eval_mp(z)
            if d != 0:
                z = z - p.eval_mp(z) / d
            polished.append(z)
    return polished


def raw_roots(p: PolyQ) -> list[tuple[object, int, str | None]]:
    """Roots with exact multiplicity, as (mp value, multiplicity, label)."""
    if p.is_zero():
        raise ValueError("zero polynomial has no root set")
    p = p.monic()
    out = []
    a = p.trailing_zeros()
    if a:
        out.append((mpmath.mpc(0), a, "0"))
        p = PolyQ(p.coeffs[a:])
    if p.degree < 1:
        return out
    nonzero = [k for k, c in enumerate(p.coeffs) if c != 0]
    if nonzero == [0, p.degree]:
        for z, label in _binomial_roots(p.degree, -p[0]):
            out.append((z, 1, label))
        return out
    for factor, mult in square_free_decomposition(p):
        if factor.degree == 1:
            r = -factor[0]
            out.append((mpmath.mpc(mpmath.mpf(r.numerator) / r.denominator), mult, rational_str(r)))
            continue
        for z in _numeric_roots(factor):
            out.append((z, mult, None))
    return out


def cluster_points(points: Sequence[complex], weights: Sequence[int], tol: float):
    """Single-linkage clusters at distance ``tol``.

    Raises ClusterAmbiguity if a linked cluster is wider than ``tol`` (merging
    would then depend on the order in which points are visited).
    """
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for members in groups.values():
        diam = max(
            (abs(points[i] - points[j]) for i in members for j in members), default=0.0
        )
        if diam > tol:
            raise ClusterAmbiguity(
                f"cluster of {len(members)} roots has diameter {diam:.3e} > tol {tol:.3e}"
            )
        clusters.append(members)
    return clusters


def _sort_key(z: complex):
    return (round(z.real, 7), round(z.imag, 7))


def roots_clustered(p: PolyQ, tol: float = DEFAULT_TOL) -> Spectrum:
    if p.is_zero():
        raise ValueError("roots of the zero polynomial are undefined")
    if not tol > 0:
        raise ValueError("tol must be positive")
    roots = raw_roots(p)
    pts = [_mp_to_complex(z) for z, _, _ in roots]
    wts = [m for _, m, _ in roots]
    entries = []
    for members in cluster_points(pts, wts, tol):
        mult = sum(wts[i] for i in members)
        center = sum(pts[i] * wts[i] for i in members) / mult
        labels = {roots[i][2] for i in members}
        exact = labels.pop() if len(members) == 1 and None not in labels else None
        entries.append(Eigen(center, mult, exact, tuple(pts[i] for i in members)))
    entries.sort(key=lambda e: _sort_key(e.value))
    return Spectrum(tuple(entries))


# --------------------------------------------------------------------------
# Truncated power series in q


class TruncSeries:
    """Power series ``sum c_k q^k`` kept modulo ``q^(order+1)``.

    Coefficients may be any ring elements supporting ``+`` and ``*``; ``zero``
    supplies the additive identity.
    """

    __slots__ = ("coeffs", "order", "zero")

    def __init__(self, coeffs: Sequence, order: int, zero=Fraction(0)):
        cs = list(coeffs)[: order + 1]
        cs += [zero] * (order + 1 - len(cs))
        self.coeffs = tuple(cs)
        self.order = order
        self.zero = zero

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k <= self.order else self.zero

    def _check(self, other):
        if other.order != self.order:
            raise ValueError("truncation orders differ")

    def __add__(self, other):
        self._check(other)
        return TruncSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order, self.zero)

    def __sub__(self, other):
        self._check(other)
        return TruncSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], self.order, self.zero)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return TruncSeries([c * other for c in self.coeffs], self.order, self.zero)
        self._check(other)
        out = [self.zero] * (self.order + 1)
        for i, a in enumerate(self.coeffs):
            for j in range(self.order + 1 - i):
                out[i + j] = out[i + j] + a * other.coeffs[j]
        return TruncSeries(out, self.order, self.zero)

    def __eq__(self, other):
        return (
            isinstance(other, TruncSeries)
            and self.order == other.order
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __repr__(self):
        return f"TruncSeries({list(self.coeffs)!r}, order={self.order})"


# --------------------------------------------------------------------------
# Differential operators in D = u q d/dq


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


class DiffOp:
    """Normal-form operator ``sum c * q^a u^b D^c`` with q on the left.

    ``u`` is central; ``D q^a = q^a (D + a u)``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for key, c in (terms or {}).items():
            c = Q(c)
            if c != 0:
                a, b, d = key
                if a < 0 or d < 0:
                    raise ValueError("q- and D-exponents must be nonnegative")
                clean[(int(a), int(b), int(d))] = c
        self.terms: dict[tuple[int, int, int], Fraction] = clean

    @classmethod
    def const(cls, c=1) -> "DiffOp":
        return cls({(0, 0, 0): c})

    @classmethod
    def D(cls) -> "DiffOp":
        return cls({(0, 0, 1): 1})

    @classmethod
    def q(cls, a: int = 1) -> "DiffOp":
        return cls({(a, 0, 0): 1})

    @classmethod
    def u(cls, b: int = 1) -> "DiffOp":
        return cls({(0, b, 0): 1})

    def __add__(self, other):
        other = _as_op(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return DiffOp(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_op(other))

    def __rsub__(self, other):
        return _as_op(other) - self

    def __mul__(self, other):
        other = _as_op(other)
        out: dict[tuple[int, int, int], Fraction] = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                # D^c1 q^a2 = q^a2 (D + a2 u)^c1
                for k in range(c1 + 1):
                    coef = x * y * _binom(c1, k) * (a2 ** (c1 - k))
                    if coef == 0:
                        continue
                    key = (a1 + a2, b1 + b2 + (c1 - k), k + c2)
                    out[key] = out.get(key, Fraction(0)) + coef
        return DiffOp(out)

    def __rmul__(self, other):
        return _as_op(other) * self

    def __pow__(self, k: int):
        out = DiffOp.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffOp.const(other)
        return isinstance(other, DiffOp) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coefficient(self, a: int, b: int, c: int) -> Fraction:
        return self.terms.get((a, b, c), Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((c for _, _, c in self.terms), default=-1)

    def q_degree(self) -> int:
        return max((a for a, _, _ in self.terms), default=-1)

    def q_part(self, a: int) -> "DiffOp":
        return DiffOp({k: c for k, c in self.terms.items() if k[0] == a})

    def apply_to_monomial(self, a: int) -> dict[tuple[int, int], Fraction]:
        """Act on ``q^a``; result maps (q-power, u-power) to coefficients."""
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j, c), x in self.terms.items():
            coef = x * (a**c)
            if coef:
                key = (i + a, j + c)
                out[key] = out.get(key, Fraction(0)) + coef
        return {k: v for k, v in out.items() if v}

    def __repr__(self):
        return f"DiffOp({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b, c), x in sorted(self.terms.items(), key=lambda t: (t[0][0], -t[0][2], -t[0][1])):
            mono = []
            if a:
                mono.append("q" if a == 1 else f"q^{a}")
            if b:
                mono.append("u" if b == 1 else f"u^{b}")
            if c:
                mono.append("D" if c == 1 else f"D^{c}")
            body = "*".join(mono)
            mag = abs(x)
            if not body:
                body = rational_str(mag)
            elif mag != 1:
                body = f"{rational_str(mag)}*{body}"
            parts.append(("-" if x < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, body in parts[1:]:
            out += f" {s} {body}"
        return out


def _as_op(x) -> DiffOp:
    if isinstance(x, DiffOp):
        return x
    return DiffOp.const(x)


def diffop_mul(l1: DiffOp, l2: DiffOp) -> DiffOp:
    return l1 * l2


def matrix_polynomial(p: PolyQ, m):
    """Evaluate ``p(M)`` by Horner's rule (exact)."""
    n = len(m)
    acc = zeros(n)
    for c in reversed(p.coeffs):
        acc = mat_mul(acc, m)
        for i in range(n):
            acc[i][i] += c
    return acc
