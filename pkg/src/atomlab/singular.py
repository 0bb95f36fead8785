"""Milnor numbers of polynomial germs and the Z/N unfolding example.

Milnor algebras are computed on jets: O/(J + m^B) is a finite-dimensional
quotient of the polynomials of degree < B, and its dimension is found by exact
row reduction.  Once the dimension stops changing between B-1 and B,
Nakayama's lemma gives m^(B-1) in J and the value is the Milnor number.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import mpmath

from .errors import ActionMismatch, DegenerateParameters, NonIsolated
from .exactalg import Q, row_reduce


@dataclass(frozen=True)
class PolyGerm:
    nvars: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    def __init__(self, terms: Mapping, nvars: int | None = None):
        if nvars is None:
            nvars = max((len(e) for e in terms), default=1)
        acc: dict[tuple[int, ...], Fraction] = {}
        for e, c in terms.items():
            e = tuple(e) + (0,) * (nvars - len(e))
            if len(e) != nvars or any(k < 0 for k in e):
                raise ValueError(f"bad exponent {e}")
            acc[e] = acc.get(e, Fraction(0)) + Q(c)
        clean = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
        for e, _ in clean:
            if sum(e) < 2:
                raise ValueError("a germ must vanish to order at least 2 at the origin")
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def partial(self, i: int) -> dict[tuple[int, ...], Fraction]:
        out = {}
        for e, c in self.terms:
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = out.get(tuple(f), Fraction(0)) + c * e[i]
        return out

    def __str__(self) -> str:
        names = "xyzwuv"
        parts = []
        for e, c in sorted(self.terms, key=lambda t: (-sum(t[0]), [-k for k in t[0]])):
            mon = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(mon if c == 1 else f"{c}*{mon}")
        return " + ".join(parts) or "0"


def power_germ(N: int) -> PolyGerm:
    return PolyGerm({(N,): 1}, 1)


def external_sum(f: PolyGerm, g: PolyGerm) -> PolyGerm:
    """f(x) + g(y) on disjoint variables."""
    terms = {e + (0,) * g.nvars: c for e, c in f.terms}
    for e, c in g.terms:
        terms[(0,) * f.nvars + e] = c
    return PolyGerm(terms, f.nvars + g.nvars)


def _monomials(nvars: int, below: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(below - 1, -1, -1):
        out.extend(sorted(_compositions(total, nvars), reverse=True))
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total, -1, -1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def _jet_quotient(f: PolyGerm, B: int):
    """Dimension and standard monomials of O/(J + m^B)."""
    n = f.nvars
    cols = _monomials(n, B)  # descending degree: pivots prefer high degree
    index = {m: i for i, m in enumerate(cols)}
    partials = [f.partial(i) for i in range(n)]
    rows = []
    for g in partials:
        low = min((sum(e) for e in g), default=B)
        for alpha in _monomials(n, max(B - low, 0)):
            row = [Fraction(0)] * len(cols)
            nz = False
            for e, c in g.items():
                m = tuple(a + b for a, b in zip(alpha, e))
                j = index.get(m)
                if j is not None:
                    row[j] += c
                    nz = True
            if nz:
                rows.append(row)
    pivots = set(row_reduce(rows)[1]) if rows else set()
    standard = [cols[j] for j in range(len(cols)) if j not in pivots]
    return len(standard), standard


@dataclass(frozen=True)
class MilnorData:
    mu: int
    muG: int | None
    standard: tuple[tuple[int, ...], ...]
    bound: int


def milnor_number(f: PolyGerm) -> MilnorData:
    start = f.degree + 2
    cap = 2 * f.degree + 4
    prev, _ = _jet_quotient(f, start - 1)
    for B in range(start, cap + 1):
        dim, std = _jet_quotient(f, B)
        if dim == prev:
            return MilnorData(dim, None, tuple(sorted(std, key=lambda m: (sum(m), m))), B)
        prev = dim
    raise NonIsolated(f"jet dimension did not stabilize up to bound {cap}")


@dataclass(frozen=True)
class CyclicAction:
    N: int
    weights: tuple[int, ...]

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("group order must be positive")
        object.__setattr__(self, "weights", tuple(w % self.N for w in self.weights))

    def weight(self, mono) -> int:
        return sum(w * k for w, k in zip(self.weights, mono)) % self.N


def equivariant_milnor(f: PolyGerm, a: CyclicAction) -> MilnorData:
    if len(a.weights) != f.nvars:
        raise ActionMismatch("one weight per variable is required")
    for e, _ in f.terms:
        if a.weight(e):
            raise ActionMismatch(f"monomial {e} is not invariant")
    data = milnor_number(f)
    muG = sum(1 for m in data.standard if a.weight(m) == 0)
    return MilnorData(data.mu, muG, data.standard, data.bound)


@dataclass(frozen=True)
class TSResult:
    direct: int
    product: int

    @property
    def agree(self) -> bool:
        return self.direct == self.product


def thom_sebastiani_mu(f: PolyGerm, g: PolyGerm) -> TSResult:
    return TSResult(milnor_number(external_sum(f, g)).mu, milnor_number(f).mu * milnor_number(g).mu)


# --------------------------------------------------------------------------
# Unfolding x1^N + x2^N - z1 x1 x2 + z2


@dataclass(frozen=True)
class Orbit:
    points: tuple[int, ...]  # indices into UnfoldingReport.points
    stabilizer: int


@dataclass(frozen=True)
class UnfoldingReport:
    N: int
    points: tuple[tuple[complex, complex], ...]
    values: tuple[complex, ...]
    clusters: tuple[tuple[complex, int], ...]
    orbits: tuple[Orbit, ...]
    formula: tuple[tuple[str, int], ...]
    hessians: tuple[complex, ...]
    max_residual: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        cx = lambda z: {"re": z.real, "im": z.imag}
        return {
            "N": self.N,
            "points": [[cx(x1), cx(x2)] for x1, x2 in self.points],
            "values": [cx(v) for v in self.values],
            "clusters": [{"value": cx(v), "points": k} for v, k in self.clusters],
            "orbits": [{"size": len(o.points), "stabilizer": o.stabilizer} for o in self.orbits],
            "formula": [{"atom": k, "multiplicity": m} for k, m in self.formula],
            "max_residual": self.max_residual,
            "degenerate": self.degenerate,
        }


def _c(z) -> complex:
    return complex(float(mpmath.re(z)), float(mpmath.im(z)))


def ts_unfolding_atoms(N: int, z1, z2, tol: float = 1e-9, strict: bool = False) -> UnfoldingReport:
    """Critical points of F = x1^N + x2^N - z1 x1 x2 + z2 in closed form.

    With a = z1/N the critical equations are x1^(N-1) = a x2 and
    x2^(N-1) = a x1.  Away from the origin, c = x1^N satisfies c^(N-2) = a^N
    and the points are (beta, beta^(N-1)/a) with beta^N = c.
    """
    if N < 3:
        raise ValueError("N must be at least 3")
    z1, z2 = Q(z1), Q(z2)
    if z1 == 0:
        raise DegenerateParameters("z1 must be nonzero")
    with mpmath.workdps(40):
        a = mpmath.mpf(z1.numerator) / z1.denominator / N
        z2m = mpmath.mpf(z2.numerator) / z2.denominator
        aN = a**N
        base = mpmath.arg(mpmath.mpc(aN))
        mag = abs(aN) ** (mpmath.mpf(1) / (N - 2))
        cs = [mag * mpmath.expj((base + 2 * mpmath.pi * k) / (N - 2)) for k in range(N - 2)]
        pts = [(mpmath.mpc(0), mpmath.mpc(0))]
        vals = [mpmath.mpc(z2m)]
        orbits = [Orbit((0,), N)]
        for c in cs:
            r = abs(c) ** (mpmath.mpf(1) / N)
            th = mpmath.arg(c)
            idx = []
            for j in range(N):
                beta = r * mpmath.expj((th + 2 * mpmath.pi * j) / N)
                idx.append(len(pts))
                pts.append((beta, beta ** (N - 1) / a))
                vals.append(z2m - (N - 2) * c)
            orbits.append(Orbit(tuple(idx), 1))
        F = lambda x1, x2: x1**N + x2**N - N * a * x1 * x2 + z2m
        resid = 0.0
        hess = []
        for (x1, x2), v in zip(pts, vals):
            g1 = x1 ** (N - 1) - a * x2
            g2 = x2 ** (N - 1) - a * x1
            resid = max(resid, float(abs(g1)), float(abs(g2)), float(abs(F(x1, x2) - v)))
            hess.append(_c((N - 1) ** 2 * (x1 * x2) ** (N - 2) - a * a))
    points = tuple((_c(x1), _c(x2)) for x1, x2 in pts)
    values = tuple(_c(v) for v in vals)
    clusters: list[list] = []
    for v in values:
        for cl in clusters:
            if abs(cl[0] - v) <= tol * max(1.0, abs(v)):
                cl[1] += 1
                break
        else:
            clusters.append([v, 1])
    expected = N - 1
    degenerate = len(clusters) != expected
    if degenerate and strict:
        raise DegenerateParameters(f"{len(clusters)} distinct critical values, expected {expected}")
    if any(abs(h) <= tol for h in hess):
        raise DegenerateParameters("a critical point is not Morse")
    formula = (("G-Morse", 1), ("free-Morse", N - 2))
    return UnfoldingReport(
        N,
        points,
        values,
        tuple((v, k) for v, k in clusters),
        tuple(orbits),
        formula,
        tuple(hess),
        resid,
        degenerate,
    )


def group_orbits(points, N: int, tol: float = 1e-9):
    """Orbits of (x1, x2) -> (zeta x1, zeta^-1 x2), computed by search."""
    zeta = cmath.exp(2j * cmath.pi / N)
    seen = [False] * len(points)
    out = []
    for i, p in enumerate(points):
        if seen[i]:
            continue
        orbit = []
        stab = 0
        for k in range(N):
            q = (p[0] * zeta**k, p[1] * zeta ** (-k))
            if abs(q[0] - p[0]) + abs(q[1] - p[1]) <= tol:
                stab += 1
            for j, r in enumerate(points):
                if not seen[j] and abs(q[0] - r[0]) + abs(q[1] - r[1]) <= tol * 10:
                    seen[j] = True
                    orbit.append(j)
        out.append(Orbit(tuple(sorted(orbit)), stab))
    return out

