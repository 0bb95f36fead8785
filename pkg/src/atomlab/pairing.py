"""Mukai and Euler pairings on a truncated even cohomology ring Q[P]/P^(d+1).

Classes are coefficient vectors in the basis 1, P, ..., P^d.  The Euler
pairing is the Mukai pairing of sqrt(td)-twisted classes, and the Serre
operator is cup product with (-1)^d exp(-c1).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

import numpy as np

from .errors import BadTodd, RelationViolated
from .exactalg import GaussianRational, Q, inverse, is_zero_matrix, mat_mul, mat_pow, mat_sub, transpose


def G(x) -> GaussianRational:
    return GaussianRational.of(Q(x) if isinstance(x, str) else x)


@dataclass(frozen=True)
class TruncRing:
    d: int
    deg: Fraction = Fraction(1)

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("dimension must be nonnegative")
        object.__setattr__(self, "deg", Q(self.deg))

    @property
    def size(self) -> int:
        return self.d + 1

    def vec(self, coeffs: Sequence = ()) -> "MukaiVector":
        return MukaiVector.of(coeffs, self.size)

    def one(self) -> "MukaiVector":
        return self.vec([1])

    def P(self, k: int = 1) -> "MukaiVector":
        v = [0] * self.size
        if k <= self.d:
            v[k] = 1
        return self.vec(v)

    def basis(self) -> list["MukaiVector"]:
        return [self.P(k) for k in range(self.size)]

    def integral(self, v: "MukaiVector") -> GaussianRational:
        return v.c[self.d] * self.deg


@dataclass(frozen=True)
class MukaiVector:
    c: tuple[GaussianRational, ...]

    @classmethod
    def of(cls, coeffs: Sequence, size: int) -> "MukaiVector":
        coeffs = list(coeffs)
        if len(coeffs) > size:
            if any(G(x) != 0 for x in coeffs[size:]):
                raise ValueError("vector has terms beyond the top degree")
            coeffs = coeffs[:size]
        return cls(tuple(G(x) for x in coeffs) + (GaussianRational(0),) * (size - len(coeffs)))

    @property
    def size(self) -> int:
        return len(self.c)

    def __add__(self, other: "MukaiVector") -> "MukaiVector":
        return MukaiVector(tuple(a + b for a, b in zip(self.c, other.c)))

    def __sub__(self, other: "MukaiVector") -> "MukaiVector":
        return MukaiVector(tuple(a - b for a, b in zip(self.c, other.c)))

    def __neg__(self) -> "MukaiVector":
        return MukaiVector(tuple(-a for a in self.c))

    def scale(self, s) -> "MukaiVector":
        s = G(s)
        return MukaiVector(tuple(s * a for a in self.c))

    def __mul__(self, other: "MukaiVector") -> "MukaiVector":
        """Cup product, truncated above the top degree."""
        n = self.size
        out = [GaussianRational(0)] * n
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            for j in range(n - i):
                if other.c[j] != 0:
                    out[i + j] = out[i + j] + a * other.c[j]
        return MukaiVector(tuple(out))

    def const(self) -> GaussianRational:
        return self.c[0]

    def __repr__(self) -> str:
        return f"MukaiVector({list(self.c)!r})"


def _unit(n: int) -> MukaiVector:
    return MukaiVector.of([1], n)


def exp_nilpotent(v: MukaiVector) -> MukaiVector:
    """exp(v) for v with zero constant term."""
    if v.const() != 0:
        raise ValueError("exp needs a class with zero constant term")
    n = v.size
    out = _unit(n)
    term = _unit(n)
    for k in range(1, n):
        term = (term * v).scale(Fraction(1, k))
        out = out + term
    return out


def sqrt_unipotent(v: MukaiVector) -> MukaiVector:
    """Square root of a class with constant term 1, by the binomial series."""
    if v.const() != 1:
        raise BadTodd("todd class must have constant term 1")
    n = v.size
    x = v - _unit(n)
    out = _unit(n)
    power = _unit(n)
    coef = Fraction(1)
    for k in range(1, n):
        coef = coef * (Fraction(1, 2) - (k - 1)) / k
        power = power * x
        out = out + power.scale(coef)
    return out


def v_dual(v: MukaiVector) -> MukaiVector:
    """Multiply the P^a component by i^(2a) = (-1)^a."""
    return MukaiVector(tuple(x if a % 2 == 0 else -x for a, x in enumerate(v.c)))


def mukai_pairing(v: MukaiVector, w: MukaiVector, ring: TruncRing, c1: MukaiVector) -> GaussianRational:
    if any(x != 0 for k, x in enumerate(c1.c) if k != 1):
        raise ValueError("c1 must be concentrated in degree P^1")
    return ring.integral(v_dual(v) * w * exp_nilpotent(c1.scale(Fraction(1, 2))))


def c1_of_todd(td: MukaiVector) -> MukaiVector:
    c = [GaussianRational(0)] * td.size
    if td.size > 1:
        c[1] = td.c[1] * 2
    return MukaiVector(tuple(c))


def euler_pairing(a: MukaiVector, b: MukaiVector, ring: TruncRing, td: MukaiVector) -> GaussianRational:
    if td.const() != 1:
        raise BadTodd("todd class must have constant term 1")
    s = sqrt_unipotent(td)
    return mukai_pairing(s * a, s * b, ring, c1_of_todd(td))


def todd_series(n: int) -> list[Fraction]:
    """Coefficients of x / (1 - e^-x) up to x^n."""
    # (1 - e^-x)/x = sum_k (-1)^k x^k / (k+1)!
    g = [Fraction((-1) ** k, factorial(k + 1)) for k in range(n + 1)]
    inv = [Fraction(0)] * (n + 1)
    inv[0] = 1 / g[0]
    for k in range(1, n + 1):
        inv[k] = -sum(g[j] * inv[k - j] for j in range(1, k + 1)) / g[0]
    return inv


def projective_space(n: int) -> tuple[TruncRing, MukaiVector, MukaiVector]:
    """Ring, c1 and todd class of P^n."""
    ring = TruncRing(n, 1)
    base = ring.vec(todd_series(n))
    td = ring.one()
    for _ in range(n + 1):
        td = td * base
    c1 = ring.vec([0, n + 1]) if n >= 1 else ring.vec([0])
    return ring, c1, td


def ch_line_bundle(ring: TruncRing, m) -> MukaiVector:
    if ring.d == 0:
        return ring.one()
    return exp_nilpotent(ring.vec([0, m]))


def serre_operator(ring: TruncRing, c1: MukaiVector, d: int | None = None) -> list[list[GaussianRational]]:
    """Matrix of cup product with (-1)^d exp(-c1); column j is the image of P^j."""
    d = ring.d if d is None else d
    S = exp_nilpotent(-c1).scale((-1) ** d)
    cols = [(S * e).c for e in ring.basis()]
    return [[cols[j][i] for j in range(ring.size)] for i in range(ring.size)]


def apply(M, v: MukaiVector) -> MukaiVector:
    out = []
    for row in M:
        acc = GaussianRational(0)
        for x, y in zip(row, v.c):
            acc = acc + x * y
        out.append(acc)
    return MukaiVector(tuple(out))


def random_vector(ring: TruncRing, rng: random.Random, gaussian: bool = True, bound: int = 9) -> MukaiVector:
    def coef():
        re = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        im = Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) if gaussian else 0
        return GaussianRational(re, im)

    return MukaiVector(tuple(coef() for _ in range(ring.size)))


@dataclass(frozen=True)
class SerreReport:
    samples: int
    checked: tuple[tuple[GaussianRational, GaussianRational], ...]

    @property
    def passed(self) -> bool:
        return all(a == b for a, b in self.checked)


def serre_relation_check(ring, c1, td, d=None, samples=20, seed: int = 0) -> SerreReport:
    """Check chi(a, b) = chi(b, S a) on basis pairs and random samples.

    ``samples`` is either a count of random pairs or an explicit list of pairs.
    """
    S = serre_operator(ring, c1, d)
    if isinstance(samples, int):
        rng = random.Random(seed)
        pairs = [(a, b) for a in ring.basis() for b in ring.basis()]
        pairs += [(random_vector(ring, rng), random_vector(ring, rng)) for _ in range(samples)]
    else:
        pairs = list(samples)
    checked = []
    for a, b in pairs:
        lhs = euler_pairing(a, b, ring, td)
        rhs = euler_pairing(b, apply(S, a), ring, td)
        if lhs != rhs:
            raise RelationViolated(f"chi(a,b) = {lhs} but chi(b,Sa) = {rhs}", witness=(a, b))
        checked.append((lhs, rhs))
    return SerreReport(len(pairs), tuple(checked))


def gram_matrix(ring: TruncRing, td: MukaiVector, basis: Sequence[MukaiVector] | None = None):
    basis = list(basis) if basis is not None else ring.basis()
    return [[euler_pairing(a, b, ring, td) for b in basis] for a in basis]


def monodromy_from_pairing(Gm) -> list[list[GaussianRational]]:
    """(G^T)^-1 G."""
    Gm = [[G(x) for x in row] for row in Gm]
    return [[G(x) for x in row] for row in mat_mul(inverse(transpose(Gm)), Gm)]


@dataclass(frozen=True)
class MonodromyData:
    matrix: tuple
    eigenvalues: tuple[complex, ...]
    unipotent_sign: int | None  # +1 if (M-I)^n = 0, -1 if (M+I)^n = 0


def monodromy_data(Gm) -> MonodromyData:
    M = monodromy_from_pairing(Gm)
    n = len(M)
    Id = [[GaussianRational(1 if i == j else 0) for j in range(n)] for i in range(n)]
    sign = None
    for s in (1, -1):
        shifted = mat_sub(M, [[x * s for x in row] for row in Id])
        if is_zero_matrix(mat_pow(shifted, n)):
            sign = s
            break
    eig = tuple(complex(z) for z in np.linalg.eigvals(np.array([[complex(x) for x in row] for row in M])))
    return MonodromyData(tuple(map(tuple, M)), eig, sign)


def chi_table(n: int, ms: Sequence[int]) -> list[GaussianRational]:
    ring, _, td = projective_space(n)
    return [euler_pairing(ring.one(), ch_line_bundle(ring, m), ring, td) for m in ms]


def h0_projective(n: int, m: int) -> int:
    """Sections of O(m) on P^n, counted as monomials of degree m in n+1 variables."""
    return comb(n + m, n) if m >= 0 else 0
