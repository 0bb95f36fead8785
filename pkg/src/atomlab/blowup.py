"""Blowup block operator and its eigenvalue clusters.

Cohomology of the blowup is ordered as H(X), then r-1 shifted copies
Z_1..Z_{r-1} of H(Z).  Every block that is absent from the associated graded
(K_X, K_Z - c1, iota_*, the Chern classes and the c1 correction in the last
block) is scaled by ``epsilon``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import ClusterMismatch, DimensionMismatch
from .exactalg import (
    Q,
    charpoly,
    identity,
    mat_add,
    mat_scale,
    raw_roots,
    _mp_to_complex,
    to_qmatrix,
    zeros,
)


def _zero_block(rows: int, cols: int):
    return [[Fraction(0)] * cols for _ in range(rows)]


def _check_shape(name, m, rows, cols):
    if len(m) != rows or any(len(r) != cols for r in m):
        raise DimensionMismatch(f"{name} must be {rows}x{cols}")


@dataclass(frozen=True)
class BlowupScenario:
    dimHX: int
    dimHZ: int
    r: int
    KX: tuple
    KZminusC1: tuple
    iota_lower: tuple  # H(Z) -> H(X), dimHX x dimHZ
    iota_upper: tuple  # H(X) -> H(Z), dimHZ x dimHX
    chern: tuple = ()  # c_2 .. c_{r-1}, each dimHZ x dimHZ
    c1: tuple | None = None
    Qhat: Fraction = Fraction(1)
    epsilon: Fraction = Fraction(1)
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.r < 2:
            raise DimensionMismatch("codimension r must be at least 2")
        if self.dimHX < 1 or self.dimHZ < 1:
            raise DimensionMismatch("dimHX and dimHZ must be positive")
        hx, hz = self.dimHX, self.dimHZ
        conv = lambda m: tuple(tuple(Q(x) for x in row) for row in m)
        object.__setattr__(self, "KX", conv(self.KX))
        object.__setattr__(self, "KZminusC1", conv(self.KZminusC1))
        object.__setattr__(self, "iota_lower", conv(self.iota_lower))
        object.__setattr__(self, "iota_upper", conv(self.iota_upper))
        object.__setattr__(self, "chern", tuple(conv(c) for c in self.chern))
        c1 = conv(self.c1) if self.c1 is not None else conv(_zero_block(hz, hz))
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "Qhat", Q(self.Qhat))
        object.__setattr__(self, "epsilon", Q(self.epsilon))
        _check_shape("KX", self.KX, hx, hx)
        _check_shape("KZminusC1", self.KZminusC1, hz, hz)
        _check_shape("c1", self.c1, hz, hz)
        _check_shape("iota_lower", self.iota_lower, hx, hz)
        _check_shape("iota_upper", self.iota_upper, hz, hx)
        if len(self.chern) != max(self.r - 2, 0):
            raise DimensionMismatch(f"need chern classes c_2..c_{self.r - 1}, got {len(self.chern)}")
        for j, c in enumerate(self.chern, start=2):
            _check_shape(f"c_{j}", c, hz, hz)

    @property
    def rank(self) -> int:
        return self.dimHX + (self.r - 1) * self.dimHZ

    def chern_class(self, j: int):
        if j == 1:
            return [list(r) for r in self.c1]
        return [list(r) for r in self.chern[j - 2]]

    @classmethod
    def from_dict(cls, doc: dict) -> "BlowupScenario":
        required = ["dimHX", "dimHZ", "r", "KX", "KZminusC1", "iota_lower", "iota_upper"]
        missing = [k for k in required if k not in doc]
        if missing:
            raise ValueError(f"scenario is missing {', '.join(missing)}")
        return cls(
            dimHX=int(doc["dimHX"]),
            dimHZ=int(doc["dimHZ"]),
            r=int(doc["r"]),
            KX=doc["KX"],
            KZminusC1=doc["KZminusC1"],
            iota_lower=doc["iota_lower"],
            iota_upper=doc["iota_upper"],
            chern=tuple(doc.get("chern", ())),
            c1=doc.get("c1"),
            Qhat=doc.get("Qhat", "1"),
            epsilon=doc.get("epsilon", "1"),
            name=doc.get("name", "custom"),
        )

    @classmethod
    def from_json(cls, text: str) -> "BlowupScenario":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        s = lambda m: [[str(x) for x in row] for row in m]
        return {
            "name": self.name,
            "dimHX": self.dimHX,
            "dimHZ": self.dimHZ,
            "r": self.r,
            "KX": s(self.KX),
            "KZminusC1": s(self.KZminusC1),
            "c1": s(self.c1),
            "iota_lower": s(self.iota_lower),
            "iota_upper": s(self.iota_upper),
            "chern": [s(c) for c in self.chern],
            "Qhat": str(self.Qhat),
            "epsilon": str(self.epsilon),
        }


def blp3pt(Qhat=1, epsilon=Fraction(1, 1000)) -> BlowupScenario:
    """Blowup of P^3 at a point: H(X) = span(1, H, H^2, H^3), Z a point."""
    KX = [[0] * 4 for _ in range(4)]
    for i in range(3):
        KX[i + 1][i] = -4
    return BlowupScenario(
        dimHX=4,
        dimHZ=1,
        r=3,
        KX=KX,
        KZminusC1=[[0]],
        iota_lower=[[0], [0], [0], [1]],
        iota_upper=[[1, 0, 0, 0]],
        chern=([[0]],),
        Qhat=Qhat,
        epsilon=epsilon,
        name="blp3pt",
    )


PRESETS = {"blp3pt": blp3pt}


def _assemble(s: BlowupScenario, geometric: bool):
    hx, hz, r = s.dimHX, s.dimHZ, s.r
    n = s.rank
    M = zeros(n)
    eps = s.epsilon if geometric else Fraction(0)
    zoff = lambda i: hx + (i - 1) * hz  # offset of Z_i, i = 1..r-1

    def put(row0, col0, block, scale):
        for a, brow in enumerate(block):
            for b, x in enumerate(brow):
                M[row0 + a][col0 + b] += scale * x

    put(0, 0, s.KX, eps)
    put(0, zoff(r - 1), s.iota_lower, eps * (r - 1))
    put(zoff(1), 0, s.iota_upper, Fraction(-(r - 1)))
    Id = identity(hz)
    for i in range(1, r):
        if i < r - 1:
            put(zoff(i), zoff(i), s.KZminusC1, eps)
        else:
            # K_Z + (r-2) c1 = (K_Z - c1) + (r-1) c1
            put(zoff(i), zoff(i), mat_add(s.KZminusC1, mat_scale(s.c1, r - 1)), eps)
        if i > 1:
            put(zoff(i), zoff(i - 1), Id, Fraction(-(r - 1)))
    # right column: row Z_i carries (r-1) c_{r-i}; row Z_1 also carries (r-1) Qhat
    put(zoff(1), zoff(r - 1), Id, (r - 1) * s.Qhat)
    for i in range(1, r):
        put(zoff(i), zoff(r - 1), s.chern_class(r - i), eps * (r - 1))
    return M


def build_blowup_kappa(s: BlowupScenario) -> list[list[Fraction]]:
    return _assemble(s, geometric=True)


def build_gr_kappa(s: BlowupScenario) -> list[list[Fraction]]:
    return _assemble(s, geometric=False)


def predicted_centers(s: BlowupScenario) -> list[complex]:
    """Nonzero cluster centers: roots of lambda^(r-1) = (-1)^r (r-1)^(r-1) Qhat.

    For odd r these are (r-1) exp(pi i (2j-1)/(r-1)) Qhat^(1/(r-1)).
    """
    r = s.r
    rhs = (-1) ** r * Fraction(r - 1) ** (r - 1) * s.Qhat
    if rhs == 0:
        return []
    m = r - 1
    with mpmath.workdps(30):
        mag = mpmath.root(abs(mpmath.mpf(rhs.numerator) / rhs.denominator), m)
        base = mpmath.pi if rhs < 0 else mpmath.mpf(0)
        return [_mp_to_complex(mag * mpmath.expj((base + 2 * mpmath.pi * j) / m)) for j in range(m)]


def default_radius(s: BlowupScenario) -> float:
    if s.Qhat == 0:
        return 0.1
    return 0.1 * abs(float(s.Qhat)) ** (1.0 / (s.r - 1))


@dataclass(frozen=True)
class ClusterReport:
    centers: tuple[complex, ...]
    sizes: tuple[int, ...]
    expected: tuple[int, ...]
    radius: float
    eigenvalues: tuple[complex, ...]
    max_offset: float

    def to_dict(self) -> dict:
        cx = lambda z: {"re": z.real, "im": z.imag}
        return {
            "radius": self.radius,
            "clusters": [
                {"center": cx(c), "size": n, "expected": e}
                for c, n, e in zip(self.centers, self.sizes, self.expected)
            ],
            "eigenvalues": [cx(z) for z in self.eigenvalues],
            "max_offset": self.max_offset,
        }


def eigenvalues(M) -> list[complex]:
    """Eigenvalues with multiplicity, from the exact characteristic polynomial."""
    out = []
    for z, mult, _ in raw_roots(charpoly(to_qmatrix(M))):
        out.extend([_mp_to_complex(z)] * mult)
    return out


def cluster_verify(M, s: BlowupScenario, radius: float | None = None) -> ClusterReport:
    M = to_qmatrix(M)
    if len(M) != s.rank:
        raise DimensionMismatch(f"matrix has size {len(M)}, scenario rank is {s.rank}")
    radius = default_radius(s) if radius is None else radius
    centers = [0j] + predicted_centers(s)
    expected = [s.dimHX] + [s.dimHZ] * (len(centers) - 1)
    if len(centers) == 1:
        expected = [s.rank]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) <= 2 * radius:
                raise ClusterMismatch(f"radius {radius} makes the cluster disks overlap")
    eig = eigenvalues(M)
    sizes = [0] * len(centers)
    worst = 0.0
    stray = []
    for z in eig:
        k = min(range(len(centers)), key=lambda c: abs(z - centers[c]))
        d = abs(z - centers[k])
        if d > radius:
            stray.append(z)
            continue
        worst = max(worst, d)
        sizes[k] += 1
    report = ClusterReport(tuple(centers), tuple(sizes), tuple(expected), radius, tuple(eig), worst)
    if stray or sizes != expected:
        raise ClusterMismatch(
            f"observed cluster sizes {sizes} (expected {expected}), {len(stray)} eigenvalues outside every disk",
            observed=report,
        )
    return report


def split_cohomology_dims(bX, bZ, r: int) -> list[int]:
    if r < 2:
        raise DimensionMismatch("codimension r must be at least 2")
    length = max(len(bX), len(bZ) + 2 * (r - 1))
    out = [0] * length
    for k, b in enumerate(bX):
        out[k] += b
    for i in range(1, r):
        for k, b in enumerate(bZ):
            out[k + 2 * i] += b
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out
