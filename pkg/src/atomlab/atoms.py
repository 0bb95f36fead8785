"""Hodge diamonds, folded Hodge polynomials, atoms and chemical formulas."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping

from .errors import DimensionMismatch, IdCollision, InvalidDiamond, NotValidated
from .qde import CompleteIntersection


# --------------------------------------------------------------------------
# Diamonds and folding


@dataclass(frozen=True)
class HodgeDiamond:
    d: int
    h: tuple[tuple[int, ...], ...]

    def __init__(self, d: int, h, strict: bool = True):
        if d < 0:
            raise InvalidDiamond("dimension must be nonnegative")
        table = [[0] * (d + 1) for _ in range(d + 1)]
        items = h.items() if isinstance(h, Mapping) else ((tuple(e[:2]), e[2]) for e in h)
        for (p, q), v in items:
            if not (0 <= p <= d and 0 <= q <= d):
                raise InvalidDiamond(f"h^{{{p},{q}}} is outside the diamond of dimension {d}")
            if int(v) != v or v < 0:
                raise InvalidDiamond(f"h^{{{p},{q}}} = {v} is not a nonnegative integer")
            table[p][q] = int(v)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "h", tuple(tuple(r) for r in table))
        if strict:
            self.validate()

    def __getitem__(self, pq) -> int:
        p, q = pq
        if 0 <= p <= self.d and 0 <= q <= self.d:
            return self.h[p][q]
        return 0

    def validate(self) -> None:
        d = self.d
        if self.h[0][0] < 1:
            raise InvalidDiamond("h^{0,0} must be at least 1")
        for p in range(d + 1):
            for q in range(d + 1):
                if self.h[p][q] != self.h[q][p]:
                    raise InvalidDiamond(f"h^{{{p},{q}}} != h^{{{q},{p}}}")
                if self.h[p][q] != self.h[d - p][d - q]:
                    raise InvalidDiamond(f"h^{{{p},{q}}} != h^{{{d - p},{d - q}}}")

    def betti(self) -> list[int]:
        return [sum(self[p, k - p] for p in range(k + 1)) for k in range(2 * self.d + 1)]

    @property
    def total(self) -> int:
        return sum(map(sum, self.h))

    def entries(self):
        return [(p, q, v) for p, row in enumerate(self.h) for q, v in enumerate(row) if v]

    def to_dict(self) -> dict:
        return {"d": self.d, "h": [list(e) for e in self.entries()]}

    @classmethod
    def from_dict(cls, doc: dict, strict: bool = True) -> "HodgeDiamond":
        return cls(int(doc["d"]), [tuple(e) for e in doc.get("h", [])], strict=strict)

    @classmethod
    def from_json(cls, text: str, strict: bool = True) -> "HodgeDiamond":
        return cls.from_dict(json.loads(text), strict=strict)


def point_diamond() -> HodgeDiamond:
    return HodgeDiamond(0, {(0, 0): 1})


def curve_diamond(g: int) -> HodgeDiamond:
    return HodgeDiamond(1, {(0, 0): 1, (1, 1): 1, (1, 0): g, (0, 1): g})


def k3_diamond() -> HodgeDiamond:
    return HodgeDiamond(2, {(0, 0): 1, (2, 2): 1, (2, 0): 1, (0, 2): 1, (1, 1): 20})


def abelian_surface_diamond() -> HodgeDiamond:
    h = {(p, q): comb(2, p) * comb(2, q) for p in range(3) for q in range(3)}
    return HodgeDiamond(2, h)


def projective_space_diamond(n: int) -> HodgeDiamond:
    return HodgeDiamond(n, {(p, p): 1 for p in range(n + 1)})


def quintic_threefold_diamond() -> HodgeDiamond:
    h = {(0, 0): 1, (3, 3): 1, (1, 1): 1, (2, 2): 1}
    h.update({(3, 0): 1, (0, 3): 1, (2, 1): 101, (1, 2): 101})
    return HodgeDiamond(3, h)


def primitive_hodge_numbers(N: int, d: int) -> dict[tuple[int, int], int]:
    """Primitive middle Hodge numbers of a smooth degree-d hypersurface in P^(N-1).

    Counts monomials of the Fermat Jacobian ring: h^{p,n-p}_prim is the
    number of monomials in N variables with exponents <= d-2 and total
    degree (n-p+1) d - N, where n = N-2.
    """
    n = N - 2
    out = {}
    for p in range(n + 1):
        t = (n - p + 1) * d - N
        c = _bounded_compositions(t, N, d - 2) if t >= 0 else 0
        if c:
            out[(p, n - p)] = c
    return out


def _bounded_compositions(total: int, parts: int, cap: int) -> int:
    # inclusion-exclusion on parts exceeding cap
    out = 0
    for j in range(parts + 1):
        rest = total - j * (cap + 1)
        if rest < 0:
            break
        out += (-1) ** j * comb(parts, j) * comb(rest + parts - 1, parts - 1)
    return out


def hypersurface_diamond(N: int, d: int) -> HodgeDiamond:
    n = N - 2
    h = {(p, p): 1 for p in range(n + 1)}
    for (p, q), v in primitive_hodge_numbers(N, d).items():
        h[(p, q)] = h.get((p, q), 0) + v
    return HodgeDiamond(n, h)


def cubic_fourfold_diamond() -> HodgeDiamond:
    return hypersurface_diamond(6, 3)


@dataclass(frozen=True)
class FoldedPoly:
    """Laurent polynomial in t with nonnegative integer coefficients."""

    terms: tuple[tuple[int, int], ...]

    def __init__(self, coeffs: Mapping[int, int] | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[int, int] = {}
        for k, c in items:
            if int(c) != c or c < 0:
                raise ValueError(f"coefficient of t^{k} must be a nonnegative integer")
            acc[int(k)] = acc.get(int(k), 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((k, c) for k, c in acc.items() if c)))

    def __getitem__(self, k: int) -> int:
        return dict(self.terms).get(k, 0)

    @classmethod
    def const(cls, c: int) -> "FoldedPoly":
        return cls({0: c})

    def __add__(self, other: "FoldedPoly") -> "FoldedPoly":
        return FoldedPoly(list(self.terms) + list(other.terms))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.terms)

    @property
    def weight(self) -> int:
        return max((abs(k) for k, _ in self.terms), default=0)

    def is_reciprocal(self) -> bool:
        return all(self[k] == self[-k] for k, _ in self.terms)

    def to_pairs(self) -> list[list[int]]:
        return [[k, c] for k, c in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms, key=lambda kc: -kc[0]):
            if k == 0:
                parts.append(str(c))
                continue
            mon = "t" if k == 1 else f"t^{k}"
            parts.append(mon if c == 1 else f"{c}*{mon}")
        return " + ".join(parts)


def fold(dia: HodgeDiamond) -> FoldedPoly:
    """Substitute u = t, v = 1/t: the coefficient of t^k sums h^{p,q} over p - q = k."""
    acc: dict[int, int] = {}
    for p, q, v in dia.entries():
        acc[p - q] = acc.get(p - q, 0) + v
    return FoldedPoly(acc)


# --------------------------------------------------------------------------
# Atoms and chemical formulas


@dataclass(frozen=True)
class Atom:
    id: str = field(compare=False)
    hodge_poly: FoldedPoly
    rho: int
    dim_witness: int | None = None
    eigenvalue: str | None = None

    def __post_init__(self):
        if self.rho < 1:
            raise ValueError(f"atom {self.id}: rho must be at least 1")
        if self.rho > self.hodge_poly[0]:
            raise ValueError(f"atom {self.id}: rho exceeds the p-q=0 coefficient")

    @property
    def dimension(self) -> int:
        return self.hodge_poly.total

    def key(self, with_witness: bool = True):
        w = self.dim_witness if with_witness else None
        return (self.hodge_poly, self.rho, w, self.eigenvalue)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "P": self.hodge_poly.to_pairs(),
            "rho": self.rho,
            "dim_witness": self.dim_witness,
        }
        if self.eigenvalue is not None:
            out["eigenvalue"] = self.eigenvalue
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "Atom":
        return cls(
            str(doc["id"]),
            FoldedPoly([tuple(kc) for kc in doc["P"]]),
            int(doc["rho"]),
            doc.get("dim_witness"),
            doc.get("eigenvalue"),
        )


POINT = Atom("pt", FoldedPoly.const(1), 1, 0)

# Atom identity can ignore the dimension witness; it is included by default.
IDENTITY_WITH_WITNESS = True


class ChemicalFormula:
    """Finite multiset of atoms, merged by structural identity."""

    __slots__ = ("_table", "_mult")

    def __init__(self, mult: Mapping[str, int] | None = None, atoms: Iterable[Atom] = ()):
        table: dict[str, Atom] = {}
        for a in atoms:
            _register(table, a)
        counts: dict[str, int] = {}
        for aid, m in (mult or {}).items():
            if aid not in table:
                raise KeyError(f"atom {aid!r} is not in the table")
            if int(m) != m or m < 0:
                raise ValueError("multiplicities must be nonnegative integers")
            canon = _canonical_id(table, table[aid])
            if m:
                counts[canon] = counts.get(canon, 0) + int(m)
        self._table = {k: table[k] for k in counts}
        self._mult = counts

    @classmethod
    def of(cls, *pairs: tuple[Atom, int]) -> "ChemicalFormula":
        out = cls()
        for atom, m in pairs:
            out = out + cls({atom.id: m}, [atom])
        return out

    @classmethod
    def empty(cls) -> "ChemicalFormula":
        return cls()

    def atoms(self) -> list[Atom]:
        return [self._table[k] for k in sorted(self._mult)]

    def items(self) -> list[tuple[Atom, int]]:
        return [(self._table[k], self._mult[k]) for k in sorted(self._mult)]

    def multiplicity(self, atom: Atom | str) -> int:
        if isinstance(atom, str):
            return self._mult.get(atom, 0)
        for k, a in self._table.items():
            if _same(a, atom):
                return self._mult[k]
        return 0

    def __len__(self) -> int:
        return sum(self._mult.values())

    @property
    def total_dimension(self) -> int:
        return sum(a.dimension * m for a, m in self.items())

    def _signature(self):
        return sorted(
            ((repr(a.key(IDENTITY_WITH_WITNESS)), m) for a, m in self.items()),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChemicalFormula):
            return NotImplemented
        return self._signature() == other._signature()

    def __hash__(self):
        return hash(tuple(self._signature()))

    def __add__(self, other: "ChemicalFormula") -> "ChemicalFormula":
        return cf_add(self, other)

    def __mul__(self, m: int) -> "ChemicalFormula":
        return cf_scale(self, m)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        inner = ", ".join(f"{a.id}:{m}" for a, m in self.items())
        return f"ChemicalFormula({{{inner}}})"

    def to_dict(self) -> dict:
        return {
            "atoms": [a.to_dict() for a in self.atoms()],
            "mult": {a.id: m for a, m in self.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChemicalFormula":
        atoms = [Atom.from_dict(a) for a in doc.get("atoms", [])]
        return cls({k: int(v) for k, v in doc.get("mult", {}).items()}, atoms)

    @classmethod
    def from_json(cls, text: str) -> "ChemicalFormula":
        return cls.from_dict(json.loads(text))


def _same(a: Atom, b: Atom) -> bool:
    return a.key(IDENTITY_WITH_WITNESS) == b.key(IDENTITY_WITH_WITNESS)


def _register(table: dict[str, Atom], atom: Atom) -> None:
    old = table.get(atom.id)
    if old is not None and not _same(old, atom):
        raise IdCollision(f"id {atom.id!r} names two different atoms")
    table.setdefault(atom.id, atom)


def _canonical_id(table: dict[str, Atom], atom: Atom) -> str:
    # first id (in sort order) carrying the same structural data
    return min(k for k, a in table.items() if _same(a, atom))


def cf_add(a: ChemicalFormula, b: ChemicalFormula) -> ChemicalFormula:
    table: dict[str, Atom] = {}
    for x in a.atoms() + b.atoms():
        _register(table, x)
    mult: dict[str, int] = {}
    for cf in (a, b):
        for atom, m in cf.items():
            mult[atom.id] = mult.get(atom.id, 0) + m
    return ChemicalFormula(mult, table.values())


def cf_scale(a: ChemicalFormula, m: int) -> ChemicalFormula:
    if int(m) != m or m < 0:
        raise ValueError("scale factor must be a nonnegative integer")
    return ChemicalFormula({x.id: k * m for x, k in a.items()}, a.atoms())


def blowup_cf(cfX: ChemicalFormula, cfZ: ChemicalFormula, r: int) -> ChemicalFormula:
    if r < 2:
        raise ValueError("codimension r must be at least 2")
    return cf_add(cfX, cf_scale(cfZ, r - 1))


def proj_bundle_cf(cfX: ChemicalFormula, r: int) -> ChemicalFormula:
    if r < 1:
        raise ValueError("rank r must be at least 1")
    return cf_scale(cfX, r)


def points(n: int) -> ChemicalFormula:
    return ChemicalFormula({"pt": n}, [POINT])


def nef_singleton_cf(dia: HodgeDiamond, rho: int, atom_id: str | None = None) -> ChemicalFormula:
    """A variety with nef canonical class is a single atom."""
    if rho < 1:
        raise ValueError("rho must be at least 1")
    if dia.d == 0:
        return points(dia.total)
    atom = Atom(atom_id or f"eta(d={dia.d})", fold(dia), rho, dia.d)
    return ChemicalFormula({atom.id: 1}, [atom])


# cases where every ambient eigenvalue block is known to be its own atom and
# the primitive middle cohomology sits in the 0-eigenvalue block
VALIDATED_HYPERSURFACES = {(6, (3,))}


def hypersurface_atoms(ci: CompleteIntersection, split, primitive=None, primitive_hodge_classes: int = 0) -> ChemicalFormula:
    """Atoms of a validated Fano hypersurface from the ambient spectral split.

    ``split`` is the SplitBlocks of the ambient kappa; ``primitive`` maps
    (p, q) to primitive middle Hodge numbers and defaults to the Fermat
    Jacobian-ring count.
    """
    if (ci.N, tuple(ci.degrees)) not in VALIDATED_HYPERSURFACES:
        raise NotValidated(f"{ci.label()} is not on the validated list")
    if primitive is None:
        primitive = primitive_hodge_numbers(ci.N, ci.degrees[0])
    prim = FoldedPoly({})
    for (p, q), v in primitive.items():
        prim = prim + FoldedPoly({p - q: v})
    atoms = []
    mult: dict[str, int] = {}
    zero_dim = 0
    for k, entry in enumerate(split.spectrum.entries):
        if abs(entry.value) <= 1e-9:
            zero_dim += entry.multiplicity
            continue
        tag = entry.exact or f"{entry.value.real:.12g}{entry.value.imag:+.12g}i"
        m = entry.multiplicity
        a = Atom(f"lambda={tag}", FoldedPoly.const(m), m, None, tag)
        atoms.append(a)
        mult[a.id] = 1
    zero = Atom(
        "lambda=0",
        FoldedPoly.const(zero_dim) + prim,
        zero_dim + primitive_hodge_classes,
        ci.dim,
        "0",
    )
    atoms.append(zero)
    mult[zero.id] = 1
    cf = ChemicalFormula(mult, atoms)
    betti_total = ci.rank + prim.total
    if cf.total_dimension != betti_total:
        raise DimensionMismatch(
            f"atoms have total dimension {cf.total_dimension}, Betti sum is {betti_total}"
        )
    return cf


# --------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class CatalogRule:
    """Admission rule for atoms coming from varieties of dimension ``dim``.

    An atom passes if its folded polynomial has weight at most ``max_weight``
    and, when it reaches that weight, has rho at least ``rho_floor_at_top``.
    """

    name: str
    dim: int
    max_weight: int
    rho_floor_at_top: int | None = None

    def admits(self, atom: Atom) -> bool:
        P = atom.hodge_poly
        if P.weight > self.max_weight:
            return False
        if self.rho_floor_at_top is not None and self.max_weight > 0:
            top = P[self.max_weight] + P[-self.max_weight]
            if top and atom.rho < self.rho_floor_at_top:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "max_weight": self.max_weight,
            "rho_floor_at_top": self.rho_floor_at_top,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CatalogRule":
        return cls(doc["name"], int(doc["dim"]), int(doc["max_weight"]), doc.get("rho_floor_at_top"))


DEFAULT_RULES = (
    CatalogRule("point", 0, 0),
    CatalogRule("curve", 1, 1),
    # p_g > 0 surfaces carry 1, the hyperplane class and the point class
    CatalogRule("surface", 2, 2, 3),
)


def load_rules(text: str) -> tuple[CatalogRule, ...]:
    return tuple(CatalogRule.from_dict(r) for r in json.loads(text))


@dataclass(frozen=True)
class Verdict:
    verdict: str  # "obstructed" | "inconclusive"
    witness: str | None
    rule_trace: tuple = ()

    @property
    def obstructed(self) -> bool:
        return self.verdict == "obstructed"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "rule_trace": list(self.rule_trace)}


def nonrationality_verdict(cf: ChemicalFormula, d: int, rules=DEFAULT_RULES) -> Verdict:
    if d < 2:
        raise ValueError("verdicts need d >= 2")
    active = [r for r in rules if r.dim <= d - 2]
    trace = []
    witness = None
    for atom in cf.atoms():
        admitted = [r.name for r in active if r.admits(atom)]
        trace.append({"atom": atom.id, "P": str(atom.hodge_poly), "rho": atom.rho, "admitted_by": admitted})
        if not admitted and witness is None:
            witness = atom.id
    return Verdict("obstructed" if witness else "inconclusive", witness, tuple(trace))


@dataclass(frozen=True)
class CYCheck:
    consistent: bool
    k: int | None = None
    lhs: int | None = None
    rhs: int | None = None
    mismatches: tuple = ()

    def to_dict(self) -> dict:
        return {
            "result": "consistent" if self.consistent else "inconsistent",
            "k": self.k,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "mismatches": [list(m) for m in self.mismatches],
        }


def cy_birational_check(d1: HodgeDiamond, d2: HodgeDiamond) -> CYCheck:
    """Compare folded Hodge polynomials of two Calabi-Yau diamonds.

    On mismatch the witness is the highest weight where they differ.
    """
    if d1.d != d2.d:
        raise DimensionMismatch(f"dimensions {d1.d} and {d2.d} differ")
    for dia in (d1, d2):
        if dia[dia.d, 0] != 1:
            raise InvalidDiamond("a Calabi-Yau diamond needs h^{d,0} = 1")
    f1, f2 = fold(d1), fold(d2)
    ks = sorted({k for k, _ in f1.terms} | {k for k, _ in f2.terms})
    bad = [(k, f1[k], f2[k]) for k in ks if f1[k] != f2[k]]
    if not bad:
        return CYCheck(True)
    k, a, b = max(bad, key=lambda m: (abs(m[0]), m[0]))
    return CYCheck(False, k, a, b, tuple(bad))
