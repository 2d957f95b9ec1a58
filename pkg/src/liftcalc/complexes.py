"""Bounded complexes of typed free summands, their homotopy machinery.

Sign conventions are fixed once, globally, and every cocycle identity in
the obstruction engine depends on them bit-exactly:

* differentials raise degree, ``d2 = 0``;
* shift: ``(C[k])^n = C^(n+k)`` with differential ``(-1)^k d``;
* cone of ``s: F -> G``: ``Cone(s)^n = F^(n+1) + G^n`` with
  ``d(a, b) = (-d_F a, s a + d_G b)``;
* Hom complex: degree-n part ``sum_i Hom(F^i, G^(i+n))`` with
  ``D(u) = d_G o u - (-1)^n u o d_F``;
* homotopies of degree-0 maps: ``g - f = d o h + h o d`` with
  ``h^i : F^i -> G^(i-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .coeffs import TRIVIAL, TrivialCoefficients
from .linalg import Matrix, Subspace, block_matrix, cohomology_sizes, kernel_field, \
    row_space_field, solve_field, solve_ring
from .rings import LocalRing
from .typedmat import TypedMat, matrix_from_typed, typed_block, typed_from_matrix


class NotAComplex(Exception):
    def __init__(self, degree, message=None):
        self.degree = degree
        super().__init__(message or f"differential does not square to zero at degree {degree}")


class LevelMismatch(Exception):
    pass


class NotACocycle(Exception):
    pass


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Complex:
    """A bounded complex; degree ``lo + k`` has the summand types ``types[k]``."""

    coeffs: object
    ring: LocalRing
    lo: int
    types: tuple   # tuple of tuples of summand types
    diffs: tuple   # diffs[k]: degree lo+k -> lo+k+1; length max(len(types)-1, 0)

    def __post_init__(self):
        if self.types and len(self.diffs) != len(self.types) - 1:
            raise NotAComplex(None, "differential count does not match support")
        for k, d in enumerate(self.diffs):
            if d.col_types != self.types[k] or d.row_types != self.types[k + 1]:
                raise NotAComplex(self.lo + k, "differential shape mismatch")
            if d.ring != self.ring:
                raise LevelMismatch("differential on a different level")

    @property
    def hi(self) -> int:
        return self.lo + len(self.types) - 1

    def degrees(self):
        return range(self.lo, self.lo + len(self.types))

    def types_at(self, i: int) -> tuple:
        if self.lo <= i <= self.hi:
            return self.types[i - self.lo]
        return ()

    def rank(self, i: int) -> int:
        return len(self.types_at(i))

    @property
    def total_rank(self) -> int:
        return sum(len(t) for t in self.types)

    def diff(self, i: int) -> TypedMat:
        if self.lo <= i < self.hi:
            return self.diffs[i - self.lo]
        return TypedMat.zero(self.coeffs, self.ring, self.types_at(i + 1), self.types_at(i))

    def is_zero_complex(self) -> bool:
        return self.total_rank == 0

    @staticmethod
    def zero(coeffs=TRIVIAL, ring: LocalRing = None) -> "Complex":
        return Complex(coeffs, ring, 0, ((),), ())

    @staticmethod
    def from_ranks(ring: LocalRing, lo: int, ranks, diffs_mats, coeffs=TRIVIAL) -> "Complex":
        """Trivially-typed complex from plain matrices (ranks per degree)."""
        types = tuple(("*",) * r for r in ranks)
        diffs = tuple(typed_from_matrix(m, coeffs) for m in diffs_mats)
        return Complex(coeffs, ring, lo, types, diffs)

    def plain_diff(self, i: int) -> Matrix:
        return matrix_from_typed(self.diff(i))

    def base_change(self, target: LocalRing) -> "Complex":
        return Complex(self.coeffs, target, self.lo, self.types,
                       tuple(d.base_change(target) for d in self.diffs))

    def shift(self, k: int) -> "Complex":
        """``(C[k])^n = C^(n+k)`` with differential ``(-1)^k d``."""
        diffs = self.diffs if k % 2 == 0 else tuple(d.neg() for d in self.diffs)
        return Complex(self.coeffs, self.ring, self.lo - k, self.types, diffs)


def check_complex(c: Complex) -> bool:
    """Verify ``d o d = 0`` in every degree; raises :class:`NotAComplex`."""
    for i in c.degrees():
        comp = c.diff(i + 1).mul(c.diff(i))
        if not comp.is_zero():
            raise NotAComplex(i)
    return True


def direct_sum(a: Complex, b: Complex) -> Complex:
    if a.coeffs is not b.coeffs or a.ring != b.ring:
        raise LevelMismatch("direct sum of complexes on different levels")
    if a.is_zero_complex():
        return b
    if b.is_zero_complex():
        return a
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    types = tuple(a.types_at(i) + b.types_at(i) for i in range(lo, hi + 1))
    diffs = []
    for i in range(lo, hi):
        da, db = a.diff(i), b.diff(i)
        zab = TypedMat.zero(a.coeffs, a.ring, a.types_at(i + 1), b.types_at(i))
        zba = TypedMat.zero(a.coeffs, a.ring, b.types_at(i + 1), a.types_at(i))
        diffs.append(typed_block(a.coeffs, a.ring, [[da, zab], [zba, db]]))
    return Complex(a.coeffs, a.ring, lo, types, tuple(diffs))


# ---------------------------------------------------------------------------
# chain maps and homotopies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainMap:
    """A degree-k map of complexes; ``comp(i) : source^i -> target^(i+k)``.

    Validity (``d o f = (-1)^k f o d``) is checked by :meth:`check`; the
    constructor only verifies shapes.
    """

    source: Complex
    target: Complex
    degree: int
    comps: tuple  # one TypedMat per source support degree

    def __post_init__(self):
        if self.source.ring != self.target.ring or self.source.coeffs is not self.target.coeffs:
            raise LevelMismatch("chain map between different levels")
        if len(self.comps) != len(self.source.types):
            raise LevelMismatch("component count does not match source support")
        for k, m in enumerate(self.comps):
            i = self.source.lo + k
            if m.col_types != self.source.types_at(i) or \
               m.row_types != self.target.types_at(i + self.degree):
                raise LevelMismatch(f"component shape mismatch at degree {i}")

    def comp(self, i: int) -> TypedMat:
        if self.source.lo <= i <= self.source.hi:
            return self.comps[i - self.source.lo]
        return TypedMat.zero(self.source.coeffs, self.source.ring,
                             self.target.types_at(i + self.degree),
                             self.source.types_at(i))

    def check(self) -> bool:
        sgn = -1 if self.degree % 2 else 1
        for i in range(self.source.lo - 1, self.source.hi + 1):
            left = self.target.diff(i + self.degree).mul(self.comp(i))
            right = self.comp(i + 1).mul(self.source.diff(i))
            if sgn < 0:
                right = right.neg()
            if not left.sub(right).is_zero():
                return False
        return True

    @staticmethod
    def make(source, target, degree, comps) -> "ChainMap":
        f = ChainMap(source, target, degree, tuple(comps))
        if not f.check():
            raise LevelMismatch("components do not commute with the differentials")
        return f

    @staticmethod
    def from_components(source, target, comp_by_degree: dict, degree: int = 0) -> "ChainMap":
        comps = []
        for i in source.degrees():
            m = comp_by_degree.get(i)
            if m is None:
                m = TypedMat.zero(source.coeffs, source.ring,
                                  target.types_at(i + degree), source.types_at(i))
            comps.append(m)
        return ChainMap(source, target, degree, tuple(comps))

    @staticmethod
    def zero(source, target, degree: int = 0) -> "ChainMap":
        return ChainMap.from_components(source, target, {}, degree)

    @staticmethod
    def identity(c: Complex) -> "ChainMap":
        return ChainMap(c, c, 0, tuple(
            TypedMat.identity(c.coeffs, c.ring, c.types_at(i)) for i in c.degrees()
        ))

    def compose(self, other: "ChainMap") -> "ChainMap":
        """``self o other`` (apply ``other`` first)."""
        if other.target is not self.source and other.target != self.source:
            raise LevelMismatch("composition endpoint mismatch")
        comps = tuple(
            self.comp(i + other.degree).mul(other.comp(i))
            for i in other.source.degrees()
        )
        return ChainMap(other.source, self.target, self.degree + other.degree, comps)

    def add(self, other: "ChainMap") -> "ChainMap":
        return ChainMap(self.source, self.target, self.degree,
                        tuple(a.add(b) for a, b in zip(self.comps, other.comps)))

    def sub(self, other: "ChainMap") -> "ChainMap":
        return ChainMap(self.source, self.target, self.degree,
                        tuple(a.sub(b) for a, b in zip(self.comps, other.comps)))

    def neg(self) -> "ChainMap":
        return ChainMap(self.source, self.target, self.degree,
                        tuple(a.neg() for a in self.comps))

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.comps)

    def base_change(self, target_ring: LocalRing) -> "ChainMap":
        return ChainMap(self.source.base_change(target_ring),
                        self.target.base_change(target_ring), self.degree,
                        tuple(m.base_change(target_ring) for m in self.comps))


@dataclass(frozen=True)
class Homotopy:
    """Witness ``g - f = d o h + h o d`` for degree-0 maps ``f, g``."""

    f: ChainMap
    g: ChainMap
    comps: tuple  # h^i : source^i -> target^(i-1), per source support degree

    def comp(self, i: int) -> TypedMat:
        src = self.f.source
        if src.lo <= i <= src.hi:
            return self.comps[i - src.lo]
        return TypedMat.zero(src.coeffs, src.ring,
                             self.f.target.types_at(i - 1), src.types_at(i))

    def check(self) -> bool:
        src, tgt = self.f.source, self.f.target
        for i in range(src.lo - 1, src.hi + 2):
            want = self.g.comp(i).sub(self.f.comp(i))
            got = tgt.diff(i - 1).mul(self.comp(i)).add(
                self.comp(i + 1).mul(src.diff(i)))
            if not want.sub(got).is_zero():
                return False
        return True

    @staticmethod
    def make(f, g, comp_by_degree: dict) -> "Homotopy":
        comps = []
        for i in f.source.degrees():
            m = comp_by_degree.get(i)
            if m is None:
                m = TypedMat.zero(f.source.coeffs, f.source.ring,
                                  f.target.types_at(i - 1), f.source.types_at(i))
            comps.append(m)
        h = Homotopy(f, g, tuple(comps))
        if not h.check():
            raise LevelMismatch("homotopy identity fails")
        return h


# ---------------------------------------------------------------------------
# cones and cylinders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeTriangle:
    cone: Complex
    include: ChainMap      # G -> Cone(s)
    project: ChainMap      # Cone(s) -> F[1]
    null_witness: Homotopy  # for the composite F -> G -> Cone(s)


def cone(s: ChainMap) -> ConeTriangle:
    """Mapping cone with its triangle maps and null-homotopy witness."""
    if s.degree != 0:
        raise LevelMismatch("cone needs a degree-0 map")
    F, G = s.source, s.target
    C, R = F.coeffs, F.ring
    lo = min(F.lo - 1, G.lo)
    hi = max(F.hi - 1, G.hi)
    types = tuple(F.types_at(i + 1) + G.types_at(i) for i in range(lo, hi + 1))
    diffs = []
    for i in range(lo, hi):
        dF = F.diff(i + 1).neg()
        zFG = TypedMat.zero(C, R, F.types_at(i + 2), G.types_at(i))
        si = s.comp(i + 1)
        dG = G.diff(i)
        diffs.append(typed_block(C, R, [[dF, zFG], [si, dG]]))
    cone_cx = Complex(C, R, lo, types, tuple(diffs))

    include = ChainMap(G, cone_cx, 0, tuple(
        typed_block(C, R, [
            [TypedMat.zero(C, R, F.types_at(i + 1), G.types_at(i))],
            [TypedMat.identity(C, R, G.types_at(i))],
        ]) for i in G.degrees()
    ))
    shifted = F.shift(1)
    project = ChainMap(cone_cx, shifted, 0, tuple(
        typed_block(C, R, [[
            TypedMat.identity(C, R, F.types_at(i + 1)),
            TypedMat.zero(C, R, F.types_at(i + 1), G.types_at(i)),
        ]]) for i in range(lo, hi + 1)
    ))
    # h(x) = (x, 0) in Cone^(n-1) = F^n + G^(n-1) witnesses incl o s ~ 0
    composite = include.compose(s)
    witness = Homotopy.make(ChainMap.zero(F, cone_cx), composite, {
        i: typed_block(C, R, [
            [TypedMat.identity(C, R, F.types_at(i))],
            [TypedMat.zero(C, R, G.types_at(i - 1), F.types_at(i))],
        ]) for i in F.degrees()
    })
    return ConeTriangle(cone_cx, include, project, witness)


@dataclass(frozen=True)
class CylinderFactorization:
    cylinder: Complex
    embed: ChainMap        # F -> Cyl(s), degreewise split mono
    retraction: tuple      # graded left inverse of embed, per cylinder degree
    collapse: ChainMap     # q : Cyl(s) -> G, homotopy equivalence
    section: ChainMap      # G -> Cyl(s) with collapse o section = id
    section_witness: Homotopy  # section o collapse ~ id


def cylinder_factor(s: ChainMap) -> CylinderFactorization:
    """Factor ``s`` as a split mono into the cylinder followed by a
    homotopy equivalence onto the target, with stored witnesses."""
    if s.degree != 0:
        raise LevelMismatch("cylinder needs a degree-0 map")
    F, G = s.source, s.target
    C, R = F.coeffs, F.ring
    lo = min(F.lo - 1, G.lo)  # the middle slot F^(n+1) reaches one lower
    hi = max(F.hi, G.hi)
    types = tuple(F.types_at(i) + F.types_at(i + 1) + G.types_at(i)
                  for i in range(lo, hi + 1))
    diffs = []
    for i in range(lo, hi):
        z = lambda r, c: TypedMat.zero(C, R, r, c)
        fi, fi1, fi2 = F.types_at(i), F.types_at(i + 1), F.types_at(i + 2)
        gi, gi1 = G.types_at(i), G.types_at(i + 1)
        diffs.append(typed_block(C, R, [
            [F.diff(i), TypedMat.identity(C, R, fi1).neg(), z(fi1, gi)],
            [z(fi2, fi), F.diff(i + 1).neg(), z(fi2, gi)],
            [z(gi1, fi), s.comp(i + 1), G.diff(i)],
        ]))
    cyl = Complex(C, R, lo, types, tuple(diffs))

    embed = ChainMap(F, cyl, 0, tuple(
        typed_block(C, R, [
            [TypedMat.identity(C, R, F.types_at(i))],
            [TypedMat.zero(C, R, F.types_at(i + 1), F.types_at(i))],
            [TypedMat.zero(C, R, G.types_at(i), F.types_at(i))],
        ]) for i in F.degrees()
    ))
    retraction = tuple(
        typed_block(C, R, [[
            TypedMat.identity(C, R, F.types_at(i)),
            TypedMat.zero(C, R, F.types_at(i), F.types_at(i + 1)),
            TypedMat.zero(C, R, F.types_at(i), G.types_at(i)),
        ]]) for i in range(lo, hi + 1)
    )
    collapse = ChainMap(cyl, G, 0, tuple(
        typed_block(C, R, [[
            s.comp(i),
            TypedMat.zero(C, R, G.types_at(i), F.types_at(i + 1)),
            TypedMat.identity(C, R, G.types_at(i)),
        ]]) for i in range(lo, hi + 1)
    ))
    section = ChainMap(G, cyl, 0, tuple(
        typed_block(C, R, [
            [TypedMat.zero(C, R, F.types_at(i), G.types_at(i))],
            [TypedMat.zero(C, R, F.types_at(i + 1), G.types_at(i))],
            [TypedMat.identity(C, R, G.types_at(i))],
        ]) for i in G.degrees()
    ))
    # id - section o collapse = d h + h d with h(x, x', y) = (0, x, 0)
    witness = Homotopy.make(section.compose(collapse), ChainMap.identity(cyl), {
        i: typed_block(C, R, [
            [TypedMat.zero(C, R, F.types_at(i - 1), F.types_at(i)),
             TypedMat.zero(C, R, F.types_at(i - 1), F.types_at(i + 1)),
             TypedMat.zero(C, R, F.types_at(i - 1), G.types_at(i))],
            [TypedMat.identity(C, R, F.types_at(i)),
             TypedMat.zero(C, R, F.types_at(i), F.types_at(i + 1)),
             TypedMat.zero(C, R, F.types_at(i), G.types_at(i))],
            [TypedMat.zero(C, R, G.types_at(i - 1), F.types_at(i)),
             TypedMat.zero(C, R, G.types_at(i - 1), F.types_at(i + 1)),
             TypedMat.zero(C, R, G.types_at(i - 1), G.types_at(i))],
        ]) for i in range(lo, hi + 1)
    })
    return CylinderFactorization(cyl, embed, retraction, collapse, section, witness)


# ---------------------------------------------------------------------------
# graded-map layouts and flattened operators
# ---------------------------------------------------------------------------


class GradedMapLayout:
    """Coordinates for graded maps ``source -> target`` of a fixed degree.

    Slots enumerate ``(degree, row, col, hom-basis-index)`` in a fixed
    order, giving each graded map a canonical coordinate vector over the
    level ring.
    """

    def __init__(self, source: Complex, target: Complex, degree: int):
        self.source, self.target, self.degree = source, target, degree
        self.coeffs, self.ring = source.coeffs, source.ring
        self.blocks = []  # (i, row, col, hom_dim, offset)
        offset = 0
        for i in source.degrees():
            cts = source.types_at(i)
            rts = target.types_at(i + degree)
            for r, rt in enumerate(rts):
                for c, ct in enumerate(cts):
                    hd = self.coeffs.hom_dim(ct, rt)
                    self.blocks.append((i, r, c, hd, offset))
                    offset += hd
        self.dim = offset

    def pack(self, graded: dict) -> list:
        C, R = self.coeffs, self.ring
        vec = [R.zero] * self.dim
        for (i, r, c, hd, off) in self.blocks:
            m = graded.get(i)
            if m is None:
                continue
            coords = C.to_coords(R, m.col_types[c], m.row_types[r], m.entries[r][c])
            vec[off:off + hd] = list(coords)
        return vec

    def unpack(self, vec) -> dict:
        C, R = self.coeffs, self.ring
        out = {}
        for i in self.source.degrees():
            cts = self.source.types_at(i)
            rts = self.target.types_at(i + self.degree)
            out[i] = [[C.zero(R, ct, rt) for ct in cts] for rt in rts]
        for (i, r, c, hd, off) in self.blocks:
            ct = self.source.types_at(i)[c]
            rt = self.target.types_at(i + self.degree)[r]
            out[i][r][c] = C.from_coords(R, ct, rt, tuple(vec[off:off + hd]))
        return {
            i: TypedMat(C, R, self.target.types_at(i + self.degree),
                        self.source.types_at(i), tuple(tuple(row) for row in rows))
            for i, rows in out.items()
        }

    def zero_graded(self) -> dict:
        return self.unpack([self.ring.zero] * self.dim)


def flat_operator(layout_in: GradedMapLayout, layout_out: GradedMapLayout, fn) -> Matrix:
    """Matrix of a linear operator between graded-map spaces."""
    R = layout_in.ring
    cols = []
    zero_vec = [R.zero] * layout_in.dim
    for idx in range(layout_in.dim):
        vec = list(zero_vec)
        vec[idx] = R.one
        cols.append(layout_out.pack(fn(layout_in.unpack(vec))))
    rows = [[cols[j][i] for j in range(layout_in.dim)] for i in range(layout_out.dim)]
    return Matrix.from_rows(R, rows) if layout_out.dim else Matrix(R, 0, layout_in.dim, ())


# ---------------------------------------------------------------------------
# Hom complexes and cohomology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatComplex:
    """A complex of free level-ring modules given by plain matrices."""

    ring: LocalRing
    lo: int
    dims: tuple
    dmats: tuple  # dmats[k] : dims[k] -> dims[k+1]

    @property
    def hi(self):
        return self.lo + len(self.dims) - 1

    def dim(self, n: int) -> int:
        if self.lo <= n <= self.hi:
            return self.dims[n - self.lo]
        return 0

    def d(self, n: int) -> Matrix:
        if self.lo <= n < self.hi:
            return self.dmats[n - self.lo]
        return Matrix.zero(self.ring, self.dim(n + 1), self.dim(n))


class HomComplex:
    """``Hom(F, G)`` with degree-n differential ``d o u - (-1)^n u o d``."""

    def __init__(self, source: Complex, target: Complex):
        if source.ring != target.ring or source.coeffs is not target.coeffs:
            raise LevelMismatch("hom complex needs one level")
        self.source, self.target = source, target
        self.ring = source.ring
        self.lo = target.lo - source.hi
        self.hi = target.hi - source.lo
        if self.lo > self.hi:
            self.lo, self.hi = 0, 0
        self.layouts = {
            n: GradedMapLayout(source, target, n) for n in range(self.lo, self.hi + 2)
        }
        dmats = []
        for n in range(self.lo, self.hi + 1):
            dmats.append(flat_operator(
                self.layouts[n], self.layouts[n + 1],
                lambda u, n=n: self._apply_d(u, n)))
        self.flat = FlatComplex(self.ring, self.lo,
                                tuple(self.layouts[n].dim for n in range(self.lo, self.hi + 1)),
                                tuple(dmats[:-1]) if len(dmats) > 1 else ())
        self._top_d = dmats[-1] if dmats else None

    def _apply_d(self, u: dict, n: int) -> dict:
        F, G = self.source, self.target
        out = {}
        for i in F.degrees():
            a = G.diff(i + n).mul(u[i]) if i in u else None
            b = u.get(i + 1)
            term = a
            if b is not None:
                bterm = b.mul(F.diff(i))
                if n % 2 == 0:
                    bterm = bterm.neg()
                term = bterm if term is None else term.add(bterm)
            if term is not None:
                out[i] = term
        return out

    def layout(self, n: int) -> GradedMapLayout:
        if n in self.layouts:
            return self.layouts[n]
        return GradedMapLayout(self.source, self.target, n)

    def dim(self, n: int) -> int:
        return self.layout(n).dim

    def pack(self, n: int, graded: dict) -> Matrix:
        return Matrix.from_rows(self.ring, [self.layout(n).pack(graded)])

    def unpack(self, n: int, row: Matrix) -> dict:
        return self.layout(n).unpack(list(row.entries[0]) if row.rows else [])

    def d(self, n: int) -> Matrix:
        if self.lo <= n < self.hi:
            return self.flat.d(n)
        if n == self.hi and self._top_d is not None:
            return self._top_d
        return Matrix.zero(self.ring, self.dim(n + 1), self.dim(n))


def hom_complex(source: Complex, target: Complex) -> HomComplex:
    return HomComplex(source, target)


def flat_from_complex(c: Complex) -> FlatComplex:
    """Underlying flat complex of a trivially-typed complex."""
    dims = tuple(len(t) for t in c.types)
    dmats = tuple(matrix_from_typed(d) for d in c.diffs)
    return FlatComplex(c.ring, c.lo, dims, dmats)


@dataclass(frozen=True)
class CohomologyData:
    """Canonical bases at one degree of a flat complex over the base field.

    The cocycle and coboundary spaces are kept in reduced echelon form and
    the representatives extend the coboundaries to the cocycles by greedy
    pivot extension, so coordinates are reproducible.
    """

    degree: int
    ambient: int
    cocycles: Subspace
    coboundaries: Subspace
    reps: Matrix  # rows: canonical representatives of a basis of H

    @property
    def dim(self) -> int:
        return self.reps.rows

    def is_cocycle(self, row: Matrix) -> bool:
        return self.cocycles.contains(row)

    def class_coordinates(self, row: Matrix) -> Matrix:
        """Coordinates in the canonical basis of H (raises on non-cocycles)."""
        if not self.is_cocycle(row):
            raise NotACocycle(f"vector is not a degree-{self.degree} cocycle")
        field = self.cocycles.field
        stacked = block_matrix(field, [[self.coboundaries.basis], [self.reps]])
        x, _ = solve_field(stacked.transpose(), row.transpose())
        if x is None:
            raise NotACocycle("cocycle failed to split over Z = B + H")
        return _tail(x.transpose(), self.coboundaries.dim, self.dim)

    def is_zero_class(self, row: Matrix) -> bool:
        return self.coboundaries.contains(row)


def _tail(row: Matrix, skip: int, keep: int) -> Matrix:
    from .linalg import extract_block
    return extract_block(row, 0, skip, 1, keep)


def cohomology(flat: FlatComplex):
    """Graded dimensions and canonical bases of a field-level flat complex."""
    if not flat.ring.is_field:
        raise LevelMismatch("cohomology with canonical bases needs the base field")
    out = {}
    for n in range(flat.lo, flat.hi + 1):
        dim = flat.dim(n)
        z_basis = kernel_field(flat.d(n))
        cocycles = Subspace(flat.ring, dim, z_basis)
        b_rows = row_space_field(flat.d(n - 1).transpose())
        coboundaries = Subspace(flat.ring, dim, b_rows)
        kept, _ = coboundaries.extend_greedily(cocycles.basis)
        reps = block_matrix(flat.ring, [[k] for k in kept]) if kept \
            else Matrix.zero(flat.ring, 0, dim)
        out[n] = CohomologyData(n, dim, cocycles, coboundaries, reps)
    return out


def complex_cohomology(c: Complex):
    """Cohomology of a trivially-typed complex over the base field."""
    return cohomology(flat_from_complex(c))


def is_acyclic_at_level(flat: FlatComplex) -> bool:
    """Exactness of a flat complex over any level, decided by cardinalities."""
    for n in range(flat.lo, flat.hi + 1):
        ker, im = cohomology_sizes(flat.d(n - 1), flat.d(n))
        if ker != im:
            return False
    return True


# ---------------------------------------------------------------------------
# null-homotopy solving
# ---------------------------------------------------------------------------


def null_homotopy_solve(f: ChainMap) -> Optional[Homotopy]:
    """Find ``h`` with ``f = d o h + h o d`` or certify none exists.

    Works over every level: the defining equations form a linear system
    over the level ring, decided exactly by chain-ring elimination.
    """
    if f.degree != 0:
        raise LevelMismatch("null-homotopy solving needs a degree-0 map")
    F, G = f.source, f.target
    layout_h = GradedMapLayout(F, G, -1)
    layout_eq = GradedMapLayout(F, G, 0)

    def op(h):
        return {
            i: G.diff(i - 1).mul(h[i]).add(h[i + 1].mul(F.diff(i)))
            if i + 1 in h else G.diff(i - 1).mul(h[i])
            for i in F.degrees()
        }

    a = flat_operator(layout_h, layout_eq, op)
    rhs = Matrix.from_rows(f.source.ring, [[x] for x in layout_eq.pack(
        {i: f.comp(i) for i in F.degrees()})]) if layout_eq.dim else Matrix(f.source.ring, 0, 1, ())
    x, _ = solve_ring(a, rhs)
    if x is None:
        return None
    comps = layout_h.unpack([x.entries[i][0] for i in range(layout_h.dim)])
    return Homotopy.make(ChainMap.zero(F, G), f, comps)


def homotopic(f: ChainMap, g: ChainMap) -> Optional[Homotopy]:
    h = null_homotopy_solve(g.sub(f))
    if h is None:
        return None
    return Homotopy(f, g, h.comps)


# ---------------------------------------------------------------------------
# minimization over the base field, homotopy equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalModel:
    """Split of a field-level complex into a minimal complex plus disks.

    ``project o include = id`` on the minimal complex and
    ``include o project = id - (d h + h d)`` on the original one.
    """

    original: Complex
    minimal: Complex
    project: ChainMap   # original -> minimal
    include: ChainMap   # minimal -> original
    homotopy: Homotopy  # include o project ~ id


def _find_invertible_entry(c: Complex):
    C, R = c.coeffs, c.ring
    for i in c.degrees():
        d = c.diff(i)
        for r, rt in enumerate(d.row_types):
            for cc, ct in enumerate(d.col_types):
                if ct != rt and not isinstance(C, TrivialCoefficients):
                    continue
                inv = C.invert(R, rt, d.entries[r][cc])
                if inv is not None:
                    return i, r, cc, inv
    return None


def minimize(c: Complex) -> MinimalModel:
    """Split off disks along invertible differential entries until none remain.

    Over the base field with trivial coefficients the result has zero
    differential, so two complexes are homotopy equivalent exactly when
    their minimal models have equal ranks per degree.
    """
    if not c.ring.is_field:
        raise LevelMismatch("minimization is a base-field operation")
    current = c
    project = ChainMap.identity(c)
    include = ChainMap.identity(c)
    hcomps = {i: TypedMat.zero(c.coeffs, c.ring, c.types_at(i - 1), c.types_at(i))
              for i in c.degrees()}

    while True:
        found = _find_invertible_entry(current)
        if found is None:
            break
        i, r, cc, inv = found
        nxt, p_step, i_step, h_step = _split_disk(current, i, r, cc, inv)
        # compose witnesses: h_total = h + include o h_step o project
        new_h = {}
        for deg in c.degrees():
            term = hcomps[deg]
            mid = h_step.get(deg)
            if mid is not None:
                term = term.add(include.comp(deg - 1).mul(mid.mul(project.comp(deg))))
            new_h[deg] = term
        hcomps = new_h
        project = ChainMap(c, nxt, 0, tuple(
            p_step.comp(d).mul(project.comp(d)) for d in c.degrees()))
        include = ChainMap(nxt, c, 0, tuple(
            include.comp(d).mul(i_step.comp(d)) for d in nxt.degrees()))
        current = nxt

    homotopy = Homotopy.make(include.compose(project), ChainMap.identity(c), hcomps)
    if not project.check() or not include.check():
        raise NotAComplex(None, "minimization produced non-chain maps")
    return MinimalModel(c, current, project, include, homotopy)


def _split_disk(c: Complex, i: int, r: int, cc: int, inv):
    """One Gaussian elimination step on an invertible entry of d^i."""
    C, R = c.coeffs, c.ring
    d = c.diff(i)
    src_types = c.types_at(i)
    tgt_types = c.types_at(i + 1)
    keep_src = [k for k in range(len(src_types)) if k != cc]
    keep_tgt = [k for k in range(len(tgt_types)) if k != r]
    new_types = list(c.types)
    new_types[i - c.lo] = tuple(src_types[k] for k in keep_src)
    new_types[i + 1 - c.lo] = tuple(tgt_types[k] for k in keep_tgt)

    def sel(m: TypedMat, rows, cols) -> TypedMat:
        return TypedMat(C, R, tuple(m.row_types[k] for k in rows),
                        tuple(m.col_types[k] for k in cols),
                        tuple(tuple(m.entries[a][b] for b in cols) for a in rows))

    a_entry = d.entries[r][cc]
    # corrected middle differential: d' = d[keep] - col * inv * row
    col = sel(d, keep_tgt, [cc])
    row = sel(d, [r], keep_src)
    inv_mat = TypedMat(C, R, (src_types[cc],), (tgt_types[r],), ((inv,),))
    corr = col.mul(inv_mat).mul(row)
    new_mid = sel(d, keep_tgt, keep_src).sub(corr)

    new_diffs = list(c.diffs)
    new_diffs[i - c.lo] = new_mid
    if i - 1 >= c.lo:
        new_diffs[i - 1 - c.lo] = sel(c.diff(i - 1),
                                      keep_src, range(c.rank(i - 1)))
    if i + 1 < c.hi:
        new_diffs[i + 1 - c.lo] = sel(c.diff(i + 1),
                                      range(c.rank(i + 2)), keep_tgt)
    nxt = Complex(C, R, c.lo, tuple(new_types), tuple(new_diffs))

    # projection (new coordinates), inclusion, and disk homotopy
    proj_comps, incl_comps, h_step = {}, {}, {}
    for deg in c.degrees():
        if deg == i:
            # new x_B = x_B; include x_B -> x_B - basis-change correction
            rows = []
            for k in keep_src:
                row_entries = []
                for j in range(len(src_types)):
                    if j == k:
                        row_entries.append(C.identity(R, src_types[k]))
                    elif j == cc:
                        # P^{-1} adds a^{-1} b: drop after projection, so the
                        # projection is plain deletion
                        row_entries.append(C.zero(R, src_types[j], src_types[k]))
                    else:
                        row_entries.append(C.zero(R, src_types[j], src_types[k]))
                rows.append(tuple(row_entries))
            proj_comps[deg] = TypedMat(C, R, nxt.types_at(deg), src_types, tuple(rows))
            # include: B -> A + B via P: x_B -> (-a^{-1} b x_B, x_B)
            rows = []
            b_row = sel(d, [r], keep_src)  # b : B -> C-row? no: row r over kept cols
            for j, jt in enumerate(src_types):
                row_entries = []
                for pos, k in enumerate(keep_src):
                    if j == k:
                        row_entries.append(C.identity(R, src_types[k]))
                    elif j == cc:
                        val = C.compose(R, inv, b_row.entries[0][pos])
                        row_entries.append(C.neg(R, val))
                    else:
                        row_entries.append(C.zero(R, src_types[k], src_types[j]))
                rows.append(tuple(row_entries))
            incl_comps[deg] = TypedMat(C, R, src_types, nxt.types_at(deg), tuple(rows))
        elif deg == i + 1:
            # projection: y_D -> y_D - c a^{-1} y_C ; inclusion: plain
            c_col = sel(d, keep_tgt, [cc])
            rows = []
            for pos, k in enumerate(keep_tgt):
                row_entries = []
                for j, jt in enumerate(tgt_types):
                    if j == k:
                        row_entries.append(C.identity(R, tgt_types[k]))
                    elif j == r:
                        val = C.compose(R, c_col.entries[pos][0], inv)
                        row_entries.append(C.neg(R, val))
                    else:
                        row_entries.append(C.zero(R, tgt_types[j], tgt_types[k]))
                rows.append(tuple(row_entries))
            proj_comps[deg] = TypedMat(C, R, nxt.types_at(deg), tgt_types, tuple(rows))
            rows = []
            for j, jt in enumerate(tgt_types):
                row_entries = []
                for k in keep_tgt:
                    if j == k:
                        row_entries.append(C.identity(R, tgt_types[k]))
                    else:
                        row_entries.append(C.zero(R, tgt_types[k], tgt_types[j]))
                rows.append(tuple(row_entries))
            incl_comps[deg] = TypedMat(C, R, tgt_types, nxt.types_at(deg), tuple(rows))
        else:
            proj_comps[deg] = TypedMat.identity(C, R, c.types_at(deg))
            incl_comps[deg] = TypedMat.identity(C, R, c.types_at(deg))
        # disk homotopy: h^(i+1) = incl_A o a^{-1} o proj_C, zero elsewhere
        if deg == i + 1:
            rows = []
            for j, jt in enumerate(src_types):
                row_entries = []
                for k, kt in enumerate(tgt_types):
                    if j == cc and k == r:
                        row_entries.append(inv)
                    else:
                        row_entries.append(C.zero(R, kt, jt))
                rows.append(tuple(row_entries))
            h_step[deg] = TypedMat(C, R, src_types, tgt_types, tuple(rows))

    project = ChainMap(c, nxt, 0, tuple(proj_comps[dd] for dd in c.degrees()))
    include = ChainMap(nxt, c, 0, tuple(incl_comps[dd] for dd in nxt.degrees()))
    return nxt, project, include, h_step


@dataclass(frozen=True)
class Equivalence:
    """Homotopy-equivalence data ``forward o backward ~ id`` both ways."""

    forward: ChainMap
    backward: ChainMap
    fwd_back: Homotopy  # forward o backward ~ id_target
    back_fwd: Homotopy  # backward o forward ~ id_source


UNKNOWN = "unknown"


def _trim(c: Complex) -> Complex:
    types = list(c.types)
    diffs = list(c.diffs)
    lo = c.lo
    while types and not types[0]:
        types.pop(0)
        if diffs:
            diffs.pop(0)
        lo += 1
    while types and not types[-1]:
        types.pop()
        if diffs:
            diffs.pop()
    if not types:
        return Complex(c.coeffs, c.ring, 0, ((),), ())
    return Complex(c.coeffs, c.ring, lo, tuple(types), tuple(diffs))


def homotopy_equivalent_field(a: Complex, b: Complex):
    """Decide homotopy equivalence over the base field.

    Returns an :class:`Equivalence`, ``None`` (certified inequivalent), or
    ``UNKNOWN`` when typed minimal models cannot be matched within the
    implemented search.  With trivial coefficients the answer is complete:
    minimal models over a field have zero differential, so equivalence is
    exactly equality of rank profiles.
    """
    ma, mb = minimize(a), minimize(b)
    trivial = isinstance(a.coeffs, TrivialCoefficients)
    u = _match_by_identity(ma.minimal, mb.minimal)
    uinv = _match_by_identity(mb.minimal, ma.minimal)
    if u is None or uinv is None:
        return None if trivial else UNKNOWN
    fwd = mb.include.compose(u).compose(ma.project)
    bwd = ma.include.compose(uinv).compose(mb.project)
    h_b = homotopic(fwd.compose(bwd), ChainMap.identity(b))
    h_a = homotopic(bwd.compose(fwd), ChainMap.identity(a))
    if h_b is None or h_a is None:
        return UNKNOWN
    return Equivalence(fwd, bwd, h_b, h_a)


def _match_by_identity(a: Complex, b: Complex):
    """Identity-shaped iso between complexes with equal nonzero profiles."""
    prof_a = {i: a.types_at(i) for i in a.degrees() if a.rank(i)}
    prof_b = {i: b.types_at(i) for i in b.degrees() if b.rank(i)}
    if prof_a != prof_b:
        return None
    for i in set(prof_a):
        if not a.diff(i).entries == b.diff(i).entries:
            return None
    return ChainMap(a, b, 0, tuple(
        TypedMat.identity(a.coeffs, a.ring, a.types_at(i))
        if a.types_at(i) == b.types_at(i)
        else TypedMat.zero(a.coeffs, a.ring, b.types_at(i), a.types_at(i))
        for i in a.degrees()
    ))
