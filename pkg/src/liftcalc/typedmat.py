"""Matrices of morphisms between formal sums of typed rank-one summands.

A :class:`TypedMat` represents a morphism between modules of the shape
``P(c_1) + ... + P(c_k)`` where the summand types come from a coefficient
system; composition is ordinary matrix composition with entries combined
through the coefficient object.  With trivial coefficients this is exactly
an ordinary matrix over the level ring.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import DimensionMismatch, Matrix
from .rings import LocalRing, Tower
from .coeffs import entry_b_decompose, entry_b_scale


@dataclass(frozen=True)
class TypedMat:
    coeffs: object
    ring: LocalRing
    row_types: tuple
    col_types: tuple
    entries: tuple  # tuple of row tuples of entry values

    def __post_init__(self):
        if len(self.entries) != len(self.row_types) or any(
            len(r) != len(self.col_types) for r in self.entries
        ):
            raise DimensionMismatch("entry grid does not match type lists")

    @property
    def rows(self) -> int:
        return len(self.row_types)

    @property
    def cols(self) -> int:
        return len(self.col_types)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(coeffs, ring, row_types, col_types) -> "TypedMat":
        row_types, col_types = tuple(row_types), tuple(col_types)
        return TypedMat(coeffs, ring, row_types, col_types, tuple(
            tuple(coeffs.zero(ring, ct, rt) for ct in col_types) for rt in row_types
        ))

    @staticmethod
    def identity(coeffs, ring, types) -> "TypedMat":
        types = tuple(types)
        return TypedMat(coeffs, ring, types, types, tuple(
            tuple(
                coeffs.identity(ring, rt) if i == j else coeffs.zero(ring, ct, rt)
                for j, ct in enumerate(types)
            )
            for i, rt in enumerate(types)
        ))

    @staticmethod
    def from_rows(coeffs, ring, row_types, col_types, rows) -> "TypedMat":
        return TypedMat(coeffs, ring, tuple(row_types), tuple(col_types),
                        tuple(tuple(r) for r in rows))

    # -- arithmetic --------------------------------------------------------

    def _same_shape(self, other: "TypedMat"):
        if (self.coeffs is not other.coeffs or self.ring != other.ring
                or self.row_types != other.row_types
                or self.col_types != other.col_types):
            raise DimensionMismatch("typed shape mismatch")

    def add(self, other: "TypedMat") -> "TypedMat":
        self._same_shape(other)
        C, R = self.coeffs, self.ring
        return TypedMat(C, R, self.row_types, self.col_types, tuple(
            tuple(C.add(R, a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)
        ))

    def sub(self, other: "TypedMat") -> "TypedMat":
        self._same_shape(other)
        C, R = self.coeffs, self.ring
        return TypedMat(C, R, self.row_types, self.col_types, tuple(
            tuple(C.sub(R, a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)
        ))

    def neg(self) -> "TypedMat":
        C, R = self.coeffs, self.ring
        return TypedMat(C, R, self.row_types, self.col_types, tuple(
            tuple(C.neg(R, a) for a in row) for row in self.entries
        ))

    def scale(self, c) -> "TypedMat":
        C, R = self.coeffs, self.ring
        return TypedMat(C, R, self.row_types, self.col_types, tuple(
            tuple(C.scale(R, c, a) for a in row) for row in self.entries
        ))

    def mul(self, other: "TypedMat") -> "TypedMat":
        """Composition ``self o other`` as matrices of morphisms."""
        if self.coeffs is not other.coeffs or self.ring != other.ring:
            raise DimensionMismatch("typed matrices over different coefficients")
        if self.col_types != other.row_types:
            raise DimensionMismatch("inner types do not match")
        C, R = self.coeffs, self.ring
        out = []
        for i, rt in enumerate(self.row_types):
            row = []
            for j, ct in enumerate(other.col_types):
                acc = C.zero(R, ct, rt)
                for m in range(self.cols):
                    f = other.entries[m][j]
                    g = self.entries[i][m]
                    if C.is_zero(R, f) or C.is_zero(R, g):
                        continue
                    acc = C.add(R, acc, C.compose(R, g, f))
                row.append(acc)
            out.append(tuple(row))
        return TypedMat(C, R, self.row_types, other.col_types, tuple(out))

    def is_zero(self) -> bool:
        C, R = self.coeffs, self.ring
        return all(C.is_zero(R, a) for row in self.entries for a in row)

    # -- level moves -------------------------------------------------------

    def base_change(self, target: LocalRing) -> "TypedMat":
        C = self.coeffs
        return TypedMat(C, target, self.row_types, self.col_types, tuple(
            tuple(C.reduce_entry(a, self.ring, target) for a in row)
            for row in self.entries
        ))

    def lift_to(self, target: LocalRing) -> "TypedMat":
        C = self.coeffs
        return TypedMat(C, target, self.row_types, self.col_types, tuple(
            tuple(C.lift_entry(a, self.ring, target) for a in row)
            for row in self.entries
        ))

    def b_decompose(self, tower: Tower) -> "TypedMat":
        """Base-field coordinates of a small-kernel-valued matrix."""
        C = self.coeffs
        return TypedMat(C, tower.base, self.row_types, self.col_types, tuple(
            tuple(entry_b_decompose(C, tower, ct, rt, a)
                  for ct, a in zip(self.col_types, row))
            for rt, row in zip(self.row_types, self.entries)
        ))

    def b_scale(self, tower: Tower) -> "TypedMat":
        """Small-kernel-valued matrix over the top ring with these coordinates."""
        C = self.coeffs
        return TypedMat(C, tower.top, self.row_types, self.col_types, tuple(
            tuple(entry_b_scale(C, tower, ct, rt, a)
                  for ct, a in zip(self.col_types, row))
            for rt, row in zip(self.row_types, self.entries)
        ))

    # -- block structure -----------------------------------------------------

    def block(self, r0: int, c0: int, nrows: int, ncols: int) -> "TypedMat":
        return TypedMat(
            self.coeffs, self.ring,
            self.row_types[r0:r0 + nrows], self.col_types[c0:c0 + ncols],
            tuple(tuple(self.entries[r0 + i][c0 + j] for j in range(ncols))
                  for i in range(nrows)),
        )

    def __str__(self):
        return "[" + "; ".join(" ".join(repr(a) for a in row) for row in self.entries) + "]"


def typed_block(coeffs, ring, grid) -> TypedMat:
    """Assemble a typed matrix from a 2d grid of blocks."""
    row_types = tuple(t for row in grid for t in row[0].row_types)
    col_types = tuple(t for blk in grid[0] for t in blk.col_types)
    out = []
    for row in grid:
        widths = [blk.cols for blk in row]
        if tuple(t for blk in row for t in blk.col_types) != col_types:
            raise DimensionMismatch("block column types disagree between rows")
        for i in range(row[0].rows):
            out.append(tuple(a for blk in row for a in blk.entries[i]))
    return TypedMat(coeffs, ring, row_types, col_types, tuple(out))


def typed_from_matrix(m: Matrix, coeffs=None) -> TypedMat:
    """View an ordinary matrix as a trivially-typed matrix."""
    from .coeffs import TRIVIAL

    coeffs = coeffs or TRIVIAL
    return TypedMat(coeffs, m.ring, ("*",) * m.rows, ("*",) * m.cols, m.entries)


def matrix_from_typed(m: TypedMat) -> Matrix:
    from .coeffs import TrivialCoefficients

    if not isinstance(m.coeffs, TrivialCoefficients):
        raise DimensionMismatch("not a trivially-typed matrix")
    return Matrix(m.ring, m.rows, m.cols, m.entries)


def underlying_matrix(m: TypedMat) -> Matrix:
    """The matrix of the underlying map of free level-ring modules.

    A summand of type ``t`` is free over the level ring on the module basis
    of its coefficient system; a morphism acts on those basis vectors by
    right multiplication with the entry value.
    """
    C, R = m.coeffs, m.ring
    if not hasattr(C, "module_basis"):
        return matrix_from_typed(m)
    row_basis = [(i, k) for i, t in enumerate(m.row_types) for k in C.module_basis(t)]
    col_basis = [(j, k) for j, t in enumerate(m.col_types) for k in C.module_basis(t)]
    data = [[R.zero] * len(col_basis) for _ in row_basis]
    row_pos = {pair: pos for pos, pair in enumerate(row_basis)}
    for j, (col, k) in enumerate(col_basis):
        unit = [R.zero] * C.dim
        unit[k] = R.one
        unit = tuple(unit)
        for i in range(m.rows):
            e = m.entries[i][col]
            if C.is_zero(R, e):
                continue
            prod = C.algebra_mul(R, unit, e)
            for kk, val in enumerate(prod):
                if val != R.zero:
                    data[row_pos[(i, kk)]][j] = R.add(data[row_pos[(i, kk)]][j], val)
    return Matrix.from_rows(R, data) if row_basis else Matrix(R, 0, len(col_basis), ())


def random_typed(coeffs, ring, row_types, col_types, rng) -> TypedMat:
    rows = []
    for rt in row_types:
        row = []
        for ct in col_types:
            coords = tuple(ring.random_element(rng)
                           for _ in range(coeffs.hom_dim(ct, rt)))
            row.append(coeffs.from_coords(ring, ct, rt, coords))
        rows.append(tuple(row))
    return TypedMat(coeffs, ring, tuple(row_types), tuple(col_types), tuple(rows))
