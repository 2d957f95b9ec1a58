"""Exact linear algebra over the tower rings.

Matrices carry their ring as a level tag and store entries row-major in
canonical normal form.  Over the residue field the usual reduced row
echelon machinery applies; over the non-field levels (finite chain rings)
linear systems are decided exactly by two-sided elimination on valuations,
which always reaches a diagonal form ``diag(m^e_1, ..., m^e_r)``.

All operations are pure and matrices are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .rings import LocalRing, lift_elem, reduce_elem


class DimensionMismatch(Exception):
    pass


@dataclass(frozen=True)
class Matrix:
    """An exact matrix over a :class:`~liftcalc.rings.LocalRing`."""

    ring: LocalRing
    rows: int
    cols: int
    entries: tuple  # tuple of row tuples

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatch("negative matrix dimensions")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionMismatch("entry grid does not match declared shape")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_rows(ring: LocalRing, rows) -> "Matrix":
        rows = tuple(tuple(r) for r in rows)
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        return Matrix(ring, nrows, ncols, rows)

    @staticmethod
    def zero(ring: LocalRing, rows: int, cols: int) -> "Matrix":
        z = ring.zero
        return Matrix(ring, rows, cols, tuple((z,) * cols for _ in range(rows)))

    @staticmethod
    def identity(ring: LocalRing, n: int) -> "Matrix":
        z, o = ring.zero, ring.one
        return Matrix(
            ring, n, n,
            tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)),
        )

    @staticmethod
    def from_int_rows(ring: LocalRing, rows) -> "Matrix":
        return Matrix.from_rows(ring, [[ring.from_int(x) for x in r] for r in rows])

    # -- basic operations --------------------------------------------------

    def __getitem__(self, rc):
        return self.entries[rc[0]][rc[1]]

    def add(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        R = self.ring
        return Matrix(self.ring, self.rows, self.cols, tuple(
            tuple(R.add(a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)
        ))

    def sub(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        R = self.ring
        return Matrix(self.ring, self.rows, self.cols, tuple(
            tuple(R.sub(a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)
        ))

    def neg(self) -> "Matrix":
        R = self.ring
        return self.map_entries(R.neg)

    def scale(self, c) -> "Matrix":
        R = self.ring
        return self.map_entries(lambda a: R.mul(c, a))

    def mul(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring:
            raise DimensionMismatch("matrices over different rings")
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        R = self.ring
        ocols = tuple(zip(*other.entries)) if other.entries else ()
        out = []
        for row in self.entries:
            orow = []
            for col in (ocols if other.cols else ()):
                acc = R.zero
                for a, b in zip(row, col):
                    if a != R.zero and b != R.zero:
                        acc = R.add(acc, R.mul(a, b))
                orow.append(acc)
            if other.cols and not self.cols:
                orow = [R.zero] * other.cols
            out.append(tuple(orow))
        if not self.cols:
            out = [tuple(R.zero for _ in range(other.cols)) for _ in range(self.rows)]
        return Matrix(R, self.rows, other.cols, tuple(out))

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, self.cols, self.rows, tuple(zip(*self.entries))
                      if self.rows and self.cols else
                      tuple(() for _ in range(self.cols)))

    def map_entries(self, fn) -> "Matrix":
        return Matrix(self.ring, self.rows, self.cols,
                      tuple(tuple(fn(a) for a in row) for row in self.entries))

    def is_zero(self) -> bool:
        z = self.ring.zero
        return all(a == z for row in self.entries for a in row)

    def _same_shape(self, other: "Matrix"):
        if self.ring != other.ring or self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("shape or ring mismatch")

    def to_lists(self):
        return [[list(a) if isinstance(a, tuple) else a for a in row] for row in self.entries]

    def __str__(self):
        return "[" + "; ".join(" ".join(str(a) for a in row) for row in self.entries) + "]"


def block_matrix(ring: LocalRing, grid) -> Matrix:
    """Assemble a matrix from a 2d grid of blocks with matching edges."""
    if not grid:
        return Matrix.zero(ring, 0, 0)
    row_heights = [row[0].rows for row in grid]
    col_widths = [blk.cols for blk in grid[0]]
    for row in grid:
        if len(row) != len(col_widths):
            raise DimensionMismatch("ragged block grid")
        for blk, w in zip(row, col_widths):
            if blk.cols != w or blk.rows != row[0].rows or blk.ring != ring:
                raise DimensionMismatch("incompatible block shapes")
    out = []
    for row in grid:
        for i in range(row[0].rows):
            out.append(tuple(a for blk in row for a in blk.entries[i]))
    return Matrix(ring, sum(row_heights), sum(col_widths), tuple(out))


def extract_block(m: Matrix, r0: int, c0: int, rows: int, cols: int) -> Matrix:
    return Matrix(m.ring, rows, cols, tuple(
        tuple(m.entries[r0 + i][c0 + j] for j in range(cols)) for i in range(rows)
    ))


def mat_reduce(m: Matrix, target: LocalRing) -> Matrix:
    out = Matrix(target, m.rows, m.cols, tuple(
        tuple(reduce_elem(a, m.ring, target) for a in row) for row in m.entries
    ))
    return out


def mat_lift(m: Matrix, target: LocalRing) -> Matrix:
    return Matrix(target, m.rows, m.cols, tuple(
        tuple(lift_elem(a, m.ring, target) for a in row) for row in m.entries
    ))


def random_matrix(ring: LocalRing, rows: int, cols: int, rng) -> Matrix:
    return Matrix(ring, rows, cols, tuple(
        tuple(ring.random_element(rng) for _ in range(cols)) for _ in range(rows)
    ))


# ---------------------------------------------------------------------------
# field-level machinery (base ring is F_p; entries handled as canonical ints)
# ---------------------------------------------------------------------------


def _require_field(ring: LocalRing):
    if not ring.is_field:
        raise DimensionMismatch(f"{ring} is not a field")


def _int_rows(m: Matrix):
    R = m.ring
    return [[R.residue(a) for a in row] for row in m.entries]


def _from_int_rows(ring: LocalRing, rows, cols, data) -> Matrix:
    return Matrix(ring, rows, cols, tuple(
        tuple(ring.from_int(x) for x in row) for row in data
    ))


def rref_field(m: Matrix):
    """Reduced row echelon form over the residue field.

    Returns ``(rank, rref, transform, pivots)`` where ``transform`` is an
    invertible matrix with ``transform * m == rref`` and ``pivots`` lists
    the pivot column of each of the first ``rank`` rows.
    """
    _require_field(m.ring)
    p = m.ring.p
    a = _int_rows(m)
    t = [[1 if i == j else 0 for j in range(m.rows)] for i in range(m.rows)]
    pivots = []
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if a[i][c] % p != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        t[r], t[piv] = t[piv], t[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [(x * inv) % p for x in a[r]]
        t[r] = [(x * inv) % p for x in t[r]]
        for i in range(m.rows):
            if i != r and a[i][c] % p != 0:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
                t[i] = [(x - f * y) % p for x, y in zip(t[i], t[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    rref = _from_int_rows(m.ring, m.rows, m.cols, a)
    transform = _from_int_rows(m.ring, m.rows, m.rows, t)
    return r, rref, transform, tuple(pivots)


def kernel_field(m: Matrix) -> Matrix:
    """Canonical kernel basis (rows, in reduced echelon form over F_p)."""
    _require_field(m.ring)
    p = m.ring.p
    rank, rref, _, pivots = rref_field(m)
    a = _int_rows(rref)
    free = [c for c in range(m.cols) if c not in pivots]
    rows = []
    for c in free:
        v = [0] * m.cols
        v[c] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-a[i][c]) % p
        rows.append(v)
    basis = _from_int_rows(m.ring, len(rows), m.cols, rows)
    # normalize the basis itself for a canonical result
    if rows:
        _, basis, _, _ = rref_field(basis)
    return basis


def solve_field(a: Matrix, b: Matrix):
    """Solve ``a x = b`` over the residue field.

    ``b`` may have several columns.  Returns ``(x, kernel)`` with ``x``
    ``None`` when no solution exists; ``kernel`` is the canonical basis of
    the homogeneous solutions either way.
    """
    _require_field(a.ring)
    if a.rows != b.rows:
        raise DimensionMismatch("incompatible shapes in solve")
    p = a.ring.p
    rank, rref, transform, pivots = rref_field(a)
    tb = _int_rows(transform.mul(b))
    # rows beyond the rank must have zero right-hand side
    for i in range(rank, a.rows):
        if any(x % p != 0 for x in tb[i]):
            return None, kernel_field(a)
    x = [[0] * b.cols for _ in range(a.cols)]
    for i, pc in enumerate(pivots):
        x[pc] = [v % p for v in tb[i]]
    return _from_int_rows(a.ring, a.cols, b.cols, x), kernel_field(a)


def row_space_field(m: Matrix) -> Matrix:
    """Canonical basis of the row space (nonzero rows of the rref)."""
    rank, rref, _, _ = rref_field(m)
    return extract_block(rref, 0, 0, rank, m.cols)


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``F_p^ambient`` held by its reduced echelon basis."""

    field: LocalRing
    ambient: int
    basis: Matrix  # rows in reduced echelon form

    @staticmethod
    def from_rows(field: LocalRing, ambient: int, rows: Matrix) -> "Subspace":
        if rows.cols != ambient:
            raise DimensionMismatch("ambient dimension mismatch")
        return Subspace(field, ambient, row_space_field(rows))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def contains(self, vector: Matrix) -> bool:
        if vector.cols != self.ambient:
            raise DimensionMismatch("vector has wrong ambient dimension")
        stacked = block_matrix(self.field, [[self.basis], [vector]])
        return row_space_field(stacked).rows == self.dim

    def extend_greedily(self, candidates: Matrix):
        """Pivot-extend this space by candidate rows; returns the rows kept."""
        current = self.basis
        kept = []
        for i in range(candidates.rows):
            row = extract_block(candidates, i, 0, 1, candidates.cols)
            stacked = block_matrix(self.field, [[current], [row]])
            reduced = row_space_field(stacked)
            if reduced.rows > current.rows:
                current = reduced
                kept.append(row)
        return kept, Subspace(self.field, self.ambient, current)


# ---------------------------------------------------------------------------
# chain-ring elimination (non-field levels)
# ---------------------------------------------------------------------------


def smith_diagonalize(m: Matrix):
    """Two-sided elimination over a finite chain ring.

    Every element is ``unit * m^k``, so picking a minimal-valuation pivot
    and clearing its row and column with unit operations always succeeds.
    Returns ``(exponents, col_ops, row_transform)`` with
    ``row_transform * m * col_ops = diag(m^e_1, ..., m^e_r)`` (both
    transforms invertible, exponents increasing).
    """
    R = m.ring
    n = R.n
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    u = Matrix.identity(R, rows)
    v = Matrix.identity(R, cols)
    urows = [list(r) for r in u.entries]
    vrows = [list(r) for r in v.entries]
    exps = []
    k = 0
    while k < min(rows, cols):
        best, bestval = None, n
        for i in range(k, rows):
            for j in range(k, cols):
                val = R.val(a[i][j])
                if val < bestval:
                    best, bestval = (i, j), val
                    if val == 0:
                        break
            if bestval == 0:
                break
        if best is None:
            break
        bi, bj = best
        if bi != k:
            a[k], a[bi] = a[bi], a[k]
            urows[k], urows[bi] = urows[bi], urows[k]
        if bj != k:
            for row in a:
                row[k], row[bj] = row[bj], row[k]
            for row in vrows:
                row[k], row[bj] = row[bj], row[k]
        e = bestval
        unit = R.shift_down(a[k][k], e)
        unit_inv = R.inv(unit)
        # normalize the pivot row so the pivot is exactly m^e
        a[k] = [R.mul(unit_inv, x) for x in a[k]]
        urows[k] = [R.mul(unit_inv, x) for x in urows[k]]
        for i in range(rows):
            if i == k or R.is_zero(a[i][k]):
                continue
            q = R.shift_down(a[i][k], e)  # valuation >= e by pivot choice
            a[i] = [R.sub(x, R.mul(q, y)) for x, y in zip(a[i], a[k])]
            urows[i] = [R.sub(x, R.mul(q, y)) for x, y in zip(urows[i], urows[k])]
        for j in range(cols):
            if j == k or R.is_zero(a[k][j]):
                continue
            q = R.shift_down(a[k][j], e)
            for row in a:
                row[j] = R.sub(row[j], R.mul(q, row[k]))
            for row in vrows:
                row[j] = R.sub(row[j], R.mul(q, row[k]))
        exps.append(e)
        k += 1
    col_ops = Matrix(R, cols, cols, tuple(tuple(r) for r in vrows))
    row_transform = Matrix(R, rows, rows, tuple(tuple(r) for r in urows))
    return exps, col_ops, row_transform


def solve_ring(a: Matrix, b: Matrix):
    """Solve ``a x = b`` exactly over any level ring.

    Returns ``(x, kernel_gens)``; ``x`` is ``None`` when the system has no
    solution.  ``kernel_gens`` generate the solution module of the
    homogeneous system.
    """
    if a.ring.is_field:
        return solve_field(a, b)
    if a.rows != b.rows:
        raise DimensionMismatch("incompatible shapes in solve")
    R = a.ring
    n = R.n
    exps, v, u = smith_diagonalize(a)
    ub = u.mul(b)
    y = [[R.zero] * b.cols for _ in range(a.cols)]
    for i in range(a.rows):
        e = exps[i] if i < len(exps) else n
        for j in range(b.cols):
            rhs = ub.entries[i][j]
            if R.val(rhs) < e:
                return None, _ring_kernel_gens(R, exps, v, a.cols)
            if i < len(exps):
                y[i][j] = R.shift_down(rhs, e)
    x = v.mul(Matrix(R, a.cols, b.cols, tuple(tuple(r) for r in y)))
    return x, _ring_kernel_gens(R, exps, v, a.cols)


def _ring_kernel_gens(R: LocalRing, exps, v: Matrix, ncols: int):
    gens = []
    for i, e in enumerate(exps):
        if e > 0:
            col = extract_block(v, 0, i, v.rows, 1)
            gens.append(col.scale(R.monomial(R.n - e)))
    for j in range(len(exps), ncols):
        gens.append(extract_block(v, 0, j, v.rows, 1))
    return gens


def module_size(R: LocalRing, exps, ncols: int) -> int:
    """Cardinality of the kernel of ``diag(m^e) : R^cols -> R^rows``."""
    size = 1
    for e in exps:
        size *= R.p ** e
    size *= R.size ** (ncols - len(exps))
    return size


def cohomology_sizes(d_in: Matrix, d_out: Matrix):
    """Cardinalities ``(|ker d_out|, |im d_in|)`` over a chain ring.

    Set up so a complex position ``. -> A -(d_in)-> B -(d_out)-> . `` is
    exact at ``B`` if and only if the two numbers agree.
    """
    R = d_out.ring
    exps_out, _, _ = smith_diagonalize(d_out)
    ker = module_size(R, exps_out, d_out.cols)
    exps_in, _, _ = smith_diagonalize(d_in)
    im = 1
    for e in exps_in:
        im *= R.p ** (R.n - e)
    return ker, im
