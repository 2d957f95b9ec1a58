"""Coefficient systems for complexes of typed free summands.

The homological core works with complexes whose degree-n piece is a formal
direct sum of *typed* rank-one projectives.  Two coefficient systems are
provided:

* :class:`TrivialCoefficients` -- one type, morphism entries are plain ring
  elements; this is the ordinary matrix case over a tower ring.
* :class:`AlgebraCoefficients` -- a finite algebra given by an integer
  multiplication table and a complete list of orthogonal idempotents; a
  summand of type ``t`` is the projective ``A * iota_t`` and a morphism
  entry from type ``c`` to type ``r`` is an algebra element supported on
  ``iota_c * A * iota_r``.

Entry values are opaque to the rest of the engine: all arithmetic goes
through the coefficient object, and entries expose canonical coordinate
tuples over the level ring for flattened linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rings import LocalRing, Tower, lift_elem, reduce_elem


class TrivialCoefficients:
    """Ordinary matrices over the tower rings (one type, entries = elements)."""

    types = ("*",)

    def hom_dim(self, ct, rt) -> int:
        return 1

    def zero(self, ring: LocalRing, ct, rt):
        return ring.zero

    def is_zero(self, ring: LocalRing, e) -> bool:
        return e == ring.zero

    def add(self, ring, a, b):
        return ring.add(a, b)

    def sub(self, ring, a, b):
        return ring.sub(a, b)

    def neg(self, ring, a):
        return ring.neg(a)

    def compose(self, ring, second, first):
        return ring.mul(second, first)

    def scale(self, ring, c, e):
        return ring.mul(c, e)

    def identity(self, ring, t):
        return ring.one

    def invert(self, ring, t, e):
        return ring.inv(e) if ring.is_unit(e) else None

    def to_coords(self, ring, ct, rt, e):
        return (e,)

    def from_coords(self, ring, ct, rt, coords):
        return coords[0]

    def reduce_entry(self, e, source, target):
        return reduce_elem(e, source, target)

    def lift_entry(self, e, source, target):
        return lift_elem(e, source, target)

    def module_dim(self, t) -> int:
        return 1

    def __repr__(self):
        return "TrivialCoefficients()"


TRIVIAL = TrivialCoefficients()


@dataclass(frozen=True)
class AlgebraCoefficients:
    """A finite algebra over the prime field with integral structure constants.

    ``basis`` names the algebra basis; ``mult[i][j]`` lists ``(k, c)`` pairs
    with ``b_i * b_j = sum c * b_k`` (``0 <= c < p``).  Each basis element
    must be a "path": ``iota(left_type) * b = b = b * iota(right_type)`` for
    unique types, recorded in ``left_type``/``right_type``.  ``idempotent``
    maps each type to the basis index of its idempotent.  Entries are tuples
    of ring elements over the full basis; the same integral table serves
    every ring level, so reductions and lifts act coefficient-wise.
    """

    name: str
    basis: tuple
    mult: tuple  # mult[i][j] = tuple of (k, c)
    types: tuple
    idempotent: dict = field(hash=False)
    left_type: tuple = ()
    right_type: tuple = ()

    def __post_init__(self):
        if len(self.left_type) != len(self.basis) or len(self.right_type) != len(self.basis):
            raise ValueError("every basis element needs source and target types")
        object.__setattr__(self, "_hom_support", {
            (ct, rt): tuple(
                k for k in range(len(self.basis))
                if self.left_type[k] == ct and self.right_type[k] == rt
            )
            for ct in self.types for rt in self.types
        })
        object.__setattr__(self, "_module_basis", {
            t: tuple(k for k in range(len(self.basis)) if self.right_type[k] == t)
            for t in self.types
        })

    @property
    def dim(self) -> int:
        return len(self.basis)

    def hom_support(self, ct, rt):
        return self._hom_support[(ct, rt)]

    def hom_dim(self, ct, rt) -> int:
        return len(self._hom_support[(ct, rt)])

    def module_dim(self, t) -> int:
        """Rank of the projective of type t over the level ring."""
        return len(self._module_basis[t])

    def module_basis(self, t):
        return self._module_basis[t]

    # -- entry arithmetic --------------------------------------------------

    def zero(self, ring, ct, rt):
        return (ring.zero,) * self.dim

    def is_zero(self, ring, e):
        z = ring.zero
        return all(x == z for x in e)

    def add(self, ring, a, b):
        return tuple(ring.add(x, y) for x, y in zip(a, b))

    def sub(self, ring, a, b):
        return tuple(ring.sub(x, y) for x, y in zip(a, b))

    def neg(self, ring, a):
        return tuple(ring.neg(x) for x in a)

    def algebra_mul(self, ring, a, b):
        out = [ring.zero] * self.dim
        for i, x in enumerate(a):
            if x == ring.zero:
                continue
            row = self.mult[i]
            for j, y in enumerate(b):
                if y == ring.zero:
                    continue
                xy = ring.mul(x, y)
                for k, c in row[j]:
                    out[k] = ring.add(out[k], ring.mul(ring.from_int(c), xy))
        return tuple(out)

    def compose(self, ring, second, first):
        # a morphism f is the algebra value f(iota_source); (g o f) evaluates
        # to f(iota) * g(iota), so composition multiplies in reversed order
        return self.algebra_mul(ring, first, second)

    def scale(self, ring, c, e):
        return tuple(ring.mul(c, x) for x in e)

    def identity(self, ring, t):
        out = [ring.zero] * self.dim
        out[self.idempotent[t]] = ring.one
        return tuple(out)

    def invert(self, ring, t, e):
        """Two-sided inverse of an endomorphism entry, or ``None``.

        Solved inside the finite endomorphism algebra of the type, so no
        commutativity is assumed.
        """
        from .linalg import Matrix, solve_ring

        support = self.hom_support(t, t)
        ident = self.identity(ring, t)
        # left-multiplication-by-e operator on the endomorphism space
        cols = []
        for k in support:
            unit = [ring.zero] * self.dim
            unit[k] = ring.one
            prod = self.compose(ring, tuple(unit), e)  # unit o e
            cols.append([prod[i] for i in support])
        op = Matrix.from_rows(ring, [[cols[j][i] for j in range(len(support))]
                                     for i in range(len(support))])
        rhs = Matrix.from_rows(ring, [[ident[i]] for i in support])
        x, _ = solve_ring(op, rhs)
        if x is None:
            return None
        inv = [ring.zero] * self.dim
        for pos, k in enumerate(support):
            inv[k] = x.entries[pos][0]
        inv = tuple(inv)
        if self.compose(ring, e, inv) != ident or self.compose(ring, inv, e) != ident:
            return None
        return inv

    def to_coords(self, ring, ct, rt, e):
        return tuple(e[k] for k in self.hom_support(ct, rt))

    def from_coords(self, ring, ct, rt, coords):
        out = [ring.zero] * self.dim
        for k, c in zip(self.hom_support(ct, rt), coords):
            out[k] = c
        return tuple(out)

    def reduce_entry(self, e, source, target):
        return tuple(reduce_elem(x, source, target) for x in e)

    def lift_entry(self, e, source, target):
        return tuple(lift_elem(x, source, target) for x in e)

    def __repr__(self):
        return f"AlgebraCoefficients({self.name!r}, dim={self.dim})"


def entry_reduce_tower(coeffs, tower: Tower, e, source: LocalRing, target: LocalRing):
    return coeffs.reduce_entry(e, source, target)


def entry_b_decompose(coeffs, tower: Tower, ct, rt, e):
    """Coordinate of a small-kernel-valued entry in the base-field picture."""
    top = tower.top
    coords = coeffs.to_coords(top, ct, rt, e)
    base_coords = tuple(tower.b_decompose(x) for x in coords)
    return coeffs.from_coords(tower.base, ct, rt, base_coords)


def entry_b_scale(coeffs, tower: Tower, ct, rt, e_base):
    """The small-kernel-valued entry with the given base-field coordinate."""
    coords = coeffs.to_coords(tower.base, ct, rt, e_base)
    top_coords = tuple(tower.b_scale(x) for x in coords)
    return coeffs.from_coords(tower.top, ct, rt, top_coords)
