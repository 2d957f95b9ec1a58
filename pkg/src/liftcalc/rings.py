"""Finite commutative local rings and small-extension towers.

Two ring families are supported, both local with principal maximal ideal:

* ``Fp[t]/t^n`` -- truncated polynomials over a prime field, elements
  stored as coefficient tuples ``(c_0, ..., c_{n-1})`` with ``0 <= c_i < p``;
* ``Z/p^n``     -- integers modulo a prime power, elements stored as
  canonical residues ``0 <= x < p^n``.

A *tower* is a pair of surjections ``top ->> mid ->> base`` such that the
kernel of ``top ->> mid`` is killed by the maximal ideal (the small-extension
condition: the product of the two kernel ideals vanishes).  The engine only
accepts towers whose base is the prime field and whose small kernel is free
of rank one over it; every step of an m-adic ladder has this shape.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Union

Elem = Union[int, tuple]

FAMILY_TRUNCATED_POLY = "Fp[t]/t^n"
FAMILY_INTEGERS_MOD = "Z/p^n"

_FAMILIES = (FAMILY_TRUNCATED_POLY, FAMILY_INTEGERS_MOD)


class TowerError(Exception):
    """Base class for tower construction failures."""


class NotSmallExtension(TowerError):
    """The product of the two kernel ideals does not vanish."""


class BRankUnsupported(TowerError):
    """The small kernel is not free of rank one over the base."""


class FamilyMismatch(TowerError):
    """The rings of a tower do not belong to one family."""


class NonFieldBase(TowerError):
    """The base ring of the tower is not a field."""


class LevelError(TowerError):
    """An element was moved upward, or between unrelated levels."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class LocalRing:
    """One ring ``Fp[t]/t^n`` or ``Z/p^n``.

    Elements are plain Python values (tuples resp. ints) in canonical normal
    form; all arithmetic goes through the ring object.  Instances are
    immutable and hashable, so they can serve as level tags on matrices.
    """

    family: str
    p: int
    n: int

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown ring family {self.family!r}")
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.n < 1:
            raise ValueError(f"truncation length must be >= 1, got {self.n}")

    # -- canonical values ------------------------------------------------

    @property
    def zero(self) -> Elem:
        return (0,) * self.n if self.family == FAMILY_TRUNCATED_POLY else 0

    @property
    def one(self) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            return (1,) + (0,) * (self.n - 1)
        return 1

    @property
    def maximal_ideal_gen(self) -> Elem:
        """Generator of the maximal ideal: ``t`` resp. ``p`` (zero if n = 1)."""
        if self.family == FAMILY_TRUNCATED_POLY:
            return self.monomial(1)
        return self.p % self.size

    @property
    def size(self) -> int:
        return self.p ** self.n

    @property
    def is_field(self) -> bool:
        return self.n == 1

    def monomial(self, k: int, c: int = 1) -> Elem:
        """c * t^k resp. c * p^k, reduced into the ring."""
        if k >= self.n:
            return self.zero
        if self.family == FAMILY_TRUNCATED_POLY:
            coeffs = [0] * self.n
            coeffs[k] = c % self.p
            return tuple(coeffs)
        return (c * self.p ** k) % self.size

    def from_int(self, k: int) -> Elem:
        """Canonical image of an integer."""
        if self.family == FAMILY_TRUNCATED_POLY:
            return (k % self.p,) + (0,) * (self.n - 1)
        return k % self.size

    # -- arithmetic ------------------------------------------------------

    def add(self, a: Elem, b: Elem) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            return tuple((x + y) % self.p for x, y in zip(a, b))
        return (a + b) % self.size

    def sub(self, a: Elem, b: Elem) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            return tuple((x - y) % self.p for x, y in zip(a, b))
        return (a - b) % self.size

    def neg(self, a: Elem) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            return tuple((-x) % self.p for x in a)
        return (-a) % self.size

    def mul(self, a: Elem, b: Elem) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            out = [0] * self.n
            for i, x in enumerate(a):
                if x:
                    for j in range(self.n - i):
                        y = b[j]
                        if y:
                            out[i + j] = (out[i + j] + x * y) % self.p
            return tuple(out)
        return (a * b) % self.size

    def is_zero(self, a: Elem) -> bool:
        return a == self.zero

    def is_unit(self, a: Elem) -> bool:
        """Units are exactly the elements outside the maximal ideal."""
        if self.family == FAMILY_TRUNCATED_POLY:
            return a[0] % self.p != 0
        return a % self.p != 0

    def inv(self, a: Elem) -> Elem:
        if not self.is_unit(a):
            raise ZeroDivisionError(f"{a!r} is not a unit in {self}")
        if self.family == FAMILY_INTEGERS_MOD:
            return pow(a, -1, self.size)
        # power series inversion mod t^n
        c0inv = pow(a[0], -1, self.p)
        out = [c0inv] + [0] * (self.n - 1)
        for k in range(1, self.n):
            acc = 0
            for i in range(1, k + 1):
                acc = (acc + a[i] * out[k - i]) % self.p
            out[k] = (-c0inv * acc) % self.p
        return tuple(out)

    # -- filtration structure ---------------------------------------------

    def val(self, a: Elem) -> int:
        """Largest k <= n with a in m^k (n for a = 0)."""
        if self.family == FAMILY_TRUNCATED_POLY:
            for k, c in enumerate(a):
                if c % self.p != 0:
                    return k
            return self.n
        if a % self.size == 0:
            return self.n
        k = 0
        while a % self.p == 0:
            a //= self.p
            k += 1
        return k

    def shift_down(self, a: Elem, k: int) -> Elem:
        """Exact division by m^k; the input must have valuation >= k."""
        if k == 0:
            return a
        if self.val(a) < k:
            raise ValueError(f"{a!r} is not divisible by m^{k}")
        if self.family == FAMILY_TRUNCATED_POLY:
            return tuple(a[k:]) + (0,) * k
        return (a // self.p ** k) % self.size

    # -- enumeration and randomness ---------------------------------------

    def elements(self) -> Iterator[Elem]:
        if self.family == FAMILY_TRUNCATED_POLY:
            yield from itertools.product(range(self.p), repeat=self.n)
        else:
            yield from range(self.size)

    def random_element(self, rng) -> Elem:
        if self.family == FAMILY_TRUNCATED_POLY:
            return tuple(rng.randrange(self.p) for _ in range(self.n))
        return rng.randrange(self.size)

    # -- residue field ----------------------------------------------------

    def residue(self, a: Elem) -> int:
        """Image in the residue field F_p, as a canonical integer."""
        if self.family == FAMILY_TRUNCATED_POLY:
            return a[0] % self.p
        return a % self.p

    def descriptor(self) -> str:
        return f"{self.family} p={self.p} n={self.n}"

    def __str__(self):
        if self.family == FAMILY_TRUNCATED_POLY:
            return f"F{self.p}[t]/t^{self.n}"
        return f"Z/{self.p}^{self.n}"


def parse_ring(text: str) -> LocalRing:
    """Parse a textual ring descriptor, e.g. ``"Fp[t]/t^n p=2 n=3"``."""
    parts = text.split()
    if not parts or parts[0] not in _FAMILIES:
        raise ValueError(f"cannot parse ring descriptor {text!r}")
    kv = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        kv[key] = int(value)
    if set(kv) != {"p", "n"}:
        raise ValueError(f"ring descriptor needs p=<prime> n=<len>: {text!r}")
    return LocalRing(parts[0], kv["p"], kv["n"])


def reduce_elem(a: Elem, source: LocalRing, target: LocalRing) -> Elem:
    """Canonical image of ``a`` under the quotient map source ->> target."""
    if source.family != target.family or source.p != target.p:
        raise LevelError(f"no quotient map {source} -> {target}")
    if target.n > source.n:
        raise LevelError(f"cannot reduce upward: {source} -> {target}")
    if source.family == FAMILY_TRUNCATED_POLY:
        return tuple(a[: target.n])
    return a % target.size


def lift_elem(a: Elem, source: LocalRing, target: LocalRing) -> Elem:
    """Canonical coefficient-wise lift along target ->> source.

    The lift is a set-theoretic section of :func:`reduce_elem`: coefficient
    tuples are padded with zeros, residues keep their canonical
    representative.
    """
    if source.family != target.family or source.p != target.p:
        raise LevelError(f"no lift {source} -> {target}")
    if target.n < source.n:
        raise LevelError(f"cannot lift downward: {source} -> {target}")
    if source.family == FAMILY_TRUNCATED_POLY:
        return tuple(a) + (0,) * (target.n - source.n)
    return a % target.size


class NotInB(TowerError):
    """Element claimed to lie in the small kernel does not."""


@dataclass(frozen=True)
class Tower:
    """A validated small-extension tower ``top ->> mid ->> base``.

    ``kernel_basis`` is the chosen generator of the kernel of
    ``top ->> mid``; by validation it spans that kernel freely over the
    base field, so every kernel element is ``c * kernel_basis`` for a
    unique base coefficient ``c``.
    """

    top: LocalRing
    mid: LocalRing
    base: LocalRing

    @property
    def kernel_basis(self) -> Elem:
        # ker(top ->> mid) = m^(mid.n) inside top
        return self.top.monomial(self.mid.n)

    @property
    def ker_to_mid_gens(self) -> tuple:
        return (self.kernel_basis,)

    @property
    def ker_to_base_gens(self) -> tuple:
        return (self.top.monomial(self.base.n),)

    def ring_at(self, level: int) -> LocalRing:
        return (self.base, self.mid, self.top)[level]

    def level_of(self, ring: LocalRing) -> int:
        for lvl in (0, 1, 2):
            if self.ring_at(lvl) == ring:
                return lvl
        raise LevelError(f"{ring} is not a level of {self}")

    def reduce(self, a: Elem, source: LocalRing, target: LocalRing) -> Elem:
        return reduce_elem(a, source, target)

    def arbitrary_lift(self, a: Elem, source: LocalRing, target: LocalRing) -> Elem:
        return lift_elem(a, source, target)

    def in_small_kernel(self, a: Elem) -> bool:
        return self.top.val(a) >= self.mid.n

    def b_decompose(self, a: Elem) -> Elem:
        """Coefficient of ``a`` in the kernel basis, as a base element.

        Inverse to ``c -> b_scale(c)``; raises :class:`NotInB` when the
        element does not reduce to zero in the middle ring.
        """
        if not self.in_small_kernel(a):
            raise NotInB(f"{a!r} does not lie in the small kernel")
        if self.top.is_zero(a):
            return self.base.zero
        unit = self.top.shift_down(a, self.mid.n)
        return self.base.from_int(self.top.residue(unit))

    def b_scale(self, c: Elem) -> Elem:
        """The kernel element ``c * kernel_basis`` for a base coefficient."""
        return self.top.monomial(self.mid.n, self.base.residue(c))

    def __str__(self):
        return f"{self.top} ->> {self.mid} ->> {self.base}"


def make_tower(top: LocalRing, mid: LocalRing, base: LocalRing) -> Tower:
    """Validate and build a small-extension tower.

    Checks, in order: the three rings belong to one family over one prime
    and the quotient maps exist; the base is a field; the product of the
    two kernel ideals vanishes (on generators); the small kernel is free
    of rank one over the base with basis ``m^(mid.n)``.
    """
    if not (top.family == mid.family == base.family) or not (top.p == mid.p == base.p):
        raise FamilyMismatch(f"rings {top}, {mid}, {base} are not one family")
    if not (top.n >= mid.n >= base.n):
        raise LevelError(f"no surjections {top} ->> {mid} ->> {base}")
    if not base.is_field:
        raise NonFieldBase(f"base ring {base} is not a field (unsupported)")
    tower = Tower(top, mid, base)
    # small-extension condition on ideal generators
    for a in tower.ker_to_base_gens:
        for b in tower.ker_to_mid_gens:
            if not top.is_zero(top.mul(a, b)):
                raise NotSmallExtension(
                    f"kernel ideal product is nonzero: {a!r} * {b!r} != 0 in {top}"
                )
    # free rank one over the base: the kernel has size p and basis m^(mid.n)
    kernel_size = top.p ** (top.n - mid.n)
    if kernel_size != base.size:
        raise BRankUnsupported(
            f"small kernel of {top} ->> {mid} has size {kernel_size}, "
            f"not free of rank 1 over {base}"
        )
    return tower


def make_tower_from_descriptors(top: str, mid: str, base: str) -> Tower:
    return make_tower(parse_ring(top), parse_ring(mid), parse_ring(base))


@dataclass(frozen=True)
class TowerLadder:
    """The chain of quotients of one ring by powers of its maximal ideal.

    ``rings[k]`` has truncation length ``k + 1``; ``tower_at(k)`` is the
    small-extension tower ``rings[k+1] ->> rings[k] ->> rings[0]`` used for
    the k-th inductive lifting step.
    """

    family: str
    p: int
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise LevelError("ladder depth must be >= 1")
        for k in range(self.depth - 1):
            self.tower_at(k)  # validates every adjacent triple

    @property
    def rings(self) -> tuple:
        return tuple(LocalRing(self.family, self.p, k + 1) for k in range(self.depth))

    def ring_at(self, k: int) -> LocalRing:
        if not 0 <= k < self.depth:
            raise LevelError(f"ladder level {k} out of range")
        return LocalRing(self.family, self.p, k + 1)

    def tower_at(self, k: int) -> Tower:
        if not 0 <= k < self.depth - 1:
            raise LevelError(f"ladder step {k} out of range")
        return make_tower(self.ring_at(k + 1), self.ring_at(k), self.ring_at(0))


def ladder_from_ring(ring: LocalRing) -> TowerLadder:
    """Ladder of all quotients of ``ring`` by powers of the maximal ideal."""
    return TowerLadder(ring.family, ring.p, ring.n)
