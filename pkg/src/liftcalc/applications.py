"""Desk-scale uniqueness of deformations of a decomposition triangle.

The geometric family is replaced by its smallest honest avatar: the
two-vertex triangular algebra (paths ``1 -> 2``), whose perfect complexes
are bounded complexes of typed projectives over the enveloping algebra.
The diagonal bimodule decomposes against the idempotent ``e1``:

    K2  ->  diagonal  ->  K1

with ``K2`` the projective sub-bimodule generated by ``e1`` and ``K1``
the quotient.  The induced tensor functors on the projective generators
satisfy the one-sided Hom vanishing, and the triangle lifts uniquely
level by level along any m-adic ladder: at every level the obstruction
space, the torsor group and the automorphism group all vanish, which is
the finite-level content of the uniqueness theorem for semiorthogonal
decompositions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .coeffs import AlgebraCoefficients
from .complexes import ChainMap, Complex, ConeTriangle, Equivalence, Homotopy, \
    check_complex, cohomology, cone, hom_complex, is_acyclic_at_level, minimize
from .linalg import Matrix
from .obstruction import LiftIsomorphism, LiftProblem, LiftSolution, classify_lifts, \
    correct_lift, lifts_equivalent, make_lift_problem, obstruction_class
from .rings import LocalRing, TowerLadder
from .typedmat import TypedMat, typed_block


class NotSemiorthogonal(Exception):
    pass


class LiftObstructed(Exception):
    """A level-wise obstruction did not vanish; falsifies the theorem."""


class UniquenessFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# the A2 triangular algebra and its enveloping algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Algebra:
    """A finite-dimensional algebra by basis, integral multiplication table
    and a complete list of orthogonal idempotents (vertex labels)."""

    name: str
    basis: tuple
    mult: dict          # (i, j) -> tuple of (k, coeff)
    vertices: tuple
    idempotent_index: dict  # vertex -> basis index
    source: tuple       # vertex with e_v * b = b, per basis element
    target: tuple       # vertex with b * e_v = b, per basis element

    def product(self, i: int, j: int):
        return self.mult.get((i, j), ())


def a2_algebra() -> Algebra:
    """Paths of the quiver ``1 -> 2``: basis ``e1, e2, a`` with
    ``e1 a = a = a e2``; triangular since ``e2 A e1 = 0``."""
    basis = ("e1", "e2", "a")
    E1, E2, A = 0, 1, 2
    mult = {
        (E1, E1): ((E1, 1),),
        (E2, E2): ((E2, 1),),
        (E1, A): ((A, 1),),
        (A, E2): ((A, 1),),
    }
    return Algebra("A2", basis, mult, (1, 2), {1: E1, 2: E2},
                   source=(1, 2, 1), target=(1, 2, 2))


def right_module_coeffs(alg: Algebra) -> AlgebraCoefficients:
    """Typed coefficients for right modules (= left modules over the
    opposite algebra); the projective of type ``v`` is ``e_v * A``."""
    n = len(alg.basis)
    mult_op = tuple(
        tuple(alg.product(j, i) for j in range(n)) for i in range(n)
    )
    # in the opposite algebra the roles of source and target swap
    return AlgebraCoefficients(
        name=f"{alg.name}-op", basis=alg.basis, mult=mult_op,
        types=alg.vertices, idempotent=dict(alg.idempotent_index),
        left_type=alg.target, right_type=alg.source,
    )


def enveloping_coeffs(alg: Algebra) -> AlgebraCoefficients:
    """Typed coefficients for bimodules: the enveloping algebra with
    product ``(x1, y1) (x2, y2) = (x1 x2, y2 y1)`` and idempotent types
    ``(i, j)``; the projective of type ``(i, j)`` is ``A e_i (x) e_j A``."""
    n = len(alg.basis)
    pairs = [(x, y) for x in range(n) for y in range(n)]
    index = {pair: k for k, pair in enumerate(pairs)}
    mult = []
    for (x1, y1) in pairs:
        row = []
        for (x2, y2) in pairs:
            terms = []
            for xk, xc in alg.product(x1, x2):
                for yk, yc in alg.product(y2, y1):
                    terms.append((index[(xk, yk)], (xc * yc)))
            row.append(tuple(terms))
        mult.append(tuple(row))
    types = tuple((i, j) for i in alg.vertices for j in alg.vertices)
    idem = {(i, j): index[(alg.idempotent_index[i], alg.idempotent_index[j])]
            for (i, j) in types}
    left_type = tuple((alg.source[x], alg.target[y]) for (x, y) in pairs)
    right_type = tuple((alg.target[x], alg.source[y]) for (x, y) in pairs)
    return AlgebraCoefficients(
        name=f"{alg.name}-env", basis=tuple(pairs), mult=tuple(mult),
        types=types, idempotent=idem, left_type=left_type, right_type=right_type,
    )


@dataclass(frozen=True)
class BimoduleSetup:
    """The algebra with both coefficient systems and index helpers."""

    alg: Algebra
    env: AlgebraCoefficients
    mod: AlgebraCoefficients

    def env_unit(self, ring, x: int, y: int):
        k = self.env.basis.index((x, y))
        out = [ring.zero] * self.env.dim
        out[k] = ring.one
        return tuple(out)


def a2_setup() -> BimoduleSetup:
    alg = a2_algebra()
    return BimoduleSetup(alg, enveloping_coeffs(alg), right_module_coeffs(alg))


# ---------------------------------------------------------------------------
# the diagonal bimodule and its idempotent decomposition
# ---------------------------------------------------------------------------


def diagonal_resolution(setup: BimoduleSetup, ring: LocalRing) -> Complex:
    """The two-term projective bimodule resolution of the diagonal:
    ``P(1,2) -> P(1,1) + P(2,2)`` with ``x (x) y -> (x (x) a y, -x a (x) y)``."""
    env = setup.env
    E1, E2, A = 0, 1, 2
    one = ring.one
    d = TypedMat(env, ring, ((1, 1), (2, 2)), ((1, 2),), (
        (setup.env_unit(ring, E1, A),),
        (env.neg(ring, setup.env_unit(ring, A, E2)),),
    ))
    return Complex(env, ring, -1, (((1, 2),), ((1, 1), (2, 2))), (d,))


def sub_bimodule(setup: BimoduleSetup, ring: LocalRing) -> Complex:
    """The projective sub-bimodule generated by ``e1``, i.e. ``P(1,1)``."""
    return Complex(setup.env, ring, 0, (((1, 1),),), ())


def diagonal_inclusion(setup: BimoduleSetup, K2: Complex, diag: Complex) -> ChainMap:
    env = setup.env
    ring = K2.ring
    E1 = 0
    comp = TypedMat(env, ring, ((1, 1), (2, 2)), ((1, 1),), (
        (setup.env_unit(ring, E1, E1),),
        (env.zero(ring, (1, 1), (2, 2)),),
    ))
    return ChainMap.make(K2, diag, 0, [comp])


def tensor_generator(setup: BimoduleSetup, K: Complex, vertex: int) -> Complex:
    """Image of the projective generator ``e_v A`` under ``- (x)_A K``.

    A bimodule summand of type ``(i, j)`` contributes one free right
    summand of type ``j`` for each basis path in ``e_v A e_i``; a
    bimodule map given by ``sum x (x) y`` acts by ``u -> u x`` on slots
    and by left multiplication with ``y`` on the right module.
    """
    alg, env, mod = setup.alg, setup.env, setup.mod
    ring = K.ring

    def slot_basis(i_type):
        ei = alg.idempotent_index[vertex]
        return [u for u in range(len(alg.basis))
                if alg.source[u] == vertex and alg.target[u] == i_type]

    new_types, slot_maps = [], []
    for deg in K.degrees():
        slots = []
        for s_idx, (i, j) in enumerate(K.types_at(deg)):
            for u in slot_basis(i):
                slots.append((s_idx, u, j))
        new_types.append(tuple(j for (_, _, j) in slots))
        slot_maps.append(slots)

    def push(entry, i, j, k, l, u):
        """Decompose ``(u x, y)`` contributions of one bimodule entry."""
        out = {}
        for bidx, coeff in enumerate(entry):
            if coeff == ring.zero:
                continue
            x, y = env.basis[bidx]
            for xk, xc in alg.product(u, x):
                val = ring.mul(coeff, ring.from_int(xc))
                out.setdefault(xk, [ring.zero] * len(alg.basis))
                out[xk][y] = ring.add(out[xk][y], val)
        return out

    diffs = []
    for deg in range(K.lo, K.hi):
        d = K.diff(deg)
        col_slots = slot_maps[deg - K.lo]
        row_slots = slot_maps[deg + 1 - K.lo]
        rows = []
        for (r_idx, u_out, l) in row_slots:
            row = []
            for (c_idx, u_in, j) in col_slots:
                i = K.types_at(deg)[c_idx][0]
                k = K.types_at(deg + 1)[r_idx][0]
                entry = d.entries[r_idx][c_idx]
                contributions = push(entry, i, j, k, l, u_in)
                vec = contributions.get(u_out, [ring.zero] * len(alg.basis))
                row.append(tuple(vec))
            rows.append(tuple(row))
        diffs.append(TypedMat(mod, ring, tuple(new_types[deg + 1 - K.lo]),
                              tuple(new_types[deg - K.lo]), tuple(rows)))
    out = Complex(mod, ring, K.lo, tuple(new_types), tuple(diffs))
    check_complex(out)
    return out


# ---------------------------------------------------------------------------
# decomposition triangles and semiorthogonality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiorthogonalityCertificate:
    ring: LocalRing
    direct_ok: bool
    fiber_ok: bool
    windows: dict  # (v1, v2) -> hom-complex degree window checked


@dataclass(frozen=True)
class DecompositionTriangle:
    """``K2 -> middle -> K1`` with rotation and stored certificates."""

    setup: BimoduleSetup
    ring: LocalRing
    K2: Complex
    middle: Complex
    K1: Complex
    to_middle: ChainMap       # K2 -> middle
    to_K1: ChainMap           # middle -> K1
    rotation: ChainMap        # K1 -> K2[1]
    null_witness: Homotopy    # composite K2 -> middle -> K1 ~ 0
    cone_equivalence: Equivalence  # cone(to_middle) ~ K1
    certificate: SemiorthogonalityCertificate


def check_semiorthogonality(setup: BimoduleSetup, K2: Complex, K1: Complex,
                            base: LocalRing) -> SemiorthogonalityCertificate:
    """Hom vanishing from the ``K2`` side to the ``K1`` side on generators.

    The level computation uses exact cardinality bookkeeping over the
    level ring; the fiber computation reduces to the base field first.
    The two must agree (vanishing passes to the level by the local
    criterion for free complexes), and disagreement raises.
    """
    ring = K2.ring
    direct_ok, fiber_ok = True, True
    windows = {}
    for v1 in setup.alg.vertices:
        for v2 in setup.alg.vertices:
            X = tensor_generator(setup, K2, v1)
            Y = tensor_generator(setup, K1, v2)
            hc = hom_complex(X, Y)
            windows[(v1, v2)] = (hc.lo, hc.hi)
            if ring.is_field:
                coh = cohomology(hc.flat)
                if any(data.dim for data in coh.values()):
                    direct_ok = False
            else:
                if not is_acyclic_at_level(hc.flat):
                    direct_ok = False
            X0 = X.base_change(base)
            Y0 = Y.base_change(base)
            coh0 = cohomology(hom_complex(X0, Y0).flat)
            if any(data.dim for data in coh0.values()):
                fiber_ok = False
    if direct_ok != fiber_ok:
        raise NotSemiorthogonal(
            "level verdict disagrees with the central-fiber reduction")
    if not direct_ok:
        raise NotSemiorthogonal("Hom from the sub-side to the quotient side is nonzero")
    return SemiorthogonalityCertificate(ring, direct_ok, fiber_ok, windows)


def _triangle_from_cone(setup: BimoduleSetup, s: ChainMap, base: LocalRing,
                        minimize_quotient: bool) -> DecompositionTriangle:
    tri: ConeTriangle = cone(s)
    K2, middle = s.source, s.target
    if minimize_quotient:
        mm = minimize(tri.cone)
        K1 = mm.minimal
        to_K1 = mm.project.compose(tri.include)
        rotation = tri.project.compose(mm.include)
        fwd_back = Homotopy.make(mm.project.compose(mm.include),
                                 ChainMap.identity(K1), {})
        equivalence = Equivalence(mm.project, mm.include, fwd_back, mm.homotopy)
        witness_comps = {
            i: mm.project.comp(i - 1).mul(tri.null_witness.comp(i))
            for i in K2.degrees()
        }
    else:
        K1 = tri.cone
        to_K1 = tri.include
        rotation = tri.project
        ident = ChainMap.identity(K1)
        zero_h = Homotopy.make(ident, ident, {})
        equivalence = Equivalence(ident, ident, zero_h, zero_h)
        witness_comps = {i: tri.null_witness.comp(i) for i in K2.degrees()}
    null_witness = Homotopy.make(ChainMap.zero(K2, K1),
                                 to_K1.compose(s), witness_comps)
    cert = check_semiorthogonality(setup, K2, K1, base)
    return DecompositionTriangle(setup, s.source.ring, K2, middle, K1, s,
                                 to_K1, rotation, null_witness, equivalence, cert)


def build_a2_sod(p: int, family: str = "Fp[t]/t^n") -> DecompositionTriangle:
    """The idempotent decomposition triangle of the diagonal over ``F_p``."""
    setup = a2_setup()
    base = LocalRing(family, p, 1)
    diag = diagonal_resolution(setup, base)
    check_complex(diag)
    K2 = sub_bimodule(setup, base)
    s = diagonal_inclusion(setup, K2, diag)
    return _triangle_from_cone(setup, s, base, minimize_quotient=True)


# ---------------------------------------------------------------------------
# the inductive tower run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelRecord:
    level: int
    report: dict
    solution: LiftSolution
    triangle: DecompositionTriangle


@dataclass(frozen=True)
class TowerRunResult:
    ladder: TowerLadder
    base_triangle: DecompositionTriangle
    levels: tuple
    unique_at_every_level: bool

    def solution_at(self, level: int) -> LiftSolution:
        return self.levels[level - 1].solution


def tower_lift(triangle: DecompositionTriangle, ladder: TowerLadder,
               seed: Optional[int] = None) -> TowerRunResult:
    """Lift the decomposition triangle level by level along the ladder.

    At each step the fixed codomain lift is the diagonal resolution over
    the next ring (its matrices are integral, so it restricts correctly),
    the obstruction class must vanish, and the lift class must be unique:
    the relevant cohomology vanishes in degrees -1, 0 and 1.  The new
    quotient is the cone of the lifted map, and semiorthogonality is
    re-certified directly at the new level.
    """
    setup = triangle.setup
    base = ladder.ring_at(0)
    if triangle.ring != base:
        raise ValueError("triangle must live over the ladder base")
    levels = []
    current_K2 = triangle.K2
    current_s = triangle.to_middle
    for n in range(ladder.depth - 1):
        tower = ladder.tower_at(n)
        next_ring = ladder.ring_at(n + 1)
        diag_next = diagonal_resolution(setup, next_ring)
        middle_n = diagonal_resolution(setup, ladder.ring_at(n))
        if current_s.target != middle_n:
            raise ValueError("current triangle middle is not the diagonal")
        problem = make_lift_problem(tower, current_K2, middle_n, current_s, diag_next)
        oc = obstruction_class(problem, seed=seed)
        if not oc.is_zero:
            raise LiftObstructed(f"obstruction nonzero at level {n + 1}")
        dims = (problem.h_dim(-1), problem.h_dim(0), problem.h_dim(1))
        if dims[0] != 0 or dims[1] != 0:
            raise UniquenessFailure(
                f"lift not unique at level {n + 1}: H^-1, H^0 dims {dims[:2]}")
        _, report = classify_lifts(problem)
        if report["lift_class_count"] != 1:
            raise UniquenessFailure(f"{report['lift_class_count']} classes at level {n + 1}")
        solution = correct_lift(problem, oc)
        new_triangle = _triangle_from_cone(setup, solution.sbar, base,
                                           minimize_quotient=False)
        levels.append(LevelRecord(n + 1, report, solution, new_triangle))
        current_K2 = solution.Fbar
        current_s = solution.sbar
    return TowerRunResult(ladder, triangle, tuple(levels), True)


@dataclass(frozen=True)
class UniquenessCertificate:
    isomorphisms: tuple   # per-level LiftIsomorphism, level 1 upward
    compatible: bool
    mismatch_level: Optional[int]


def uniqueness_certificate(run_a: TowerRunResult, run_b: TowerRunResult) -> UniquenessCertificate:
    """Compare two runs: produce the compatible system of isomorphisms.

    At each level the isomorphism between the two lifted triangles exists
    and is unique (the automorphism group vanishes with ``H^0``); each
    level's isomorphism reduces exactly to the previous one.
    """
    if run_a.ladder != run_b.ladder or run_a.base_triangle.K2 != run_b.base_triangle.K2:
        return UniquenessCertificate((), False, 0)
    isos = []
    prev = None  # identity at the base
    for (rec_a, rec_b) in zip(run_a.levels, run_b.levels):
        base_iso = prev
        try:
            iso = lifts_equivalent(rec_a.solution, rec_b.solution, base_iso=base_iso)
        except Exception:
            iso = None
        if iso is None:
            return UniquenessCertificate(tuple(isos), False, rec_a.level)
        if not iso.kernel_c_trivial:
            raise UniquenessFailure(
                f"isomorphism at level {rec_a.level} is not unique")
        isos.append(iso)
        prev = iso.c
    return UniquenessCertificate(tuple(isos), True, None)
