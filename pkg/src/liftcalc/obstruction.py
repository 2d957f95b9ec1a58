"""Obstruction calculus for lifting a chain map with fixed codomain lift.

Given complexes ``F, G`` with a map ``s : F -> G`` over the middle ring of
a small-extension tower, and a fixed complex ``Gbar`` over the top ring
reducing to ``G``, the engine decides whether ``(F, s)`` lifts, produces a
lift when it does, and classifies all lifts up to isomorphism.

The primary route lifts the matrices of ``d_F`` and ``s`` entrywise, reads
off the two closure defects

* ``e = (1/b) * dbar o dbar``            (degree 2, ``F0 -> F0``),
* ``f = (1/b) * (d_Gbar o sbar - sbar o dbar)``  (degree 1, ``F0 -> G0``),

and interprets the pair as a degree-1 cocycle of ``Hom(F0, b (x) H0)``
where ``H0`` is the cone of ``s0``.  With the global sign conventions of
:mod:`liftcalc.complexes` the cocycle identities

    -d0 e + e d0 = 0,        s0 e + d0 f + f d0 = 0

hold exactly for every graded lift, changing the lift moves the pair by a
coboundary, and the class vanishes precisely when a strict lift exists.

A second, presentation-based route repeats the computation through a
degreewise split embedding into a lifted codomain, producing a cocycle in
a quotient Hom complex; the transport back to the cone picture is a
cochain map, and agreement of the two routes is a theorem that the test
suite checks instance by instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .coeffs import TRIVIAL
from .complexes import ChainMap, CohomologyData, Complex, GradedMapLayout, Homotopy, \
    HomComplex, NotACocycle, check_complex, cone, flat_operator, hom_complex, cohomology
from .linalg import Matrix, extract_block, solve_field, solve_ring
from .rings import LocalRing, Tower
from .typedmat import TypedMat, typed_block


class ObstructionNonzero(Exception):
    """A lift was requested although the obstruction class is nonzero."""


class InternalCocycleFailure(Exception):
    """A pinned sign identity failed; indicates an engine bug, not bad input."""


class PresentationUnavailable(Exception):
    pass


# ---------------------------------------------------------------------------
# lift problems
# ---------------------------------------------------------------------------


class LiftProblem:
    """A morphism over the middle ring with a fixed lift of its codomain.

    Validates all level and reduction constraints on construction and
    caches the base-field data: the reductions ``F0, G0, s0``, the cone
    ``H0`` of ``s0``, and the Hom complex ``Hom(F0, b (x) H0)`` housing
    the obstruction theory.
    """

    def __init__(self, tower: Tower, F: Complex, G: Complex, s: ChainMap,
                 Gbar: Complex):
        if F.ring != tower.mid or G.ring != tower.mid:
            raise ValueError("F and G must live over the middle ring")
        if Gbar.ring != tower.top:
            raise ValueError("the fixed codomain lift must live over the top ring")
        check_complex(F)
        check_complex(G)
        check_complex(Gbar)
        if s.source != F or s.target != G or s.degree != 0:
            raise ValueError("s must be a degree-0 map F -> G")
        if not s.check():
            raise ValueError("s is not a chain map")
        if Gbar.base_change(tower.mid) != G:
            raise ValueError("the codomain lift does not reduce to G")
        self.tower = tower
        self.coeffs = F.coeffs
        self.F, self.G, self.s, self.Gbar = F, G, s, Gbar
        self.F0 = F.base_change(tower.base)
        self.G0 = G.base_change(tower.base)
        self.s0 = s.base_change(tower.base)
        self.H0 = cone(self.s0).cone
        self.hom = hom_complex(self.F0, self.H0)
        self._cohomology = None

    @property
    def cohomology(self):
        if self._cohomology is None:
            self._cohomology = cohomology(self.hom.flat)
        return self._cohomology

    def h_dim(self, n: int) -> int:
        data = self.cohomology.get(n)
        return data.dim if data is not None else 0


def make_lift_problem(tower, F, G, s, Gbar) -> LiftProblem:
    return LiftProblem(tower, F, G, s, Gbar)


@dataclass(frozen=True)
class GradedLift:
    """Entrywise lifts of the differential of F and of s; nothing assumed."""

    problem: LiftProblem
    d_comps: tuple  # lifts of d_F^i over the top ring, one per support degree
    s_comps: tuple  # lifts of s^i

    def dbar(self, i: int) -> TypedMat:
        F, top = self.problem.F, self.problem.tower.top
        if F.lo <= i < F.hi:
            return self.d_comps[i - F.lo]
        return TypedMat.zero(F.coeffs, top, F.types_at(i + 1), F.types_at(i))

    def sbar(self, i: int) -> TypedMat:
        F, G = self.problem.F, self.problem.G
        top = self.problem.tower.top
        if F.lo <= i <= F.hi:
            return self.s_comps[i - F.lo]
        return TypedMat.zero(F.coeffs, top, G.types_at(i), F.types_at(i))

    def check_reductions(self) -> bool:
        p = self.problem
        mid = p.tower.mid
        for i in p.F.degrees():
            if self.sbar(i).base_change(mid) != p.s.comp(i):
                return False
            if i < p.F.hi and self.dbar(i).base_change(mid) != p.F.diff(i):
                return False
        return True


def naive_lift(problem: LiftProblem, seed: Optional[int] = None) -> GradedLift:
    """Canonical entrywise lift; a seed adds a kernel-valued perturbation."""
    top = problem.tower.top
    d_comps = [problem.F.diff(i).lift_to(top) for i in
               range(problem.F.lo, problem.F.hi)]
    s_comps = [problem.s.comp(i).lift_to(top) for i in problem.F.degrees()]
    if seed is not None:
        import random

        rng = random.Random(seed)
        from .typedmat import random_typed

        base = problem.tower.base
        d_comps = [
            m.add(random_typed(problem.coeffs, base, m.row_types, m.col_types,
                               rng).b_scale(problem.tower))
            for m in d_comps
        ]
        s_comps = [
            m.add(random_typed(problem.coeffs, base, m.row_types, m.col_types,
                               rng).b_scale(problem.tower))
            for m in s_comps
        ]
    return GradedLift(problem, tuple(d_comps), tuple(s_comps))


# ---------------------------------------------------------------------------
# defect pairs and obstruction classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefectPair:
    """Closure defects of a graded lift, in base-field coordinates.

    ``e[i] : F0^i -> F0^(i+2)`` and ``f[i] : F0^i -> G0^(i+1)``; the pair is
    the degree-1 element of ``Hom(F0, b (x) H0)`` with block components
    ``(e, f)`` and is a cocycle for every graded lift.
    """

    problem: LiftProblem
    e_comps: dict
    f_comps: dict

    def e(self, i: int) -> TypedMat:
        p = self.problem
        if i in self.e_comps:
            return self.e_comps[i]
        return TypedMat.zero(p.coeffs, p.tower.base,
                             p.F0.types_at(i + 2), p.F0.types_at(i))

    def f(self, i: int) -> TypedMat:
        p = self.problem
        if i in self.f_comps:
            return self.f_comps[i]
        return TypedMat.zero(p.coeffs, p.tower.base,
                             p.G0.types_at(i + 1), p.F0.types_at(i))

    def as_cone_cochain(self) -> dict:
        """Components into ``H0^(i+1) = F0^(i+2) + G0^(i+1)``."""
        p = self.problem
        out = {}
        for i in p.F0.degrees():
            out[i] = typed_block(p.coeffs, p.tower.base, [[self.e(i)], [self.f(i)]])
        return out

    def packed(self) -> Matrix:
        return self.problem.hom.pack(1, self.as_cone_cochain())

    def check_cocycle(self) -> None:
        """The two pinned identities, verified exactly."""
        p = self.problem
        d0 = p.F0.diff
        dg0 = p.G0.diff
        s0 = p.s0.comp
        for i in range(p.F0.lo - 1, p.F0.hi + 1):
            first = d0(i + 2).mul(self.e(i)).neg().add(self.e(i + 1).mul(d0(i)))
            if not first.is_zero():
                raise InternalCocycleFailure(f"-d e + e d != 0 at degree {i}")
            second = s0(i + 2).mul(self.e(i)).add(dg0(i + 1).mul(self.f(i))) \
                .add(self.f(i + 1).mul(d0(i)))
            if not second.is_zero():
                raise InternalCocycleFailure(f"s e + d f + f d != 0 at degree {i}")
        # cross-check against the packed Hom-complex differential
        row = self.packed()
        image = row.mul(p.hom.d(1).transpose())
        if not image.is_zero():
            raise InternalCocycleFailure("packed defect pair is not a Hom-complex cocycle")


def defect_pair(problem: LiftProblem, lift: GradedLift) -> DefectPair:
    if not lift.check_reductions():
        raise ValueError("graded lift does not reduce to the given problem")
    tower = problem.tower
    e_comps, f_comps = {}, {}
    for i in problem.F.degrees():
        e = lift.dbar(i + 1).mul(lift.dbar(i))
        if not e.is_zero():
            e_comps[i] = e.b_decompose(tower)
        f = problem.Gbar.diff(i).mul(lift.sbar(i)).sub(
            lift.sbar(i + 1).mul(lift.dbar(i)))
        if not f.is_zero():
            f_comps[i] = f.b_decompose(tower)
    pair = DefectPair(problem, e_comps, f_comps)
    pair.check_cocycle()
    return pair


@dataclass(frozen=True)
class ObstructionClass:
    """The class of a defect pair in ``H^1(Hom(F0, b (x) H0))``."""

    problem: LiftProblem
    lift: GradedLift
    pair: DefectPair
    cocycle_row: Matrix
    coordinates: Matrix
    is_zero: bool

    @property
    def coordinate_list(self):
        return [self.problem.tower.base.residue(x)
                for x in (self.coordinates.entries[0] if self.coordinates.rows else ())]


def obstruction_class(problem: LiftProblem, lift: Optional[GradedLift] = None,
                      seed: Optional[int] = None) -> ObstructionClass:
    """Obstruction to lifting ``s`` with the codomain lift held fixed.

    The class does not depend on the graded lift used; passing ``lift`` or
    ``seed`` only selects the representative cocycle.
    """
    if lift is None:
        lift = naive_lift(problem, seed=seed)
    pair = defect_pair(problem, lift)
    row = pair.packed()
    data = problem.cohomology[1] if 1 in problem.cohomology else None
    if data is None or data.ambient == 0:
        zero_coords = Matrix.zero(problem.tower.base, 1, 0)
        return ObstructionClass(problem, lift, pair, row, zero_coords, True)
    coords = data.class_coordinates(row)
    return ObstructionClass(problem, lift, pair, row, coords, coords.is_zero())


@dataclass(frozen=True)
class LiftSolution:
    """A strict lift: a complex over the top ring plus a lifted chain map."""

    problem: LiftProblem
    Fbar: Complex
    sbar: ChainMap

    def verify(self) -> "LiftSolution":
        p = self.problem
        check_complex(self.Fbar)
        if not self.sbar.check():
            raise InternalCocycleFailure("lift candidate is not a chain map")
        if self.Fbar.base_change(p.tower.mid) != p.F:
            raise InternalCocycleFailure("lifted complex does not reduce to F")
        if self.sbar.base_change(p.tower.mid) != p.s:
            raise InternalCocycleFailure("lifted map does not reduce to s")
        return self

    def as_graded(self) -> GradedLift:
        return GradedLift(self.problem,
                          tuple(self.Fbar.diffs),
                          tuple(self.sbar.comps))


def _solution_from_graded(problem: LiftProblem, d_comps, s_comps) -> LiftSolution:
    top = problem.tower.top
    Fbar = Complex(problem.coeffs, top, problem.F.lo,
                   problem.F.types, tuple(d_comps))
    sbar = ChainMap(Fbar, problem.Gbar, 0, tuple(s_comps))
    return LiftSolution(problem, Fbar, sbar).verify()


def correct_lift(problem: LiftProblem, oc: Optional[ObstructionClass] = None,
                 lift: Optional[GradedLift] = None) -> LiftSolution:
    """Repair a graded lift into a strict one when the class vanishes.

    Solves ``D(w) = (e, f)`` in the Hom complex and corrects
    ``dbar -> dbar - b*eps``, ``sbar -> sbar - b*eta`` with
    ``eps = -w_F`` and ``eta = w_G``.
    """
    if oc is None:
        if lift is None:
            lift = naive_lift(problem)
        oc = obstruction_class(problem, lift=lift)
    lift = oc.lift
    if not oc.is_zero:
        raise ObstructionNonzero("the obstruction class is nonzero")
    hom = problem.hom
    d0 = hom.d(0)
    rhs = oc.cocycle_row.transpose()
    w, _ = solve_field(d0, rhs)
    if w is None:
        raise InternalCocycleFailure("vanishing class with unsolvable coboundary equation")
    w_graded = hom.unpack(0, w.transpose())
    tower, F, G = problem.tower, problem.F, problem.G
    d_comps, s_comps = [], []
    for i in problem.F.degrees():
        block = w_graded[i]  # F0^i -> H0^i = F0^(i+1) + G0^i
        nF1 = F.rank(i + 1)
        w_F = block.block(0, 0, nF1, F.rank(i))
        w_G = block.block(nF1, 0, G.rank(i), F.rank(i))
        eps = w_F.neg()
        eta = w_G
        if i < F.hi:
            d_comps.append(lift.dbar(i).sub(eps.b_scale(tower)))
        s_comps.append(lift.sbar(i).sub(eta.b_scale(tower)))
    return _solution_from_graded(problem, d_comps, s_comps)


def h0_action(problem: LiftProblem, solution: LiftSolution, xi_row: Matrix) -> LiftSolution:
    """Perturb a solution by a degree-0 cocycle of ``Hom(F0, b (x) H0)``.

    The action is ``dbar -> dbar + b*xi_F``, ``sbar -> sbar - b*xi_G``;
    ``xi = 0`` acts as the identity and cocycles act by solutions.
    """
    hom = problem.hom
    if not hom.d(0).mul(xi_row.transpose()).is_zero():
        raise NotACocycle("the action needs a degree-0 cocycle")
    xi = hom.unpack(0, xi_row)
    tower, F, G = problem.tower, problem.F, problem.G
    graded = solution.as_graded()
    d_comps, s_comps = [], []
    for i in F.degrees():
        block = xi[i]
        nF1 = F.rank(i + 1)
        xi_F = block.block(0, 0, nF1, F.rank(i))
        xi_G = block.block(nF1, 0, G.rank(i), F.rank(i))
        if i < F.hi:
            d_comps.append(graded.dbar(i).add(xi_F.b_scale(tower)))
        s_comps.append(graded.sbar(i).sub(xi_G.b_scale(tower)))
    return _solution_from_graded(problem, d_comps, s_comps)


# ---------------------------------------------------------------------------
# equivalence of lifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftIsomorphism:
    """Witness for equivalence of two lifts: an isomorphism over the top
    ring reducing to the identity, with the homotopy ``sbar_B o c ~ sbar_A``."""

    c: ChainMap
    witness: Homotopy
    kernel_c_trivial: bool  # True when the c-part of the solution set is unique


def lifts_equivalent(a: LiftSolution, b: LiftSolution,
                     base_iso: Optional[ChainMap] = None) -> Optional[LiftIsomorphism]:
    """Decide the strict lift-set equivalence between two solutions.

    Searches for ``c = (lift of base_iso) + kernel-valued y`` with
    ``c o d = d o c`` and ``sbar_B o c`` homotopic to ``sbar_A``; both
    conditions together form one linear system over the top ring, so the
    decision is exact.  ``base_iso`` defaults to the identity of ``F``.
    """
    pA, pB = a.problem, b.problem
    tower = pA.tower
    top, mid = tower.top, tower.mid
    FA, FB, Gbar = a.Fbar, b.Fbar, pA.Gbar
    if base_iso is None:
        if pA.F != pB.F:
            raise ValueError("default identity comparison needs equal F")
        base_iso = ChainMap.identity(pA.F)
    c0 = [base_iso.comp(i).lift_to(top) for i in pA.F.degrees()]
    c0 = {i: m for i, m in zip(pA.F.degrees(), c0)}

    lay_y = GradedMapLayout(FA, FB, 0)
    lay_h = GradedMapLayout(FA, Gbar, -1)
    lay_chain = GradedMapLayout(FA, FB, 1)
    lay_hom = GradedMapLayout(FA, Gbar, 0)
    ring = top
    mgen = ring.maximal_ideal_gen

    def y_at(y, i):
        if i in y:
            return y[i]
        return TypedMat.zero(pA.coeffs, ring, FB.types_at(i), FA.types_at(i))

    def h_at(h, i):
        if i in h:
            return h[i]
        return TypedMat.zero(pA.coeffs, ring, Gbar.types_at(i - 1), FA.types_at(i))

    def op(vec):
        y = lay_y.unpack(vec[:lay_y.dim])
        h = lay_h.unpack(vec[lay_y.dim:])
        out_chain, out_hom, out_small = {}, {}, {}
        for i in FA.degrees():
            out_chain[i] = FB.diff(i).mul(y[i]).sub(y_at(y, i + 1).mul(FA.diff(i)))
            hm = Gbar.diff(i - 1).mul(h[i]).add(h_at(h, i + 1).mul(FA.diff(i)))
            out_hom[i] = b.sbar.comp(i).mul(y[i]).sub(hm)
            out_small[i] = y[i].scale(mgen)
        return out_chain, out_hom, out_small

    dim_in = lay_y.dim + lay_h.dim
    cols = []
    zero_vec = [ring.zero] * dim_in
    for idx in range(dim_in):
        vec = list(zero_vec)
        vec[idx] = ring.one
        oc_, oh_, os_ = op(vec)
        cols.append(lay_chain.pack(oc_) + lay_hom.pack(oh_) + lay_y.pack(os_))
    nrows = lay_chain.dim + lay_hom.dim + lay_y.dim
    amat = Matrix.from_rows(ring, [[cols[j][i] for j in range(dim_in)]
                                   for i in range(nrows)]) if dim_in else \
        Matrix(ring, nrows, 0, tuple(() for _ in range(nrows)))

    rhs_chain, rhs_hom = {}, {}
    for i in FA.degrees():
        c0i = c0.get(i, TypedMat.zero(pA.coeffs, ring, FB.types_at(i), FA.types_at(i)))
        c0n = c0.get(i + 1, TypedMat.zero(pA.coeffs, ring, FB.types_at(i + 1), FA.types_at(i + 1)))
        rhs_chain[i] = FB.diff(i).mul(c0i).sub(c0n.mul(FA.diff(i))).neg()
        rhs_hom[i] = a.sbar.comp(i).sub(b.sbar.comp(i).mul(c0i))
    rhs_vec = lay_chain.pack(rhs_chain) + lay_hom.pack(rhs_hom) + \
        [ring.zero] * lay_y.dim
    rhs = Matrix.from_rows(ring, [[x] for x in rhs_vec]) if nrows else Matrix(ring, 0, 1, ())

    x, kernel = solve_ring(amat, rhs)
    if x is None:
        return None
    sol_vec = [x.entries[i][0] for i in range(dim_in)]
    y = lay_y.unpack(sol_vec[:lay_y.dim])
    h = lay_h.unpack(sol_vec[lay_y.dim:])
    c_comps = []
    for i in FA.degrees():
        c0i = c0.get(i, TypedMat.zero(pA.coeffs, ring, FB.types_at(i), FA.types_at(i)))
        c_comps.append(c0i.add(y[i]))
    c = ChainMap(FA, FB, 0, tuple(c_comps))
    if not c.check():
        raise InternalCocycleFailure("equivalence solver produced a non-chain map")
    witness = Homotopy.make(a.sbar, b.sbar.compose(c), {
        i: h[i] for i in FA.degrees()
    })
    kernel_trivial = all(_vec_head_zero(g, lay_y.dim, ring) for g in kernel)
    return LiftIsomorphism(c, witness, kernel_trivial)


def _vec_head_zero(gen: Matrix, head: int, ring) -> bool:
    return all(gen.entries[i][0] == ring.zero for i in range(head))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftSet:
    """Representatives of the isomorphism classes of lifts."""

    problem: LiftProblem
    solutions: tuple
    xi_rows: tuple
    pairwise_checked: bool
    truncated: bool


def _h0_elements(problem: LiftProblem, cap: int):
    data = problem.cohomology.get(0)
    base = problem.tower.base
    if data is None or data.dim == 0:
        return [Matrix.zero(base, 1, problem.hom.dim(0))], False
    count = base.p ** data.dim
    if count > cap:
        return None, True
    rows = []
    for coeffs_tuple in itertools.product(range(base.p), repeat=data.dim):
        row = Matrix.zero(base, 1, data.ambient)
        for c, k in zip(coeffs_tuple, range(data.dim)):
            if c:
                rep = extract_block(data.reps, k, 0, 1, data.ambient)
                row = row.add(rep.scale(base.from_int(c)))
        rows.append(row)
    return rows, False


def classify_lifts(problem: LiftProblem, max_classes: int = 4096,
                   pairwise_cap: int = 40):
    """Classify lifts up to the strict lift-set equivalence.

    Returns ``(LiftSet, report)``.  With vanishing class the
    representatives are one orbit of the degree-0 cohomology acting on a
    base solution; when the degree-(-1) cohomology vanishes the action is
    a torsor (verified pairwise on small instances), otherwise orbits are
    merged by the exact equivalence solver and no uniqueness is claimed.
    """
    oc = obstruction_class(problem)
    h_m1 = problem.h_dim(-1)
    h0 = problem.h_dim(0)
    h1 = problem.h_dim(1)
    report = {
        "h_minus1_dim": h_m1,
        "h0_dim": h0,
        "h1_dim": h1,
        "class_coordinates": oc.coordinate_list,
        "is_zero": oc.is_zero,
        "lift_found": False,
        "lift_class_count": 0,
        "torsor_certified": False,
    }
    if not oc.is_zero:
        return LiftSet(problem, (), (), False, False), report
    base_sol = correct_lift(problem, oc)
    report["lift_found"] = True
    xi_rows, truncated = _h0_elements(problem, max_classes)
    if truncated:
        report["lift_class_count"] = problem.tower.base.p ** h0 if h_m1 == 0 else None
        report["torsor_certified"] = h_m1 == 0
        lift_set = LiftSet(problem, (base_sol,), (), False, True)
        return lift_set, report
    solutions = [h0_action(problem, base_sol, row) for row in xi_rows]
    if h_m1 == 0:
        pairwise = len(solutions) <= pairwise_cap
        if pairwise:
            for i in range(len(solutions)):
                for j in range(i + 1, len(solutions)):
                    if lifts_equivalent(solutions[i], solutions[j]) is not None:
                        raise InternalCocycleFailure(
                            "torsor law violated with vanishing H^-1")
        report["lift_class_count"] = len(solutions)
        report["torsor_certified"] = True
        return LiftSet(problem, tuple(solutions), tuple(xi_rows), pairwise, False), report
    # merge orbits under the full equivalence
    reps, rep_rows = [], []
    for sol, row in zip(solutions, xi_rows):
        if all(lifts_equivalent(sol, r) is None for r in reps):
            reps.append(sol)
            rep_rows.append(row)
    report["lift_class_count"] = len(reps)
    report["torsor_certified"] = False
    return LiftSet(problem, tuple(reps), tuple(rep_rows), True, False), report


# ---------------------------------------------------------------------------
# presentation route: split embedding, block cocycle, transport
# ---------------------------------------------------------------------------


class PresentedProblem:
    """The lift problem rewritten through a degreewise split embedding.

    ``s_pres : J -> I`` is a strict degreewise split monomorphism with
    ``J = F`` and a homotopy equivalence ``q : I -> G`` satisfying
    ``q o s_pres = s``; ``Ibar`` is an honest complex over the top ring
    reducing to ``I``.  The stored split lifts give the decomposition
    ``Ibar = Jbar + Kbar`` with normalized retraction, and the
    differential blocks ``d11, d12, d21, d22`` are read off through it;
    validity requires the ``d21`` corner to be kernel-valued, which is
    exactly the embedded subcomplex condition after reduction.
    """

    def __init__(self, problem: LiftProblem, I: Complex, s_pres: ChainMap,
                 t_retr: tuple, Ibar: Complex, sbar0: tuple, tbar0: tuple,
                 ktypes: tuple, kbar0: tuple, pbar0: tuple, q_to_G: ChainMap):
        tower = problem.tower
        top, mid, base = tower.top, tower.mid, tower.base
        check_complex(I)
        check_complex(Ibar)
        if Ibar.base_change(mid) != I:
            raise PresentationUnavailable("lifted codomain does not reduce")
        if s_pres.source != problem.F or s_pres.target != I or not s_pres.check():
            raise PresentationUnavailable("presented map is not a chain map F -> I")
        if not q_to_G.check() or not q_to_G.compose(s_pres).sub(problem.s).is_zero():
            raise PresentationUnavailable("q o s_pres != s")
        self.problem = problem
        self.I, self.s_pres, self.q_to_G = I, s_pres, q_to_G
        self.Ibar = Ibar
        self.t_retr = t_retr
        self.ktypes = ktypes
        J = problem.F
        self.J = J
        ident = TypedMat.identity
        # degreewise retraction over the middle ring
        for i in J.degrees():
            got = t_retr[i - I.lo].mul(s_pres.comp(i))
            if got != ident(J.coeffs, mid, J.types_at(i)):
                raise PresentationUnavailable(f"t o s != id at degree {i}")
        # normalize the lifted retraction so that tbar0 o sbar0 = id exactly
        self.sbar0, self.tbar0 = [], []
        for i in range(I.lo, I.hi + 1):
            sb = sbar0[i - I.lo]
            tb = tbar0[i - I.lo]
            n = tb.mul(sb).sub(ident(J.coeffs, top, J.types_at(i)))
            if not n.base_change(mid).is_zero():
                raise PresentationUnavailable("split lift does not reduce to a retraction")
            tb = tb.sub(n.mul(tb))  # (id - n) o tbar, exact by n o n = 0
            if tb.mul(sb) != ident(J.coeffs, top, J.types_at(i)):
                raise InternalCocycleFailure("retraction normalization failed")
            self.sbar0.append(sb)
            self.tbar0.append(tb)
        self.kbar0 = list(kbar0)
        self.pbar0 = list(pbar0)
        self._check_splitting()
        self._check_corner()

    def ktypes_at(self, i: int) -> tuple:
        if self.I.lo <= i <= self.I.hi:
            return self.ktypes[i - self.I.lo]
        return ()

    def sb(self, i):
        top = self.problem.tower.top
        if self.I.lo <= i <= self.I.hi:
            return self.sbar0[i - self.I.lo]
        return TypedMat.zero(self.J.coeffs, top, self.I.types_at(i), self.J.types_at(i))

    def tb(self, i):
        top = self.problem.tower.top
        if self.I.lo <= i <= self.I.hi:
            return self.tbar0[i - self.I.lo]
        return TypedMat.zero(self.J.coeffs, top, self.J.types_at(i), self.I.types_at(i))

    def kb(self, i):
        top = self.problem.tower.top
        if self.I.lo <= i <= self.I.hi:
            return self.kbar0[i - self.I.lo]
        return TypedMat.zero(self.J.coeffs, top, self.I.types_at(i), self.ktypes_at(i))

    def pb(self, i):
        top = self.problem.tower.top
        if self.I.lo <= i <= self.I.hi:
            return self.pbar0[i - self.I.lo]
        return TypedMat.zero(self.J.coeffs, top, self.ktypes_at(i), self.I.types_at(i))

    def _check_splitting(self):
        C = self.J.coeffs
        top = self.problem.tower.top
        for i in range(self.I.lo, self.I.hi + 1):
            idJ = TypedMat.identity(C, top, self.J.types_at(i))
            idK = TypedMat.identity(C, top, self.ktypes_at(i))
            idI = TypedMat.identity(C, top, self.I.types_at(i))
            if self.pb(i).mul(self.kb(i)) != idK or \
               not self.tb(i).mul(self.kb(i)).is_zero() or \
               not self.pb(i).mul(self.sb(i)).is_zero() or \
               self.sb(i).mul(self.tb(i)).add(self.kb(i).mul(self.pb(i))) != idI:
                raise PresentationUnavailable(f"splitting identities fail at degree {i}")

    def _check_corner(self):
        mid = self.problem.tower.mid
        for i in range(self.I.lo, self.I.hi):
            if not self.d21(i).base_change(mid).is_zero():
                raise PresentationUnavailable(
                    f"embedded image is not a subcomplex after reduction (degree {i})")
        # blocks reassemble the lifted differential
        for i in range(self.I.lo, self.I.hi):
            assembled = self.sb(i + 1).mul(self.d11(i)).mul(self.tb(i)) \
                .add(self.sb(i + 1).mul(self.d12(i)).mul(self.pb(i))) \
                .add(self.kb(i + 1).mul(self.d21(i)).mul(self.tb(i))) \
                .add(self.kb(i + 1).mul(self.d22(i)).mul(self.pb(i)))
            if assembled != self.Ibar.diff(i):
                raise InternalCocycleFailure("block decomposition does not reassemble")

    # differential blocks over the top ring
    def d11(self, i):
        return self.tb(i + 1).mul(self.Ibar.diff(i)).mul(self.sb(i))

    def d12(self, i):
        return self.tb(i + 1).mul(self.Ibar.diff(i)).mul(self.kb(i))

    def d21(self, i):
        return self.pb(i + 1).mul(self.Ibar.diff(i)).mul(self.sb(i))

    def d22(self, i):
        return self.pb(i + 1).mul(self.Ibar.diff(i)).mul(self.kb(i))

    def base_complexes(self):
        """The reduced subobject and quotient complexes ``(J0, K0)``."""
        tower = self.problem.tower
        base = tower.base
        J0 = self.problem.F0
        d11_0 = [self.d11(i).base_change(base) for i in range(self.J.lo, self.J.hi)]
        for got, want in zip(d11_0, J0.diffs):
            if got != want:
                raise InternalCocycleFailure("reduced block d11 differs from d_F0")
        ktypes = tuple(self.ktypes_at(i) for i in range(self.I.lo, self.I.hi + 1))
        d22_0 = tuple(self.d22(i).base_change(base) for i in range(self.I.lo, self.I.hi))
        K0 = Complex(self.J.coeffs, base, self.I.lo, ktypes, d22_0)
        check_complex(K0)
        return J0, K0


@dataclass(frozen=True)
class FaithfulClass:
    """The block cocycle of the conjugated differential, in the quotient
    Hom complex ``Hom(J0, b (x) K0)``."""

    presented: PresentedProblem
    hom_plus: HomComplex
    phi: dict
    beta: dict
    cocycle_row: Matrix
    coordinates: Matrix
    is_zero: bool


def faithful_class(pp: PresentedProblem, seed: Optional[int] = None,
                   beta_shift: Optional[dict] = None) -> FaithfulClass:
    """Obstruction through the split presentation.

    Normalizes a graded lift of the embedding to ``identity + beta`` in
    the stored decomposition, conjugates the lifted differential by the
    associated unipotent automorphism, extracts the lower-left block, and
    certifies it is a 1-cocycle of ``Hom(J0, b (x) K0)``; its class is the
    obstruction in this picture.
    """
    problem = pp.problem
    tower = problem.tower
    top, base = tower.top, tower.base
    J, I = pp.J, pp.I
    C = J.coeffs
    srand = {i: pp.s_pres.comp(i).lift_to(top) for i in J.degrees()}
    if seed is not None:
        import random
        from .typedmat import random_typed

        rng = random.Random(seed)
        srand = {
            i: m.add(random_typed(C, base, m.row_types, m.col_types, rng)
                     .b_scale(tower))
            for i, m in srand.items()
        }

    beta = {}
    for i in J.degrees():
        ident = TypedMat.identity(C, top, J.types_at(i))
        n = pp.tb(i).mul(srand[i]).sub(ident)
        if not n.base_change(tower.mid).is_zero():
            raise InternalCocycleFailure("graded lift fails to reduce to the embedding")
        a = ident.sub(n)  # inverse of id + n, as n o n = 0
        snorm = srand[i].mul(a)
        if pp.tb(i).mul(snorm) != ident:
            raise InternalCocycleFailure("normalization did not fix the top block")
        beta_mat = pp.pb(i).mul(snorm)
        if not beta_mat.base_change(tower.mid).is_zero():
            raise InternalCocycleFailure("normalized lower block is not kernel-valued")
        beta[i] = beta_mat.b_decompose(tower)
    if beta_shift is not None:
        for i, shift in beta_shift.items():
            beta[i] = beta[i].add(shift)

    # b = id + k o (b*beta) o t, conjugate, extract the lower-left block
    def bmat(i):
        ident = TypedMat.identity(C, top, I.types_at(i))
        if i not in beta:
            return ident
        return ident.add(pp.kb(i).mul(beta[i].b_scale(tower)).mul(pp.tb(i)))

    def bmat_inv(i):
        ident = TypedMat.identity(C, top, I.types_at(i))
        if i not in beta:
            return ident
        return ident.sub(pp.kb(i).mul(beta[i].b_scale(tower)).mul(pp.tb(i)))

    phi = {}
    for i in range(I.lo, I.hi):
        conj = bmat_inv(i + 1).mul(pp.Ibar.diff(i)).mul(bmat(i))
        phi_mat = pp.pb(i + 1).mul(conj).mul(pp.sb(i))
        if not phi_mat.base_change(tower.mid).is_zero():
            raise InternalCocycleFailure("conjugated lower-left block is not kernel-valued")
        phi[i] = phi_mat.b_decompose(tower)

    J0, K0 = pp.base_complexes()
    # explicit block description: phi = -beta d11 + d21 + d22 beta (reduced)
    for i in J.degrees():
        if i >= I.hi:
            continue
        beta_i = beta.get(i)
        beta_n = beta.get(i + 1)
        d11_0 = pp.d11(i).base_change(base)
        d22_0 = pp.d22(i).base_change(base)
        expected = pp.d21(i).b_decompose(tower)
        if beta_n is not None:
            expected = expected.sub(beta_n.mul(d11_0))
        if beta_i is not None:
            expected = expected.add(d22_0.mul(beta_i))
        if not phi[i].sub(expected).is_zero():
            raise InternalCocycleFailure("explicit block formula disagrees")

    hom_plus = hom_complex(J0, K0)
    row = hom_plus.pack(1, {
        i: phi.get(i, TypedMat.zero(C, base, K0.types_at(i + 1), J0.types_at(i)))
        for i in J0.degrees()
    })
    if not hom_plus.d(1).mul(row.transpose()).is_zero():
        raise InternalCocycleFailure("block cocycle fails the quotient Hom differential")
    coh = cohomology(hom_plus.flat)
    data = coh.get(1)
    if data is None or data.ambient == 0:
        coords = Matrix.zero(base, 1, 0)
        return FaithfulClass(pp, hom_plus, phi, beta, row, coords, True)
    coords = data.class_coordinates(row)
    return FaithfulClass(pp, hom_plus, phi, beta, row, coords, coords.is_zero())


@dataclass(frozen=True)
class TransportedClass:
    """A presentation-route class carried into the cone picture."""

    cocycle_row: Matrix
    coordinates: Matrix
    is_zero: bool
    cochain_iso: bool
    tau: dict


def mu_transport(pp: PresentedProblem, fc: FaithfulClass) -> TransportedClass:
    """Transport a quotient-Hom class into ``H^1(Hom(F0, b (x) H0))``.

    The carrier is the degreewise map ``tau = (-d12, q o k)`` from the
    quotient complex to the cone of ``s0``; it intertwines the
    differentials exactly, and on presentations produced by
    :func:`present` it is a degreewise isomorphism.
    """
    problem = pp.problem
    tower = problem.tower
    base = tower.base
    J0, K0 = pp.base_complexes()
    H0 = problem.H0
    C = J0.coeffs
    q0 = pp.q_to_G.base_change(base)
    tau = {}
    for i in range(K0.lo, K0.hi + 1):
        top_block = pp.d12(i).base_change(base).neg()
        bottom = q0.comp(i).mul(pp.kb(i).base_change(base))
        tau[i] = typed_block(C, base, [[top_block], [bottom]])
    # tau intertwines d22 with the cone differential
    for i in range(K0.lo, K0.hi):
        left = _h0_diff(problem, i).mul(tau[i])
        right = tau[i + 1].mul(K0.diff(i))
        if not left.sub(right).is_zero():
            raise InternalCocycleFailure("transport map is not a chain map")
    iso = all(_is_square_invertible(tau[i]) for i in tau) and all(
        len(tau[i].row_types) == len(tau[i].col_types) for i in tau)
    moved = {}
    for i in J0.degrees():
        phi_i = fc.phi.get(i)
        if phi_i is None:
            phi_i = TypedMat.zero(C, base, K0.types_at(i + 1), J0.types_at(i))
        ti = tau.get(i + 1)
        if ti is None:
            ti = TypedMat.zero(C, base, H0.types_at(i + 1), K0.types_at(i + 1))
        moved[i] = ti.mul(phi_i)
    row = problem.hom.pack(1, moved)
    if not problem.hom.d(1).mul(row.transpose()).is_zero():
        raise InternalCocycleFailure("transported class is not a cone cocycle")
    data = problem.cohomology.get(1)
    if data is None or data.ambient == 0:
        return TransportedClass(row, Matrix.zero(base, 1, 0), True, iso, tau)
    coords = data.class_coordinates(row)
    return TransportedClass(row, coords, coords.is_zero(), iso, tau)


def _h0_diff(problem: LiftProblem, i: int) -> TypedMat:
    return problem.H0.diff(i)


def _is_square_invertible(m: TypedMat) -> bool:
    from .typedmat import underlying_matrix
    from .linalg import rref_field

    flat = underlying_matrix(m)
    if flat.rows != flat.cols:
        return False
    rank, _, _, _ = rref_field(flat)
    return rank == flat.rows


def present(problem: LiftProblem, seed: Optional[int] = None) -> PresentedProblem:
    """Present the problem through the canonical split embedding.

    The codomain is replaced by the direct sum of the target with one
    disk per degree of the source, into which the source embeds by
    ``x -> (d x, x, s x)``; the summand lifts over the top ring are
    canonical (or seeded), and the collapse back to the target is the
    projection, a strict homotopy equivalence.
    """
    tower = problem.tower
    top, mid = tower.top, tower.mid
    F, G, s = problem.F, problem.G, problem.s
    C = F.coeffs

    lift = naive_lift(problem, seed=seed)

    def disks(ring):
        lo = F.lo - 1
        hi = F.hi
        types = tuple(F.types_at(i + 1) + F.types_at(i) for i in range(lo, hi + 1))
        diffs = []
        for i in range(lo, hi):
            z1 = TypedMat.zero(C, ring, F.types_at(i + 2), F.types_at(i + 1))
            z2 = TypedMat.zero(C, ring, F.types_at(i + 2), F.types_at(i))
            ident = TypedMat.identity(C, ring, F.types_at(i + 1))
            z3 = TypedMat.zero(C, ring, F.types_at(i + 1), F.types_at(i))
            diffs.append(typed_block(C, ring, [[z1, z2], [ident, z3]]))
        return Complex(C, ring, lo, types, tuple(diffs))

    from .complexes import direct_sum

    disks_mid = disks(mid)
    disks_top = disks(top)
    I = direct_sum(disks_mid, G)
    Ibar = direct_sum(disks_top, problem.Gbar)

    def col3(ring, a, b, c):
        return typed_block(C, ring, [[a], [b], [c]])

    s_pres = ChainMap.make(F, I, 0, [
        col3(mid, F.diff(i), TypedMat.identity(C, mid, F.types_at(i)), s.comp(i))
        for i in F.degrees()
    ])
    t_retr = tuple(
        typed_block(C, mid, [[
            TypedMat.zero(C, mid, F.types_at(i), F.types_at(i + 1)),
            TypedMat.identity(C, mid, F.types_at(i)),
            TypedMat.zero(C, mid, F.types_at(i), G.types_at(i)),
        ]]) for i in range(I.lo, I.hi + 1)
    )
    sbar0 = tuple(
        col3(top, lift.dbar(i), TypedMat.identity(C, top, F.types_at(i)),
             lift.sbar(i)) for i in range(I.lo, I.hi + 1)
    )
    tbar0 = tuple(
        typed_block(C, top, [[
            TypedMat.zero(C, top, F.types_at(i), F.types_at(i + 1)),
            TypedMat.identity(C, top, F.types_at(i)),
            TypedMat.zero(C, top, F.types_at(i), problem.Gbar.types_at(i)),
        ]]) for i in range(I.lo, I.hi + 1)
    )
    ktypes = tuple(F.types_at(i + 1) + G.types_at(i) for i in range(I.lo, I.hi + 1))
    kbar0 = tuple(
        typed_block(C, top, [
            [TypedMat.identity(C, top, F.types_at(i + 1)),
             TypedMat.zero(C, top, F.types_at(i + 1), G.types_at(i))],
            [TypedMat.zero(C, top, F.types_at(i), F.types_at(i + 1)),
             TypedMat.zero(C, top, F.types_at(i), G.types_at(i))],
            [TypedMat.zero(C, top, G.types_at(i), F.types_at(i + 1)),
             TypedMat.identity(C, top, G.types_at(i))],
        ]) for i in range(I.lo, I.hi + 1)
    )
    pbar0 = tuple(
        typed_block(C, top, [
            [TypedMat.identity(C, top, F.types_at(i + 1)),
             lift.dbar(i).neg(),
             TypedMat.zero(C, top, F.types_at(i + 1), G.types_at(i))],
            [TypedMat.zero(C, top, G.types_at(i), F.types_at(i + 1)),
             lift.sbar(i).neg(),
             TypedMat.identity(C, top, G.types_at(i))],
        ]) for i in range(I.lo, I.hi + 1)
    )
    q_to_G = ChainMap.make(I, G, 0, [
        typed_block(C, mid, [[
            TypedMat.zero(C, mid, G.types_at(i), F.types_at(i + 1)),
            TypedMat.zero(C, mid, G.types_at(i), F.types_at(i)),
            TypedMat.identity(C, mid, G.types_at(i)),
        ]]) for i in range(I.lo, I.hi + 1)
    ])
    return PresentedProblem(problem, I, s_pres, t_retr, Ibar, sbar0, tbar0,
                            ktypes, kbar0, pbar0, q_to_G)


# ---------------------------------------------------------------------------
# independent object-deformation route (codomain zero)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectDeformation:
    """Deformation data of a bare complex via its endomorphism complex.

    Independent of the cone picture: the closure defect of a graded lift of
    the differential is read as a degree-2 cocycle of ``Hom(F0, F0)``.
    """

    hom: HomComplex
    cocycle_row: Matrix
    is_zero: bool
    ext1_dim: int
    ext2_dim: int


def object_deformation_class(F: Complex, tower: Tower,
                             seed: Optional[int] = None) -> ObjectDeformation:
    top, base = tower.top, tower.base
    F0 = F.base_change(base)
    end = hom_complex(F0, F0)
    d_lifts = {i: F.diff(i).lift_to(top) for i in range(F.lo, F.hi)}
    if seed is not None:
        import random
        from .typedmat import random_typed

        rng = random.Random(seed)
        d_lifts = {
            i: m.add(random_typed(F.coeffs, base, m.row_types, m.col_types,
                                  rng).b_scale(tower))
            for i, m in d_lifts.items()
        }
    def dl(i):
        if i in d_lifts:
            return d_lifts[i]
        return TypedMat.zero(F.coeffs, top, F.types_at(i + 1), F.types_at(i))
    e = {}
    for i in F.degrees():
        defect = dl(i + 1).mul(dl(i))
        if not defect.is_zero():
            e[i] = defect.b_decompose(tower)
        else:
            e[i] = TypedMat.zero(F.coeffs, base, F0.types_at(i + 2), F0.types_at(i))
    row = end.pack(2, e)
    coh = cohomology(end.flat)
    data2 = coh.get(2)
    if data2 is None or data2.ambient == 0:
        is_zero = True
    else:
        is_zero = data2.is_zero_class(row)
    ext1 = coh[1].dim if 1 in coh else 0
    ext2 = data2.dim if data2 is not None else 0
    return ObjectDeformation(end, row, is_zero, ext1, ext2)
