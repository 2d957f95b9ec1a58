"""Exhaustive ground truth for the lifting engine.

The oracle knows no cohomology.  Every strict lift differs from the
canonical entrywise lift by kernel-valued matrices, so it enumerates all
of those, keeps the candidates that close and commute exactly, and
decides equivalence by trying every isomorphism candidate.  It exists to
be dumb: its verdicts validate the engine on every instance small enough
to scan.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

from .complexes import ChainMap, Complex, GradedMapLayout, null_homotopy_solve
from .obstruction import LiftProblem, LiftSolution, naive_lift
from .typedmat import TypedMat


class BoundsExceeded(Exception):
    pass


@dataclass(frozen=True)
class SearchBounds:
    """Hard limits for enumeration; exceeding any of them is a fault."""

    max_candidates: int = 2 ** 16
    max_iso_candidates: int = 2 ** 10
    time_budget: float = 60.0


@dataclass
class OracleEnumeration:
    problem: LiftProblem
    solutions: list
    candidates_scanned: int
    elapsed: float


def _coordinate_space(layout: GradedMapLayout, p: int):
    """All coordinate vectors over the base field, lexicographically."""
    return itertools.product(range(p), repeat=layout.dim)


def _kernel_shift(problem, layout, coords):
    base = problem.tower.base
    vec = [base.from_int(c) for c in coords]
    graded = layout.unpack(vec)
    return {i: m.b_scale(problem.tower) for i, m in graded.items()}


def enumerate_lifts(problem: LiftProblem, bounds: SearchBounds = SearchBounds()) -> OracleEnumeration:
    """All strict lifts of the problem, by exhaustive scan.

    Candidates are the kernel-valued perturbations of the canonical
    entrywise lift -- exactly the fiber of the reduction map -- checked
    against the closure and commutation equations by raw arithmetic.
    """
    start = time.monotonic()
    base = problem.tower.base
    p = base.p
    F0, G0 = problem.F0, problem.G0
    lay_d = GradedMapLayout(F0, F0, 1)
    lay_s = GradedMapLayout(F0, G0, 0)
    total = p ** (lay_d.dim + lay_s.dim)
    if total > bounds.max_candidates:
        raise BoundsExceeded(
            f"{total} candidates exceed the cap {bounds.max_candidates}")
    can = naive_lift(problem)
    top = problem.tower.top
    F, Gbar = problem.F, problem.Gbar
    solutions = []
    scanned = 0
    for coords in itertools.product(range(p), repeat=lay_d.dim + lay_s.dim):
        scanned += 1
        if scanned % 256 == 0 and time.monotonic() - start > bounds.time_budget:
            raise BoundsExceeded("time budget exhausted during enumeration")
        d_shift = _kernel_shift(problem, lay_d, coords[:lay_d.dim])
        s_shift = _kernel_shift(problem, lay_s, coords[lay_d.dim:])
        d_comps = [can.dbar(i).add(d_shift[i]) for i in range(F.lo, F.hi)]
        s_comps = [can.sbar(i).add(s_shift[i]) for i in F.degrees()]

        def dbar(i):
            if F.lo <= i < F.hi:
                return d_comps[i - F.lo]
            return TypedMat.zero(F.coeffs, top, F.types_at(i + 1), F.types_at(i))

        def sbar(i):
            if F.lo <= i <= F.hi:
                return s_comps[i - F.lo]
            return TypedMat.zero(F.coeffs, top, G0.types_at(i), F.types_at(i))

        ok = True
        for i in F.degrees():
            if not dbar(i + 1).mul(dbar(i)).is_zero():
                ok = False
                break
            if not Gbar.diff(i).mul(sbar(i)).sub(sbar(i + 1).mul(dbar(i))).is_zero():
                ok = False
                break
        if not ok:
            continue
        Fbar = Complex(F.coeffs, top, F.lo, F.types, tuple(d_comps))
        sbar_map = ChainMap(Fbar, Gbar, 0, tuple(s_comps))
        solutions.append(LiftSolution(problem, Fbar, sbar_map).verify())
    return OracleEnumeration(problem, solutions, scanned, time.monotonic() - start)


def _oracle_equivalent(a: LiftSolution, b: LiftSolution,
                       bounds: SearchBounds, start: float) -> bool:
    """Try every candidate isomorphism (identity plus kernel perturbation)."""
    problem = a.problem
    base = problem.tower.base
    top = problem.tower.top
    p = base.p
    F = problem.F
    lay = GradedMapLayout(problem.F0, problem.F0, 0)
    if p ** lay.dim > bounds.max_iso_candidates:
        raise BoundsExceeded(
            f"{p ** lay.dim} isomorphism candidates exceed the cap")
    ident = {i: TypedMat.identity(F.coeffs, top, F.types_at(i)) for i in F.degrees()}
    checked = 0
    for coords in _coordinate_space(lay, p):
        checked += 1
        if checked % 128 == 0 and time.monotonic() - start > bounds.time_budget:
            raise BoundsExceeded("time budget exhausted during class counting")
        shift = _kernel_shift(problem, lay, coords)
        c_comps = {i: ident[i].add(shift[i]) for i in F.degrees()}
        chain = all(
            b.Fbar.diff(i).mul(c_comps[i]).sub(
                c_comps.get(i + 1, _zero_c(problem, i + 1)).mul(a.Fbar.diff(i))
            ).is_zero()
            for i in F.degrees()
        )
        if not chain:
            continue
        c = ChainMap(a.Fbar, b.Fbar, 0, tuple(c_comps[i] for i in F.degrees()))
        diff = b.sbar.compose(c).sub(a.sbar)
        if null_homotopy_solve(diff) is not None:
            return True
    return False


def _zero_c(problem, i):
    F, top = problem.F, problem.tower.top
    return TypedMat.identity(F.coeffs, top, F.types_at(i))


@dataclass
class ClassCount:
    count: int
    representatives: list
    scanned_pairs: int
    elapsed: float


def count_classes(problem: LiftProblem, enumeration: OracleEnumeration,
                  bounds: SearchBounds = SearchBounds()) -> ClassCount:
    """Partition the enumerated lifts into isomorphism classes."""
    start = time.monotonic()
    reps = []
    pairs = 0
    for sol in enumeration.solutions:
        placed = False
        for rep in reps:
            pairs += 1
            if _oracle_equivalent(sol, rep, bounds, start):
                placed = True
                break
        if not placed:
            reps.append(sol)
    return ClassCount(len(reps), reps, pairs, time.monotonic() - start)


@dataclass
class ObjectVerdict:
    lifts: bool
    candidates_scanned: int
    elapsed: float


def object_obstruction_oracle(F: Complex, tower, bounds: SearchBounds = SearchBounds()) -> ObjectVerdict:
    """Exhaustively decide whether a complex lifts (codomain-zero mode)."""
    from .obstruction import make_lift_problem

    mid, top = tower.mid, tower.top
    zero_mid = Complex.zero(F.coeffs, mid)
    zero_top = Complex.zero(F.coeffs, top)
    problem = make_lift_problem(tower, F, zero_mid, ChainMap.zero(F, zero_mid), zero_top)
    enum = enumerate_lifts(problem, bounds)
    return ObjectVerdict(bool(enum.solutions), enum.candidates_scanned, enum.elapsed)
