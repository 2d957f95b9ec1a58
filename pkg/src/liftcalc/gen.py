"""Deterministic instance generators for tests, demos and sweeps.

Random complexes are built degree by degree: each next differential is a
random element of the solution module of the closure equation, so the
family covers non-split differentials as well.  Random chain maps are
random elements of the solution module of the commutation equation.  All
randomness is driven by a caller-supplied ``random.Random``.
"""

from __future__ import annotations

import itertools

from .complexes import ChainMap, Complex, GradedMapLayout, flat_operator
from .coeffs import TRIVIAL
from .linalg import Matrix, solve_ring
from .obstruction import LiftProblem, make_lift_problem
from .rings import LocalRing, Tower
from .typedmat import TypedMat, typed_from_matrix


def _random_solution(ring, amat: Matrix, rng):
    """A random element of the solution module of ``A x = 0``."""
    _, gens = solve_ring(amat, Matrix.zero(ring, amat.rows, 1))
    if not gens:
        return [ring.zero] * amat.cols
    vec = [ring.zero] * amat.cols
    for g in gens:
        c = ring.random_element(rng)
        if c == ring.zero:
            continue
        for i in range(amat.cols):
            vec[i] = ring.add(vec[i], ring.mul(c, g.entries[i][0]))
    return vec


def random_complex(ring: LocalRing, rng, max_len: int = 3, max_rank: int = 2,
                   lo_choices=(-1, 0, 1), coeffs=TRIVIAL, allow_zero=True) -> Complex:
    length = rng.randint(1, max_len)
    lo = rng.choice(lo_choices)
    ranks = [rng.randint(0 if allow_zero else 1, max_rank) for _ in range(length)]
    if not any(ranks):
        ranks[rng.randrange(length)] = 1
    types = tuple(("*",) * r for r in ranks)
    diffs = []
    prev = None
    for k in range(length - 1):
        rows, cols = ranks[k + 1], ranks[k]
        if prev is None or prev.cols == 0 or rows == 0:
            m = Matrix.from_rows(ring, [
                [ring.random_element(rng) for _ in range(cols)] for _ in range(rows)
            ]) if rows and cols else Matrix.zero(ring, rows, cols)
        else:
            # operator X -> X o prev on flattened coordinates
            ncells = rows * cols
            op_rows = []
            for rr in range(rows):
                for cc in range(prev.cols):
                    row = [ring.zero] * ncells
                    for k2 in range(cols):
                        row[rr * cols + k2] = prev.entries[k2][cc]
                    op_rows.append(row)
            amat = Matrix.from_rows(ring, op_rows) if op_rows else Matrix.zero(ring, 0, ncells)
            vec = _random_solution(ring, amat, rng)
            m = Matrix.from_rows(ring, [
                [vec[rr * cols + cc] for cc in range(cols)] for rr in range(rows)
            ]) if ncells else Matrix.zero(ring, rows, cols)
        diffs.append(typed_from_matrix(m, coeffs))
        prev = m
    return Complex(coeffs, ring, lo, types, tuple(diffs))


def random_chain_map(F: Complex, G: Complex, rng) -> ChainMap:
    """A random strict degree-0 chain map ``F -> G``."""
    ring = F.ring
    lay = GradedMapLayout(F, G, 0)
    lay_out = GradedMapLayout(F, G, 1)

    def op(u):
        return {
            i: G.diff(i).mul(u[i]).sub(
                (u[i + 1] if i + 1 in u else
                 TypedMat.zero(F.coeffs, ring, G.types_at(i + 1), F.types_at(i + 1))
                 ).mul(F.diff(i)))
            for i in F.degrees()
        }

    amat = flat_operator(lay, lay_out, op)
    vec = _random_solution(ring, amat, rng)
    comps = lay.unpack(vec)
    return ChainMap(F, G, 0, tuple(comps[i] for i in F.degrees()))


def random_graded(F: Complex, G: Complex, degree: int, rng) -> dict:
    lay = GradedMapLayout(F, G, degree)
    vec = [F.ring.random_element(rng) for _ in range(lay.dim)]
    return lay.unpack(vec)


def homotopy_perturb(s: ChainMap, rng) -> ChainMap:
    """Replace ``s`` by ``s + d h + h d`` for a random graded ``h``."""
    F, G = s.source, s.target
    h = random_graded(F, G, -1, rng)

    def h_at(i):
        if i in h:
            return h[i]
        return TypedMat.zero(F.coeffs, F.ring, G.types_at(i - 1), F.types_at(i))

    comps = []
    for i in F.degrees():
        comps.append(s.comp(i)
                     .add(G.diff(i - 1).mul(h_at(i)))
                     .add(h_at(i + 1).mul(F.diff(i))))
    return ChainMap.make(F, G, 0, comps)


def random_problem(tower: Tower, rng, max_len: int = 3, max_rank: int = 2,
                   codomain_zero: bool = False) -> LiftProblem:
    """A random lift problem; the codomain lift is generated first so that
    a valid fixed lift always exists."""
    mid, top = tower.mid, tower.top
    F = random_complex(mid, rng, max_len=max_len, max_rank=max_rank)
    if codomain_zero:
        G = Complex.zero(F.coeffs, mid)
        Gbar = Complex.zero(F.coeffs, top)
        return make_lift_problem(tower, F, G, ChainMap.zero(F, G), Gbar)
    Gbar = random_complex(top, rng, max_len=max_len, max_rank=max_rank)
    G = Gbar.base_change(mid)
    s = random_chain_map(F, G, rng)
    return make_lift_problem(tower, F, G, s, Gbar)


# ---------------------------------------------------------------------------
# exhaustive families
# ---------------------------------------------------------------------------


def all_matrices(ring: LocalRing, rows: int, cols: int):
    cells = rows * cols
    if cells == 0:
        yield Matrix.zero(ring, rows, cols)
        return
    elems = list(ring.elements())
    for combo in itertools.product(elems, repeat=cells):
        yield Matrix(ring, rows, cols, tuple(
            tuple(combo[r * cols + c] for c in range(cols)) for r in range(rows)
        ))


def all_complexes(ring: LocalRing, shapes, lo: int = 0):
    """All complexes with the given rank vectors (length <= 2 needs no
    closure condition; longer shapes are filtered)."""
    for ranks in shapes:
        types = tuple(("*",) * r for r in ranks)
        if len(ranks) == 1:
            yield Complex(TRIVIAL, ring, lo, types, ())
            continue
        diff_shapes = [(ranks[k + 1], ranks[k]) for k in range(len(ranks) - 1)]
        for mats in itertools.product(*[all_matrices(ring, r, c) for r, c in diff_shapes]):
            ok = all(
                mats[k + 1].mul(mats[k]).is_zero() for k in range(len(mats) - 1)
            )
            if not ok:
                continue
            yield Complex(TRIVIAL, ring, lo, types,
                          tuple(typed_from_matrix(m) for m in mats))


def all_chain_maps(F: Complex, G: Complex):
    """Every strict degree-0 chain map, by direct filtering."""
    ring = F.ring
    lay = GradedMapLayout(F, G, 0)
    elems = list(ring.elements())
    for combo in itertools.product(elems, repeat=lay.dim):
        comps = lay.unpack(list(combo))
        cand = ChainMap(F, G, 0, tuple(comps[i] for i in F.degrees()))
        if cand.check():
            yield cand


def all_codomain_lifts(G: Complex, tower: Tower):
    """Every complex over the top ring reducing to ``G``."""
    top, base = tower.top, tower.base
    lay = GradedMapLayout(G.base_change(base), G.base_change(base), 1)
    can = [G.diff(i).lift_to(top) for i in range(G.lo, G.hi)]
    for combo in itertools.product(range(base.p), repeat=lay.dim):
        vec = [base.from_int(c) for c in combo]
        shift = lay.unpack(vec)
        diffs = tuple(can[i - G.lo].add(shift[i].b_scale(tower))
                      for i in range(G.lo, G.hi))
        cand = Complex(G.coeffs, top, G.lo, G.types, diffs)
        closed = all(cand.diff(i + 1).mul(cand.diff(i)).is_zero()
                     for i in cand.degrees())
        if closed:
            yield cand


def exhaustive_problems(tower: Tower, shapes_f, shapes_g):
    """Deterministic exhaustive sweep of lift problems over given shapes.

    Every complex over the top ring appears once as the fixed codomain
    lift, so each underlying problem occurs with every possible lift of
    its codomain.
    """
    mid = tower.mid
    for F in all_complexes(mid, shapes_f):
        for Gbar in all_complexes(tower.top, shapes_g):
            G = Gbar.base_change(mid)
            for s in all_chain_maps(F, G):
                yield make_lift_problem(tower, F, G, s, Gbar)
