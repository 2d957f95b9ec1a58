"""Line-oriented scenario files and deterministic reports.

A scenario is plain text, one directive per line; matrices are explicit
JSON integer grids (entries are residues for ``Z/p^n`` and coefficient
lists for ``Fp[t]/t^n``), so fixtures stay auditable by hand.  Reports
are ``key = value`` lines, byte-identical for identical scenario and
seed, and embed the sign-convention tag so fixture breakage from
convention changes is detectable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .coeffs import TRIVIAL
from .complexes import ChainMap, Complex, check_complex
from .linalg import Matrix
from .obstruction import LiftProblem, classify_lifts, correct_lift, make_lift_problem, \
    obstruction_class
from .oracle import SearchBounds, count_classes, enumerate_lifts
from .rings import LocalRing, Tower, TowerLadder, TowerError, make_tower, parse_ring
from .typedmat import typed_from_matrix

CONVENTIONS_VERSION = "signs-v1"

TASKS = ("check", "lift", "classify", "oracle", "tower", "demo-sod")


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ValidationError(Exception):
    pass


@dataclass
class Scenario:
    task: Optional[str] = None
    tower: Optional[Tower] = None
    ladder: Optional[TowerLadder] = None
    complexes: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    problem_refs: Optional[dict] = None
    a2_params: Optional[dict] = None
    seed: Optional[int] = None
    max_candidates: int = 2 ** 16
    max_iso_candidates: int = 2 ** 10
    time_budget: float = 60.0
    out: Optional[str] = None

    def bounds(self) -> SearchBounds:
        return SearchBounds(self.max_candidates, self.max_iso_candidates,
                            self.time_budget)


def _parse_element(ring: LocalRing, value, line: int):
    if isinstance(value, int):
        return ring.from_int(value)
    if isinstance(value, list):
        if ring.family != "Fp[t]/t^n":
            raise ParseError(line, 0, "coefficient lists need the polynomial family")
        if len(value) > ring.n:
            raise ParseError(line, 0, f"too many coefficients for {ring}")
        coeffs = [c % ring.p for c in value] + [0] * (ring.n - len(value))
        return tuple(coeffs)
    raise ParseError(line, 0, f"cannot read ring element {value!r}")


def _parse_matrix(ring: LocalRing, text: str, line: int, rows: int, cols: int) -> Matrix:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(line, exc.colno, f"bad matrix JSON: {exc.msg}")
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise ParseError(line, 0, "matrix must be a list of rows")
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ParseError(line, 0,
                         f"matrix shape {len(data)}x{len(data[0]) if data else 0} "
                         f"does not match declared {rows}x{cols}")
    return Matrix.from_rows(ring, [
        [_parse_element(ring, v, line) for v in row] for row in data
    ])


def _element_to_json(ring: LocalRing, value):
    return list(value) if isinstance(value, tuple) else value


def matrix_to_json(m: Matrix) -> str:
    return json.dumps([[_element_to_json(m.ring, v) for v in row]
                       for row in m.entries], separators=(",", ":"))


@dataclass
class _PendingComplex:
    name: str
    ring: LocalRing
    lo: int
    ranks: list
    diffs: dict
    line: int


def parse_scenario(text: str, task_override: Optional[str] = None) -> Scenario:
    """Parse and validate a scenario; errors carry line positions."""
    sc = Scenario()
    pending = {}
    pending_maps = {}

    def ring_for_level(level: str, line: int) -> LocalRing:
        if sc.tower is None:
            raise ParseError(line, 0, "complex declared before the tower")
        try:
            return {"top": sc.tower.top, "mid": sc.tower.mid,
                    "base": sc.tower.base}[level]
        except KeyError:
            raise ParseError(line, 0, f"unknown level {level!r}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        head, _, rest = stripped.partition(" ")
        rest = rest.strip()
        if head == "task":
            if rest not in TASKS:
                raise ParseError(lineno, len("task "), f"unknown task {rest!r}")
            sc.task = rest
        elif head == "tower":
            parts = [p.strip() for p in rest.split(";")]
            if len(parts) != 3:
                raise ParseError(lineno, 0, "tower needs three ring descriptors")
            try:
                sc.tower = make_tower(*(parse_ring(p) for p in parts))
            except (TowerError, ValueError) as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
        elif head == "ladder":
            kv = _keyvals(rest, lineno)
            try:
                sc.ladder = TowerLadder(kv["family"], int(kv["p"]), int(kv["depth"]))
            except (TowerError, KeyError, ValueError) as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
        elif head == "complex":
            fields = rest.split()
            if not fields:
                raise ParseError(lineno, 0, "complex needs a name")
            name = fields[0]
            kv = _keyvals(" ".join(fields[1:]), lineno)
            ring = ring_for_level(kv.get("level", "mid"), lineno)
            ranks = [int(r) for r in kv.get("ranks", "").split(",") if r != ""]
            if not ranks:
                ranks = [0]
            pending[name] = _PendingComplex(name, ring, int(kv.get("lo", 0)),
                                            ranks, {}, lineno)
        elif head == "diff":
            fields = rest.split(None, 2)
            if len(fields) != 3:
                raise ParseError(lineno, 0, "diff needs: name degree matrix")
            name, deg_s, mat_s = fields
            if name not in pending:
                raise ParseError(lineno, 0, f"unknown complex {name!r}")
            pc = pending[name]
            deg = int(deg_s)
            k = deg - pc.lo
            if not 0 <= k < len(pc.ranks) - 1:
                raise ValidationError(
                    f"line {lineno}: differential degree {deg} outside support of {name}")
            pc.diffs[deg] = _parse_matrix(pc.ring, mat_s, lineno,
                                          pc.ranks[k + 1], pc.ranks[k])
        elif head == "map":
            fields = rest.split()
            if len(fields) != 4 or fields[2] != "->":
                raise ParseError(lineno, 0, "map needs: name source -> target")
            pending_maps[fields[0]] = {"source": fields[1], "target": fields[3],
                                       "comps": {}, "line": lineno}
        elif head == "comp":
            fields = rest.split(None, 2)
            if len(fields) != 3:
                raise ParseError(lineno, 0, "comp needs: name degree matrix")
            name, deg_s, mat_s = fields
            if name not in pending_maps:
                raise ParseError(lineno, 0, f"unknown map {name!r}")
            pending_maps[name]["comps"][int(deg_s)] = (mat_s, lineno)
        elif head == "problem":
            sc.problem_refs = _keyvals(rest, lineno)
        elif head == "a2":
            sc.a2_params = _keyvals(rest, lineno)
        elif head == "seed":
            sc.seed = int(rest)
        elif head == "max-candidates":
            sc.max_candidates = int(rest)
        elif head == "max-iso-candidates":
            sc.max_iso_candidates = int(rest)
        elif head == "time-budget":
            sc.time_budget = float(rest)
        elif head == "out":
            sc.out = rest
        else:
            raise ParseError(lineno, 0, f"unknown directive {head!r}")

    if task_override is not None:
        if sc.task is not None and sc.task != task_override:
            raise ValidationError(
                f"scenario task {sc.task!r} conflicts with subcommand {task_override!r}")
        sc.task = task_override
    if sc.task is None:
        raise ValidationError("no task given")

    for name, pc in pending.items():
        diffs = []
        for k in range(len(pc.ranks) - 1):
            deg = pc.lo + k
            m = pc.diffs.get(deg)
            if m is None:
                m = Matrix.zero(pc.ring, pc.ranks[k + 1], pc.ranks[k])
            diffs.append(m)
        cx = Complex.from_ranks(pc.ring, pc.lo, pc.ranks, diffs)
        try:
            check_complex(cx)
        except Exception as exc:
            raise ValidationError(f"complex {name!r}: {exc}") from exc
        sc.complexes[name] = cx

    for name, data in pending_maps.items():
        try:
            src = sc.complexes[data["source"]]
            tgt = sc.complexes[data["target"]]
        except KeyError as exc:
            raise ValidationError(f"map {name!r} references unknown complex {exc}")
        comps = {}
        for deg, (mat_s, lineno) in data["comps"].items():
            comps[deg] = typed_from_matrix(_parse_matrix(
                src.ring, mat_s, lineno, tgt.rank(deg), src.rank(deg)))
        cm = ChainMap.from_components(src, tgt, comps)
        if not cm.check():
            raise ValidationError(f"map {name!r} does not commute with differentials")
        sc.maps[name] = cm

    return sc


def _keyvals(text: str, lineno: int) -> dict:
    out = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ParseError(lineno, 0, f"expected key=value, got {token!r}")
        out[key] = value
    return out


def scenario_problem(sc: Scenario) -> LiftProblem:
    if sc.problem_refs is None:
        raise ValidationError("scenario has no problem directive")
    refs = sc.problem_refs
    try:
        F = sc.complexes[refs["F"]]
        G = sc.complexes[refs["G"]]
        s = sc.maps[refs["s"]]
        Gbar = sc.complexes[refs["Gbar"]]
    except KeyError as exc:
        raise ValidationError(f"problem references unknown id {exc}")
    try:
        return make_lift_problem(sc.tower, F, G, s, Gbar)
    except (ValueError, TowerError) as exc:
        raise ValidationError(str(exc)) from exc


# ---------------------------------------------------------------------------
# running scenarios
# ---------------------------------------------------------------------------


def _report_lines(task: str, sc: Scenario):
    lines = [
        "liftcalc-report v1",
        f"conventions = {CONVENTIONS_VERSION}",
        f"task = {task}",
    ]
    if sc.tower is not None:
        lines.append("tower = " + " ; ".join(
            sc.tower.ring_at(k).descriptor() for k in (2, 1, 0)))
    if sc.ladder is not None:
        lines.append(f"ladder = {sc.ladder.family} p={sc.ladder.p} depth={sc.ladder.depth}")
    if sc.seed is not None:
        lines.append(f"seed = {sc.seed}")
    return lines


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return json.dumps(value, separators=(",", ":"))
    if value is None:
        return "unknown"
    return str(value)


def run(sc: Scenario) -> str:
    """Execute a scenario and render its deterministic report."""
    task = sc.task
    lines = _report_lines(task, sc)
    if task in ("check", "lift", "classify"):
        problem = scenario_problem(sc)
        if task == "check":
            oc = obstruction_class(problem, seed=sc.seed)
            lines += [
                f"h_minus1_dim = {problem.h_dim(-1)}",
                f"h0_dim = {problem.h_dim(0)}",
                f"h1_dim = {problem.h_dim(1)}",
                f"class_coordinates = {_fmt(oc.coordinate_list)}",
                f"is_zero = {_fmt(oc.is_zero)}",
            ]
        elif task == "lift":
            oc = obstruction_class(problem, seed=sc.seed)
            lines.append(f"is_zero = {_fmt(oc.is_zero)}")
            if oc.is_zero:
                sol = correct_lift(problem, oc)
                lines.append("lift_found = true")
                for i in range(problem.F.lo, problem.F.hi):
                    from .typedmat import matrix_from_typed

                    lines.append(f"lifted_diff {i} = " +
                                 matrix_to_json(matrix_from_typed(sol.Fbar.diff(i))))
                for i in problem.F.degrees():
                    from .typedmat import matrix_from_typed

                    lines.append(f"lifted_map {i} = " +
                                 matrix_to_json(matrix_from_typed(sol.sbar.comp(i))))
            else:
                lines.append("lift_found = false")
                lines.append(f"class_coordinates = {_fmt(oc.coordinate_list)}")
        else:
            _, report = classify_lifts(problem)
            for key in ("h_minus1_dim", "h0_dim", "h1_dim", "class_coordinates",
                        "is_zero", "lift_found", "lift_class_count",
                        "torsor_certified"):
                lines.append(f"{key} = {_fmt(report[key])}")
    elif task == "oracle":
        problem = scenario_problem(sc)
        enum = enumerate_lifts(problem, sc.bounds())
        cc = count_classes(problem, enum, sc.bounds())
        lines += [
            f"candidates_scanned = {enum.candidates_scanned}",
            f"lifts_found = {len(enum.solutions)}",
            f"classes = {cc.count}",
            # timing is informational; determinism covers all other lines
            f"elapsed = {enum.elapsed + cc.elapsed:.3f}",
        ]
    elif task == "tower":
        lines += _run_tower(sc)
    elif task == "demo-sod":
        lines += _run_demo_sod(sc)
    else:
        raise ValidationError(f"unhandled task {task!r}")
    return "\n".join(lines) + "\n"


def _a2_params(sc: Scenario):
    params = sc.a2_params or {}
    p = int(params.get("p", 2))
    family = params.get("family", "Fp[t]/t^n")
    depth = int(params.get("depth", sc.ladder.depth if sc.ladder else 4))
    return p, family, depth


def _run_tower(sc: Scenario):
    from .applications import build_a2_sod, tower_lift

    p, family, depth = _a2_params(sc)
    ladder = sc.ladder or TowerLadder(family, p, depth)
    triangle = build_a2_sod(ladder.p, ladder.family)
    run_result = tower_lift(triangle, ladder, seed=sc.seed)
    lines = [f"levels = {len(run_result.levels)}"]
    header = "level | h_minus1 | h0 | h1 | class_zero | sod_certified"
    lines.append(header)
    for rec in run_result.levels:
        cert = rec.triangle.certificate
        lines.append(" | ".join(str(x) for x in (
            rec.level, rec.report["h_minus1_dim"], rec.report["h0_dim"],
            rec.report["h1_dim"], _fmt(rec.report["is_zero"]),
            _fmt(cert.direct_ok and cert.fiber_ok),
        )))
    lines.append("unique_at_every_level = " + _fmt(run_result.unique_at_every_level))
    return lines


def _run_demo_sod(sc: Scenario):
    from .applications import build_a2_sod

    p, family, _ = _a2_params(sc)
    triangle = build_a2_sod(p, family)
    cert = triangle.certificate
    lines = [
        f"algebra = {triangle.setup.alg.name}",
        f"base = {triangle.ring.descriptor()}",
        "k2_ranks = " + _fmt([triangle.K2.rank(i) for i in triangle.K2.degrees()]),
        "k1_ranks = " + _fmt([triangle.K1.rank(i) for i in triangle.K1.degrees()]),
        "middle_ranks = " + _fmt([triangle.middle.rank(i)
                                  for i in triangle.middle.degrees()]),
        "composite_null_homotopic = " + _fmt(triangle.null_witness.check()),
        "sod_certified = " + _fmt(cert.direct_ok and cert.fiber_ok),
    ]
    return lines


def parse_report(text: str) -> dict:
    """Read a report back into a dictionary (for round-trip checks)."""
    out = {}
    for line in text.splitlines():
        if " = " in line:
            key, _, value = line.partition(" = ")
            out[key.strip()] = value.strip()
        elif line.startswith("lifted_"):
            key, _, value = line.partition(" = ")
            out[key.strip()] = value.strip()
    return out


def solution_from_report(problem: LiftProblem, report: dict):
    """Rebuild and verify an embedded lift from a report."""
    from .obstruction import LiftSolution
    from .typedmat import typed_from_matrix as tfm

    top = problem.tower.top
    d_comps = []
    for i in range(problem.F.lo, problem.F.hi):
        m = _parse_matrix(top, report[f"lifted_diff {i}"], 0,
                          problem.F.rank(i + 1), problem.F.rank(i))
        d_comps.append(tfm(m))
    s_comps = []
    for i in problem.F.degrees():
        m = _parse_matrix(top, report[f"lifted_map {i}"], 0,
                          problem.G.rank(i), problem.F.rank(i))
        s_comps.append(tfm(m))
    Fbar = Complex(problem.coeffs, top, problem.F.lo, problem.F.types,
                   tuple(d_comps))
    sbar = ChainMap(Fbar, problem.Gbar, 0, tuple(s_comps))
    return LiftSolution(problem, Fbar, sbar).verify()
