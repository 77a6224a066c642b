"""Verification suites built on the other modules.

Each check returns a :class:`CheckReport` holding pass counts, failures with
their inputs, and skipped instances with a machine-readable reason.  Values
are computed at a diagram order ``K = k + margin`` and certified exact only
when every contributing broken line stays below y-degree ``k``.
"""

from __future__ import annotations

import functools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

from .broken_lines import ThetaFunction, as_exponent, enumerate_broken_lines, theta_expansion
from .lattice_core import DEFAULT_EPS1, DEFAULT_EPS2, PerturbedPoint, dual_pair
from .scattering import LINE, ChamberError, ScatteringDiagram, chamber_point
from .seed_data import (
    LambdaAbsent,
    LinearMorphism,
    SeedDatum,
    chiral_dual,
    chiral_langlands_dual,
    has_positive_chamber,
    is_integral,
    lambda_find,
    langlands_dual,
    matvec,
    negate_q,
    seed_diagram,
    transpose,
)
from .series_ring import ExponentPair, Specialization, TruncatedSeries, specialize
from .tropical import (
    EXACT,
    INFINITE,
    ValuationResult,
    check_taut,
    covector_levels,
    pair_levels,
    perturbed_covector,
    rational_rays,
    taut_trace,
    val_theta,
)

DEFAULT_BOX = 3
DEFAULT_ORDER = 6
DEFAULT_MARGIN = 4


def _jsonable(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, ExponentPair):
        return {"m": [_jsonable(a) for a in x.m], "q": [_jsonable(a) for a in x.q]}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(a) for a in x]
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    return str(x)


@dataclass
class CheckReport:
    name: str
    params: dict = field(default_factory=dict)
    instances: int = 0
    passes: int = 0
    failures: list = field(default_factory=list)  # (inputs, expected, got)
    skipped: list = field(default_factory=list)  # (inputs, reason)
    children: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and all(c.ok for c in self.children)

    def record(self, inputs, expected, got) -> bool:
        self.instances += 1
        if expected == got:
            self.passes += 1
            return True
        self.failures.append((inputs, expected, got))
        return False

    def skip(self, inputs, reason: str) -> None:
        self.instances += 1
        self.skipped.append((inputs, reason))

    def skip_reasons(self) -> dict:
        out: dict = {}
        for _, r in self.skipped:
            out[r] = out.get(r, 0) + 1
        return dict(sorted(out.items()))

    def summary(self) -> str:
        state = "PASS" if self.ok else "FAIL"
        line = (f"{state} {self.name}: {self.passes}/{self.instances} passed, "
                f"{len(self.failures)} failed, {len(self.skipped)} skipped")
        for c in self.children:
            line += "\n  " + c.summary().replace("\n", "\n  ")
        return line

    def to_json(self) -> dict:
        return {"name": self.name, "params": _jsonable(self.params), "instances": self.instances,
                "passes": self.passes,
                "failures": [{"inputs": _jsonable(i), "expected": _jsonable(e), "got": _jsonable(g)}
                             for i, e, g in self.failures],
                "skipped": [{"inputs": _jsonable(i), "reason": r} for i, r in self.skipped],
                "children": [c.to_json() for c in self.children]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# --- theta sources -----------------------------------------------------------------------


@dataclass(frozen=True)
class Side:
    """Theta functions of one seed at one chamber, computed at ``order`` and certified at ``cert``."""

    seed: SeedDatum
    order: int
    cert: int
    chamber: int = 1
    offsets: tuple | None = None
    eps: tuple = (DEFAULT_EPS1, DEFAULT_EPS2)


def box_points(box) -> list:
    """Nonzero lattice points of ``[-b, b]^2`` (int) or ``[lo, hi]^2`` (pair)."""
    lo, hi = (-box, box) if isinstance(box, int) else tuple(box)
    if lo > hi:
        raise ValueError(f"empty box {box}")
    return [(a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1) if (a, b) != (0, 0)]


@functools.lru_cache(maxsize=32)
def side_setup(side: Side) -> tuple:
    """``(diagram, basepoint)`` for a side; translation is used when C^+ is empty."""
    offsets = side.offsets
    if offsets is None and side.seed.r and not has_positive_chamber(side.seed):
        offsets = tuple(range(1, side.seed.r + 1))
    d = seed_diagram(side.seed, side.order, offsets)
    if offsets is not None:
        if side.chamber != 1:
            raise ChamberError("translated diagrams only provide the positive chamber")
        return d, PerturbedPoint((0, 0), *side.eps)
    return d, chamber_point(d, side.chamber, *side.eps)


@functools.lru_cache(maxsize=4096)
def side_lines(side: Side, u: ExponentPair) -> tuple:
    d, p = side_setup(side)
    return tuple(enumerate_broken_lines(d, u, p))


def side_val(side: Side, u, v) -> ValuationResult:
    """``val_v(Theta_u)``; rational ``u`` goes through ``(1/kappa) val_v(theta_{kappa u})``."""
    d, p = side_setup(side)
    if isinstance(u, ExponentPair):
        return val_theta(d, u, v, p, side.cert, side_lines(side, u))
    u = tuple(Fraction(x) for x in u)
    kappa = 1
    for x in u:
        kappa = kappa * x.denominator // _gcd(kappa, x.denominator)
    ui = as_exponent(tuple(int(x * kappa) for x in u), d.r)
    r = val_theta(d, ui, v, p, side.cert, side_lines(side, ui))
    if kappa == 1 or r.value is None:
        return r
    return ValuationResult(_clean(Fraction(r.value) / kappa), r.certified, r.order, r.witness)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _clean(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _row(args):
    side, u, vs, keep = args
    out = []
    for v in vs:
        r = side_val(side, u, v)
        out.append(r if keep else ValuationResult(r.value, r.certified, r.order))
    return out


def val_table(side: Side, us: Sequence, vs: Sequence, workers: int = 1) -> dict:
    """``{(u, v): val_v(Theta_u)}``; rows run in worker processes when ``workers > 1``."""
    jobs = [(side, tuple(u), tuple(vs), workers <= 1) for u in us]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row, jobs))
    else:
        rows = [_row(j) for j in jobs]
    out = {}
    for u, row in zip(us, rows):
        for v, r in zip(vs, row):
            out[(tuple(u), tuple(v))] = r
    return out


def _skip_reason(tag: str, r: ValuationResult) -> str:
    if r.certified == INFINITE:
        return f"{tag}:non-finite"
    return f"{tag}:{r.certified}"


def _compare(rep: CheckReport, inputs: dict, a: ValuationResult, b: ValuationResult,
             tags=("lhs", "rhs")) -> None:
    if not a.finite:
        rep.skip(inputs, _skip_reason(tags[0], a))
    elif not b.finite:
        rep.skip(inputs, _skip_reason(tags[1], b))
    else:
        rep.record(inputs, a.value, b.value)


# --- valuative independence ----------------------------------------------------------------


def stable_theta(d: ScatteringDiagram, u, p: PerturbedPoint, k: int) -> ThetaFunction | None:
    """``theta_{u,p}`` if every broken line stays below y-degree ``k`` (then it is exact)."""
    u = as_exponent(u, d.r)
    lines = enumerate_broken_lines(d, u, p)
    if any(bl.final.degree >= k for bl in lines):
        return None
    acc: dict = {}
    for bl in lines:
        acc[bl.final.key] = acc.get(bl.final.key, 0) + bl.coefficient
    series = TruncatedSeries(acc, d.order, 2, d.r)
    return ThetaFunction(series, u, p, True, list(lines))


def _series_val(f: TruncatedSeries, v):
    v = tuple(Fraction(x) for x in v)
    best = None
    for u, _ in f.items():
        val = dual_pair(u.m, v[:2]) + dual_pair(u.q, v[2:]) if len(v) > 2 else dual_pair(u.m, v)
        if best is None or val < best:
            best = val
    return None if best is None else _clean(best)


def vit_check(d: ScatteringDiagram, coeffs: dict, v, p: PerturbedPoint, k: int = DEFAULT_ORDER,
              report: CheckReport | None = None) -> CheckReport:
    """``val_v(sum c_u theta_u) = min_{c_u != 0} val_v(theta_u)`` on certified-finite instances.

    ``v`` is one covector or a list of them.  The left side is read off the
    combined series, the right side from the broken-line minima.
    """
    vs = [v] if v and not isinstance(v[0], (tuple, list)) else list(v)
    coeffs = {as_exponent(u, d.r): c for u, c in coeffs.items() if c}
    rep = report or CheckReport("vit", {"order": k, "diagram_order": d.order})
    thetas = {}
    for u in coeffs:
        thetas[u] = stable_theta(d, u, p, k)
    inputs_base = {"coeffs": {f"{tuple(u.m)}|{tuple(u.q)}": c for u, c in sorted(coeffs.items())}}
    if not coeffs:
        return rep
    missing = [u for u, th in thetas.items() if th is None]
    for vv in vs:
        inputs = dict(inputs_base, v=tuple(vv))
        if missing:
            rep.skip(inputs, "uncertified")
            continue
        rhs = None
        for u in coeffs:
            r = val_theta(d, u, vv, p, k, thetas[u].lines)
            if rhs is None or r.value < rhs:
                rhs = r.value
        total = None
        for u, c in coeffs.items():
            term = thetas[u].series.scale(c)
            total = term if total is None else total + term
        lhs = _series_val(total, vv)
        rep.record(inputs, rhs, lhs)
    return rep


def random_vit_suite(s: SeedDatum, n_combos: int = 50, n_covectors: int = 24, k: int = DEFAULT_ORDER,
                     margin: int = DEFAULT_MARGIN, box: int = 2, max_terms: int = 4,
                     rng_seed: int = 0, eps=None) -> CheckReport:
    """Random integer combinations (coefficients in [-3, 3]) of up to ``max_terms`` thetas."""
    rng = random.Random(rng_seed)
    side = Side(s, k + margin, k, 1, None, _eps(eps))
    d, p = side_setup(side)
    pts = box_points(box)
    covs = [tuple(Fraction(x) * Fraction(1 + i % 3, 2) for x in ray)
            for i, ray in enumerate(rational_rays(n_covectors))]
    rep = CheckReport("vit-random", {"combos": n_combos, "covectors": n_covectors, "order": k,
                                     "diagram_order": d.order, "rng_seed": rng_seed})
    for _ in range(n_combos):
        t = rng.randint(1, max_terms)
        us = rng.sample(pts, t)
        coeffs = {}
        for u in us:
            c = 0
            while c == 0:
                c = rng.randint(-3, 3)
            coeffs[u] = c
        vit_check(d, coeffs, covs, p, k, report=rep)
    return rep


# --- theta reciprocity ------------------------------------------------------------------------


VARIANTS = ("chiral", "chiral_langlands", "langlands")


def _integral_D_Bbullet(s: SeedDatum) -> bool:
    return all(Fraction(x).denominator == 1 for x in s.D) and is_integral(s.Bbullet)


def _eps(eps) -> tuple:
    if eps is None:
        return (DEFAULT_EPS1, DEFAULT_EPS2)
    return (tuple(eps[0]), tuple(eps[1]))


def dual_side(s: SeedDatum, variant: str, K: int, k: int, eps=None) -> Side:
    eps = _eps(eps)
    if variant == "chiral":
        return Side(chiral_dual(s), K, k, 1, None, eps)
    if variant not in VARIANTS:
        raise ValueError(f"unknown reciprocity variant {variant!r}")
    if not _integral_D_Bbullet(s):
        raise ValueError(f"the {variant} form needs integral D and Bbullet")
    if variant == "chiral_langlands":
        return Side(chiral_langlands_dual(s), K, k, 1, None, eps)
    return Side(langlands_dual(s), K, k, -1, None, eps)


def reciprocity_check(s: SeedDatum, box=DEFAULT_BOX, k: int = DEFAULT_ORDER, variant: str = "chiral",
                      margin: int = DEFAULT_MARGIN, lambda_form: bool = True,
                      workers: int = 1, eps=None) -> CheckReport:
    """``val_n(Theta_{m,+}) = val_m(Theta^dual_{n,+-})`` for ``m, n`` in the box.

    With ``lambda_form`` the single-seed version through a Lambda-structure is
    attached as a child report.
    """
    K = k + margin
    left = Side(s, K, k, 1, None, _eps(eps))
    right = dual_side(s, variant, K, k, eps)
    pts = box_points(box)
    L = val_table(left, pts, pts, workers)
    R = val_table(right, pts, pts, workers)
    rep = CheckReport(f"reciprocity-{variant}", {"box": box, "order": k, "diagram_order": K,
                                                 "variant": variant})
    for m in pts:
        for n in pts:
            _compare(rep, {"m": m, "n": n}, L[(m, n)], R[(n, m)], ("seed", "dual"))
    if lambda_form:
        rep.children.append(lambda_reciprocity_check(s, box, k, margin, workers, eps))
    return rep


def lambda_reciprocity_check(s: SeedDatum, box=DEFAULT_BOX, k: int = DEFAULT_ORDER,
                             margin: int = DEFAULT_MARGIN, workers: int = 1, eps=None) -> CheckReport:
    """``val_{L m1}(Theta_{m2,+}) = val_{L^T m2}(Theta_{m1,-})`` on one seed.

    The negative-chamber side is computed as the positive chamber of ``(P, -Q)``.
    """
    K = k + margin
    rep = CheckReport("reciprocity-lambda", {"box": box, "order": k, "diagram_order": K})
    lam = lambda_find(s)
    if isinstance(lam, LambdaAbsent):
        rep.skip({"witness": lam.witness}, "no-lambda-structure")
        return rep
    rep.params["lambda"] = [[_clean(x) for x in row] for row in lam.L]
    Lt = transpose(lam.L)
    pts = box_points(box)
    img = {m: tuple(_clean(x) for x in matvec(lam.L, m)) for m in pts}
    imgT = {m: tuple(_clean(x) for x in matvec(Lt, m)) for m in pts}
    plus = Side(s, K, k, 1, None, _eps(eps))
    minus = Side(negate_q(s), K, k, 1, None, _eps(eps))
    A = val_table(plus, pts, sorted(set(img.values())), workers)
    B = val_table(minus, pts, sorted(set(imgT.values())), workers)
    for m1 in pts:
        for m2 in pts:
            _compare(rep, {"m1": m1, "m2": m2}, A[(m2, img[m1])], B[(m1, imgT[m2])], ("plus", "minus"))
    return rep


def tautness_check(side: Side, us: Iterable, vs: Iterable) -> CheckReport:
    """Minimizing lines are taut, and the taut trace from the minimizing exponent recovers them.

    Covectors are perturbed to be generic, so the minimizing final exponent
    is unique; the trace runs backwards from it without the enumeration.
    """
    d, p = side_setup(side)
    d_ref = seed_diagram(side.seed, side.order + 2) if side.offsets is None else None
    rep = CheckReport("tautness", {"order": side.cert, "diagram_order": side.order})
    for u in us:
        u = as_exponent(u, d.r)
        lines = side_lines(side, u)
        for v in vs:
            V = perturbed_covector(v)
            inputs = {"u": tuple(u.m), "v": tuple(v)}
            r = val_theta(d, u, V, p, side.cert, lines)
            if not r.finite:
                rep.skip(inputs, _skip_reason("theta", r))
                continue
            line = r.witness
            cert = check_taut(line, V, d.r, d_ref)
            if cert.inconclusive:
                rep.skip(inputs, "taut-inconclusive")
                continue
            if not rep.record(dict(inputs, part="taut"), True, cert.ok):
                continue
            Vl = covector_levels(V, 2 + d.r)
            best = pair_levels(line.final, Vl)
            minima = {bl.final for bl in lines if pair_levels(bl.final, Vl) == best}
            tr = taut_trace(d, V, p, line.final, d_ref)
            same = (bool(tr) and len(minima) == 1 and tr.line.initial == u
                    and [(e.wall_index, e.multiple) for e in tr.line.bends]
                    == [(e.wall_index, e.multiple) for e in line.bends])
            rep.record(dict(inputs, part="trace"), True, same)
    return rep


# --- extension ---------------------------------------------------------------------------


def _embed(f: TruncatedSeries, r2: int, d_order: int, columns: Sequence[int]) -> TruncatedSeries:
    terms = {}
    for u, c in f.items():
        q = [0] * r2
        for i, j in enumerate(columns):
            q[j] = u.q[i]
        terms[u.m + tuple(q)] = c
    return TruncatedSeries(terms, d_order, 2, r2)


def extension_check(s1: SeedDatum, s2: SeedDatum, indices: Sequence, p: PerturbedPoint | None = None,
                    k: int = DEFAULT_ORDER, margin: int = DEFAULT_MARGIN,
                    columns: Sequence[int] | None = None, offsets: Sequence | None = None) -> CheckReport:
    """Thetas of ``s1`` stay theta functions of the extension ``s2``, termwise.

    The statement only applies when the ``s1`` theta is a finite combination
    of ``s2`` thetas; instances whose expansion reaches y-degree ``k`` are
    skipped.  ``columns`` says where the columns of ``s1`` sit inside ``s2`` (default:
    the first ones).  Each theta of ``s1`` is expanded in the ``s2`` theta
    basis; a single coefficient 1 at the same index means it is unchanged.
    When ``s2`` has no positive chamber both diagrams are built with the
    initial walls translated by ``offsets`` (default ``1, 2, ...``), the
    walls of ``s1`` keeping the offsets of their columns, and the basepoint
    sits next to the origin.
    """
    if columns is None:
        columns = list(range(s1.r))
    for i, j in enumerate(columns):
        if tuple(r[i] for r in s1.P) != tuple(r[j] for r in s2.P) or \
                tuple(r[i] for r in s1.Qbullet) != tuple(r[j] for r in s2.Qbullet):
            raise ValueError(f"column {i} of the first seed is not column {j} of the extension")
    if offsets is None and s2.r and not has_positive_chamber(s2):
        offsets = tuple(range(1, s2.r + 1))
    off1 = None if offsets is None else tuple(offsets[j] for j in columns)
    K = k + margin
    d1 = seed_diagram(s1, K, off1)
    d2 = seed_diagram(s2, K, offsets)
    if p is None:
        p = chamber_point(d2, 1)
    rep = CheckReport("extension", {"order": k, "diagram_order": K, "columns": list(columns),
                                    "offsets": None if offsets is None else list(offsets)})
    for m in indices:
        inputs = {"m": tuple(m)}
        t1 = stable_theta(d1, m, p, k)
        t2 = stable_theta(d2, m, p, k)
        if t1 is None or t2 is None:
            rep.skip(inputs, "uncertified")
            continue
        f1 = _embed(t1.series, s2.r, K, columns)
        expansion = theta_expansion(f1, d2, p, max_degree=k)
        if expansion is None:
            # terms reach the certification order: not known to be a finite combination
            rep.skip(inputs, "expansion-not-finite")
            continue
        u2 = as_exponent(m, s2.r)
        rep.record(dict(inputs, part="expansion"), {u2: 1}, expansion)
        rep.record(dict(inputs, part="termwise"), f1.truncate(k).terms, t2.series.truncate(k).terms)
    return rep


# --- Newton polytopes --------------------------------------------------------------------------


def _rank(rows) -> int:
    if not rows:
        return 0
    return sympy.Matrix(rows).rank()


def _hull2(points: list) -> list:
    """Vertices of the convex hull of 2D points (collinear boundary points excluded)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return lower[:-1] + upper[:-1]


def _in_hull_lp(x, others) -> bool:
    from scipy.optimize import linprog

    n = len(others)
    A_eq = [[float(o[i]) for o in others] for i in range(len(x))] + [[1.0] * n]
    b_eq = [float(c) for c in x] + [1.0]
    res = linprog([0.0] * n, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    return res.status == 0


def newton_vertices(points: Sequence) -> list:
    """Vertices of the convex hull of integer points in any dimension.

    Hulls of affine dimension at most 2 are computed exactly in a coordinate
    plane on which they project injectively; larger ones fall back to a
    linear-programming membership test per point.
    """
    pts = sorted(set(tuple(x) for x in points))
    if len(pts) <= 2:
        return pts
    o = pts[0]
    diffs = [tuple(a - b for a, b in zip(x, o)) for x in pts[1:]]
    dim = _rank(diffs)
    if dim == 1:
        key = next(i for i in range(len(o)) if any(dv[i] for dv in diffs))
        return sorted({min(pts, key=lambda x: x[key]), max(pts, key=lambda x: x[key])})
    if dim == 2:
        n = len(o)
        for i in range(n):
            for j in range(i + 1, n):
                if _rank([(dv[i], dv[j]) for dv in diffs]) == 2:
                    proj = {(x[i], x[j]): x for x in pts}
                    return sorted(proj[v] for v in _hull2(list(proj)))
    return [x for x in pts if not _in_hull_lp(x, [y for y in pts if y != x])]


def newton_monic_check(theta: ThetaFunction, report: CheckReport | None = None) -> CheckReport:
    """Coefficient 1 at every vertex of the Newton polytope of a stabilized theta function."""
    if not theta.stabilized:
        raise ValueError("newton_monic_check needs a stabilized theta function")
    rep = report or CheckReport("newton", {})
    terms = theta.series.terms
    for v in newton_vertices(list(terms)):
        rep.record({"index": theta.index, "vertex": v}, 1, terms[v])
    return rep


# --- specialization ------------------------------------------------------------------------------


def _laurent_val(f: dict, v) -> object:
    best = None
    for m, c in f.items():
        if c:
            x = dual_pair(m, v)
            if best is None or x < best:
                best = x
    return None if best is None else _clean(best)


def specialization_independence_check(thetas: Sequence[ThetaFunction], nu: Specialization, v_grid,
                                      trials: int = 20, rng_seed: int = 0) -> CheckReport:
    """Tropicalizations survive ``nu``, and the specialized thetas stay (valuatively) independent."""
    for th in thetas:
        if not th.stabilized:
            raise ValueError("specialization checks need stabilized theta functions")
    rep = CheckReport("specialization", {"images": [list(x) for x in nu.images], "grid": len(v_grid)})
    special = [specialize(th.series, nu) for th in thetas]
    for th, sp in zip(thetas, special):
        for v in v_grid:
            v = tuple(Fraction(x) for x in v)
            s = tuple(dual_pair(mi, v) for _, mi in nu.images)
            before = _series_val(th.series, v + s)
            rep.record({"index": th.index, "v": v, "part": "trop"}, before, _laurent_val(sp, v))
    support = sorted({m for sp in special for m in sp})
    M = sympy.Matrix([[sympy.Rational(Fraction(sp.get(m, 0)).numerator, Fraction(sp.get(m, 0)).denominator)
                       for m in support] for sp in special]) if support else sympy.zeros(len(special), 0)
    rank = M.rank() if support else 0
    rep.record({"part": "rank", "count": len(special)}, len(special), rank)
    rng = random.Random(rng_seed)
    for _ in range(trials):
        coeffs = [rng.randint(-3, 3) for _ in special]
        if not any(coeffs):
            continue
        total: dict = {}
        for c, sp in zip(coeffs, special):
            for m, a in sp.items():
                total[m] = total.get(m, 0) + c * a
        for v in v_grid:
            v = tuple(Fraction(x) for x in v)
            rhs = min(_laurent_val(sp, v) for c, sp in zip(coeffs, special) if c)
            rep.record({"coeffs": coeffs, "v": v, "part": "vit"}, rhs, _laurent_val(total, v))
    return rep


# --- adjunction --------------------------------------------------------------------------------


def adjunction_check(phi: LinearMorphism, m_list: Sequence, n_list: Sequence, k: int = DEFAULT_ORDER,
                     margin: int = DEFAULT_MARGIN, eps=None) -> CheckReport:
    """``val_n(Theta^target_{A m,+}) = val_{A^T n}(Theta^source_{m,+})``."""
    K = k + margin
    src = Side(phi.source, K, k, 1, None, _eps(eps))
    tgt = Side(phi.target, K, k, 1, None, _eps(eps))
    At = transpose(phi.A, phi.source.d)
    rep = CheckReport("adjunction", {"A": [list(r) for r in phi.A], "order": k, "diagram_order": K})
    for m in m_list:
        Am = tuple(_clean(x) for x in matvec(phi.A, m))
        for n in n_list:
            Atn = tuple(_clean(x) for x in matvec(At, n))
            inputs = {"m": tuple(m), "n": tuple(n)}
            if not any(Am):
                a = ValuationResult(0, EXACT, K)
            else:
                a = side_val(tgt, Am, n)
            b = side_val(src, tuple(m), Atn) if any(m) else ValuationResult(0, EXACT, K)
            _compare(rep, inputs, a, b, ("target", "source"))
    return rep


# --- superlevel sets ------------------------------------------------------------------------------


@dataclass
class SuperlevelSet:
    points: list
    skipped: list  # (point, reason)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def superlevel_points(W_indices: Sequence, r, box, d: ScatteringDiagram, p: PerturbedPoint,
                      k: int = DEFAULT_ORDER) -> SuperlevelSet:
    """Lattice ``m`` in the box with ``min_i val_m(theta_{W_i}) >= r``."""
    r = Fraction(r)
    lo, hi = (-box, box) if isinstance(box, int) else tuple(box)
    us = [as_exponent(u, d.r) for u in W_indices]
    lines = {u: enumerate_broken_lines(d, u, p) for u in us}
    pts, skipped = [], []
    for a in range(lo, hi + 1):
        for b in range(lo, hi + 1):
            m = (a, b)
            vals = [val_theta(d, u, m, p, k, lines[u]) for u in us]
            bad = [v for v in vals if not v.finite]
            if bad:
                skipped.append((m, _skip_reason("theta", bad[0])))
                continue
            if not vals or min(v.value for v in vals) >= r:
                pts.append(m)
    return SuperlevelSet(pts, skipped)


# --- rendering --------------------------------------------------------------------------------------


def _clip_halfplane(poly, n, c):
    """Keep ``x . n >= c`` of a convex polygon (exact)."""
    out = []
    for i, a in enumerate(poly):
        b = poly[(i + 1) % len(poly)]
        fa = a[0] * n[0] + a[1] * n[1] - c
        fb = b[0] * n[0] + b[1] * n[1] - c
        if fa >= 0:
            out.append(a)
        if (fa > 0 > fb) or (fa < 0 < fb):
            t = fa / (fa - fb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out


def _seg_in_box(base, direction, ray: bool, box):
    """Clip ``base + t*direction`` (``t >= 0`` for rays) to the box; None if outside."""
    x0, x1, y0, y1 = box
    lo, hi = (Fraction(0) if ray else None), None
    for c, dv, a, b in ((base[0], direction[0], x0, x1), (base[1], direction[1], y0, y1)):
        if dv == 0:
            if not a <= c <= b:
                return None
            continue
        t1, t2 = Fraction(a - c) / dv, Fraction(b - c) / dv
        t1, t2 = min(t1, t2), max(t1, t2)
        lo = t1 if lo is None else max(lo, t1)
        hi = t2 if hi is None else min(hi, t2)
    if lo is None or hi is None or lo > hi:
        return None
    return ((base[0] + lo * direction[0], base[1] + lo * direction[1]),
            (base[0] + hi * direction[0], base[1] + hi * direction[1]))


def render_svg(d: ScatteringDiagram, lines: Sequence = (), viewport=(-5, 5, -5, 5), shade=None,
               size: int = 400) -> str:
    """Deterministic SVG: axes, walls with their function exponents, broken lines.

    ``shade`` is ``+1`` or ``-1`` to fill the chamber on that side of every wall.
    """
    x0, x1, y0, y1 = (Fraction(v) for v in viewport)
    sx = Fraction(size) / (x1 - x0)
    sy = Fraction(size) / (y1 - y0)

    def X(pt):
        return f"{float((Fraction(pt[0]) - x0) * sx):.3f}"

    def Y(pt):
        return f"{float((y1 - Fraction(pt[1])) * sy):.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']
    if shade in (1, -1):
        poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        for w in d.walls:
            n = tuple(shade * c for c in w.normal)
            poly = _clip_halfplane(poly, n, dual_pair(w.support.base, n))
            if not poly:
                break
        if poly:
            pts = " ".join(f"{X(q)},{Y(q)}" for q in poly)
            color = "#b8e6b8" if shade == 1 else "#f3c4c4"
            out.append(f'<polygon points="{pts}" fill="{color}" stroke="none"/>')
    box = (x0, x1, y0, y1)
    for seg in (((0, 0), (1, 0)), ((0, 0), (0, 1))):
        c = _seg_in_box(seg[0], seg[1], False, box)
        if c:
            out.append(f'<line x1="{X(c[0])}" y1="{Y(c[0])}" x2="{X(c[1])}" y2="{Y(c[1])}" '
                       f'stroke="#999999" stroke-width="0.5" stroke-dasharray="4,3"/>')
    walls = sorted(d.walls, key=lambda w: (w.support.kind, tuple(Fraction(x) for x in w.support.base),
                                           w.support.direction, w.normal, w.function.base))
    for w in walls:
        sup = w.support
        c = _seg_in_box(sup.base, sup.direction, sup.kind != LINE, box)
        if c is None:
            continue
        out.append(f'<line x1="{X(c[0])}" y1="{Y(c[0])}" x2="{X(c[1])}" y2="{Y(c[1])}" '
                   f'stroke="#1f4fbf" stroke-width="1.5"/>')
        b = w.function.base
        label = f"{b.m}|{b.q}".replace(" ", "")
        out.append(f'<text x="{X(c[1])}" y="{Y(c[1])}" font-size="9" fill="#1f4fbf">{label}</text>')
    for bl in lines:
        segs = bl.segments()
        if not segs:
            continue
        first_end = segs[0][2].base
        far = tuple(Fraction(a) + 2 * (x1 - x0) * b for a, b in zip(first_end, bl.initial.m))
        pts = [far] + [s[2].base for s in segs]
        path = " ".join(f"{X(q)},{Y(q)}" for q in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="#c03030" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
