"""Broken lines, theta functions, transport and structure constants.

A broken line for ``u`` ending at ``p`` comes in from infinity along the
direction ``-u_M`` carrying ``x^{u_M} y^{u_Q}``; each time it crosses a wall it
may pick up a term of the wall-crossing expansion.  Enumeration runs
backwards from ``p``: walking back along ``+m`` from a point, the first wall
met is crossed, and every predecessor monomial ``u' - i*w`` whose expansion
contains the current one is tried in turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import kernels

from .lattice_core import (
    DEFAULT_EPS1,
    DEFAULT_EPS2,
    DomainError,
    GenericityError,
    PerturbedPoint,
    dual_pair,
)
from .scattering import RAY, PlanarPath, ScatteringDiagram, path_ordered_product
from .series_ring import ExponentPair, TruncatedSeries


class EnumerationError(RuntimeError):
    """The search exceeded its safety cap; indicates a geometry bug."""


@dataclass(frozen=True)
class BendEvent:
    wall_index: int
    point: PerturbedPoint
    multiple: int
    in_monomial: tuple  # (coefficient, ExponentPair)
    out_monomial: tuple
    exponent: int  # the power |m . n| of the wall function expanded here
    wall: object = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {"wall": self.wall_index, "point": self.point.to_json(), "multiple": self.multiple,
                "exponent": self.exponent,
                "in": _mono_json(self.in_monomial), "out": _mono_json(self.out_monomial)}


def _mono_json(mono) -> dict:
    c, u = mono
    return {"c": c if isinstance(c, int) else str(c), "m": list(u.m), "q": list(u.q)}


@dataclass(frozen=True)
class BrokenLine:
    initial: ExponentPair
    endpoint: PerturbedPoint
    events: tuple  # crossings from the first bend on, forward order; multiple 0 means no bend
    coefficient: object
    final: ExponentPair

    @property
    def bends(self) -> tuple:
        return tuple(e for e in self.events if e.multiple)

    def monomials(self) -> list:
        """``(c, u)`` carried on each segment, first (unbounded) segment first."""
        out = [(1, self.initial)]
        for e in self.events:
            if e.multiple:
                out.append(e.out_monomial)
        return out

    def segments(self) -> list:
        """``(c, u, end_point)`` per segment; segments are split only at bends."""
        out = []
        cur = (1, self.initial)
        for e in self.events:
            if e.multiple:
                out.append((cur[0], cur[1], e.point))
                cur = e.out_monomial
        out.append((cur[0], cur[1], self.endpoint))
        return out

    def scaled(self, k: int) -> "BrokenLine":
        """The line for ``k*u`` with the same support (bend multiples scale by k).

        Only the exponents are scaled; the coefficient is not recomputed.
        """
        evs = tuple(BendEvent(e.wall_index, e.point, k * e.multiple,
                              (None, e.in_monomial[1].scaled(k)), (None, e.out_monomial[1].scaled(k)),
                              k * e.exponent, e.wall) for e in self.events)
        return BrokenLine(self.initial.scaled(k), self.endpoint, evs, None, self.final.scaled(k))

    def to_json(self) -> dict:
        return {"initial": {"m": list(self.initial.m), "q": list(self.initial.q)},
                "endpoint": self.endpoint.to_json(),
                "events": [e.to_json() for e in self.events],
                "final": _mono_json((self.coefficient, self.final))}


@dataclass
class ThetaFunction:
    series: TruncatedSeries
    index: ExponentPair
    basepoint: PerturbedPoint
    stabilized: bool = False
    lines: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return self.series.order

    def exponents(self) -> list:
        return self.series.exponents()

    def to_json(self) -> dict:
        return {"index": {"m": list(self.index.m), "q": list(self.index.q)},
                "basepoint": self.basepoint.to_json(), "order": self.order,
                "stabilized": self.stabilized, "series": self.series.to_json()}


def as_exponent(u, r: int) -> ExponentPair:
    if isinstance(u, ExponentPair):
        return u
    if len(u) == 2 and isinstance(u[0], (tuple, list)):
        return ExponentPair.make(u[0], u[1])
    return ExponentPair.make(u, (0,) * r)


def _diagram_at(d: ScatteringDiagram, k: int | None) -> ScatteringDiagram:
    if k is None or k == d.order:
        return d
    if k > d.order:
        raise ValueError(f"diagram is only known to order {d.order}, asked for {k}")
    return d.truncate(k)


def _final_candidates(u: ExponentPair, gens: list, k: int) -> list:
    """``u`` plus nonnegative combinations of ``gens`` with y-degree below ``k``."""
    seen = {u}
    frontier = [u]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a + g
                if b.degree < k and b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return sorted(seen, key=lambda e: (e.q, e.m))


def enumerate_broken_lines(d: ScatteringDiagram, u, p: PerturbedPoint, k: int | None = None,
                           max_crossings: int | None = None) -> list:
    """All broken lines with ends ``(u, p)`` whose final monomial survives mod I^k."""
    d = _diagram_at(d, k)
    k = d.order
    u = as_exponent(u, d.r)
    if u.degree >= k:
        return []
    walls = list(d.walls)  # event indices refer to d.walls
    for w in walls:
        if w.side(p) == 0:
            raise GenericityError(f"basepoint lies on wall {w!r}")
    if all(x == 0 for x in u.m):
        return [BrokenLine(u, p, (), 1, u)]
    if max_crossings is None:
        max_crossings = 4 * (len(walls) + 1) * (k + 1) + 16
    gens = []
    for w in walls:
        if not w.function.is_trivial() and w.function.base not in gens:
            gens.append(w.function.base)
    found = []
    cands = _final_candidates(u, gens, k)
    reachable = set(cands)
    ctx = (reachable, {}, _wall_table(walls))
    p_int = _int_point(p)
    for fin in cands:
        if all(x == 0 for x in fin.m):
            continue
        _search(walls, u, p, fin, 1, [], None, found, max_crossings, p_int, ctx)
    found.sort(key=lambda bl: (bl.final.q, bl.final.m, [(e.wall_index, e.multiple) for e in bl.events]))
    return found


def _wall_table(walls) -> list:
    """Integer rows for the crossing kernel."""
    rows = []
    for w in walls:
        n = w.normal
        sup = w.support
        c = Fraction(dual_pair(sup.base, n))
        dd = sup.direction
        bdir = Fraction(dual_pair(sup.base, dd))
        rows.append((n[0], n[1], c.numerator, c.denominator, sup.kind == RAY,
                     dd[0], dd[1], bdir.numerator, bdir.denominator))
    return rows


def _int_point(pt: PerturbedPoint) -> tuple:
    """``(numerators, den)`` with the six level coordinates over one denominator."""
    vals = [Fraction(x) for lv in pt.levels for x in lv]
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return tuple(int(v * den) for v in vals), den


def _int_move(P, den, T, Q, D):
    """The point ``P/den + (T/Q) * D`` in lowest terms."""
    out = []
    for lv in range(3):
        out.append(P[2 * lv] * Q + T[lv] * D[0] * den)
        out.append(P[2 * lv + 1] * Q + T[lv] * D[1] * den)
    den = den * Q
    g = den
    for x in out:
        g = math.gcd(g, x)
    return tuple(x // g for x in out), den // g


def _to_point(P, den) -> PerturbedPoint:
    f = [Fraction(x, den) for x in P]
    return PerturbedPoint((f[0], f[1]), (f[2], f[3]), (f[4], f[5]))


_DEGENERATE = {1: "runs along wall", 2: "passes through a joint at wall", 3: "hits the apex of wall"}


def _next_crossing(table, walls, pt, direction, last_idx):
    """First crossing walking from the integer point ``pt`` along ``direction``.

    Returns ``(index, next point)`` or None.
    """
    P, den = pt
    res = kernels.first_crossing(table, P, den, direction, last_idx)
    if res is None:
        return None
    code, idx, T, Q = res
    if code:
        raise GenericityError(f"broken line {_DEGENERATE[code]} {walls[idx]!r} "
                              f"near {tuple(str(x) for x in _to_point(P, den).base)}")
    return idx, _int_move(P, den, T, Q, direction)


def next_wall(walls, pt: PerturbedPoint, direction, last_idx=None, table=None):
    """First wall met walking from ``pt`` along ``direction``: ``(index, point)`` or None.

    A wall at time zero counts only if it is collinear with ``last_idx`` and
    comes after it in ``walls``.
    """
    if table is None:
        table = _wall_table(walls)
    g = math.gcd(*direction)
    direction = tuple(int(x) // g for x in direction)
    nxt = _next_crossing(table, walls, _int_point(pt), direction, last_idx)
    if nxt is None:
        return None
    return nxt[0], _to_point(*nxt[1])


def _search(walls, u, p, cur, coeff, events, last_idx, found, budget, pt, ctx):
    # events are collected backwards: (index, wall, int point, multiple, prev, cur, exponent, a_i)
    if cur == u:
        found.append(_assemble(u, p, list(reversed(events))))
        return
    if budget <= 0:
        raise EnumerationError("broken line search exceeded its crossing cap")
    reachable, memo, table = ctx
    g = math.gcd(*cur.m)
    direction = (cur.m[0] // g, cur.m[1] // g)
    mk = (pt, direction, last_idx)
    if mk in memo:
        nxt = memo[mk]
    else:
        nxt = _next_crossing(table, walls, pt, direction, last_idx)
        memo[mk] = nxt
    if nxt is None:
        return
    idx, X = nxt
    w = walls[idx]
    e = abs(dual_pair(cur.m, w.normal))
    base = w.function.base
    h = w.function.power_coeffs(e)
    i = 0
    while True:
        prev = ExponentPair(tuple(a - i * b for a, b in zip(cur.m, base.m)),
                            tuple(a - i * b for a, b in zip(cur.q, base.q)))
        if not all(a >= b for a, b in zip(prev.q, u.q)):
            break
        if i >= len(h):
            break
        a_i = h[i]
        # prev - u must be a sum of wall exponents for the line to start at u
        if a_i and prev in reachable and (i == 0 or any(prev.m)):
            events.append((idx, w, X, i, prev, cur, e, a_i))
            _search(walls, u, p, prev, coeff * a_i, events, idx, found, budget - 1, X, ctx)
            events.pop()
        i += 1


def _assemble(u, p, evs) -> BrokenLine:
    c = 1
    out = []
    for idx, wall, X, i, prev, cur, e, a_i in evs:
        c_in = c
        c = c * a_i
        out.append(BendEvent(idx, _to_point(*X), i, (c_in, prev), (c, cur), e, wall))
    final = evs[-1][5] if evs else u
    return BrokenLine(u, p, tuple(out), c, final)


def theta_function(d: ScatteringDiagram, u, p: PerturbedPoint, k: int | None = None,
                   keep_lines: bool = False) -> ThetaFunction:
    """``theta_{u,p}``: the sum of final monomials of broken lines."""
    d = _diagram_at(d, k)
    u = as_exponent(u, d.r)
    lines = enumerate_broken_lines(d, u, p)
    acc: dict = {}
    for bl in lines:
        key = bl.final.key
        acc[key] = acc.get(key, 0) + bl.coefficient
    series = TruncatedSeries(acc, d.order, 2, d.r)
    return ThetaFunction(series, u, p, False, lines if keep_lines else [])


def transport(d: ScatteringDiagram, theta: ThetaFunction, path: PlanarPath) -> ThetaFunction:
    """Move a theta function to the end of ``path`` by wall crossings."""
    if path.start != theta.basepoint:
        raise ValueError("path must start at the theta function's basepoint")
    d = _diagram_at(d, theta.order)
    series = path_ordered_product(d, path, theta.series)
    return ThetaFunction(series, theta.index, path.end, theta.stabilized)


def limit_theta(d: ScatteringDiagram, u, p: Sequence, mu: Sequence, k: int | None = None,
                eps2: Sequence = DEFAULT_EPS2) -> ThetaFunction:
    """``lim_{eps->0+} theta_{u, p + eps*mu}`` for a possibly non-generic ``p``."""
    return theta_function(d, u, PerturbedPoint(p, mu, eps2), k)


def product_of_thetas(d: ScatteringDiagram, us: Sequence, p: PerturbedPoint,
                      k: int | None = None) -> TruncatedSeries:
    d = _diagram_at(d, k)
    out = d.one()
    for v in us:
        out = out * theta_function(d, v, p).series
    return out


def structure_constants(d: ScatteringDiagram, u_list: Sequence, u, k: int | None = None,
                        eps1: Sequence = DEFAULT_EPS1, eps2: Sequence = DEFAULT_EPS2):
    """``alpha(u_1, ..., u_s; u)``: the coefficient of ``z^u`` in the product at ``p`` near ``u_M``.

    The value is computed from two different infinitesimal approach
    directions; disagreement means the basepoint was not close enough and raises.
    """
    d = _diagram_at(d, k)
    u = as_exponent(u, d.r)
    us = [as_exponent(v, d.r) for v in u_list]
    if all(x == 0 for x in u.m):
        raise DomainError("structure constants need u_M != 0 to place the basepoint")
    if u.degree >= d.order:
        raise ValueError(f"|u_Q| = {u.degree} is beyond the truncation order {d.order}")
    vals = []
    for e1, e2 in ((eps1, eps2), (eps2, eps1)):
        p = PerturbedPoint(u.m, e1, e2)
        prod = product_of_thetas(d, us, p)
        vals.append(prod.coefficient(u.m, u.q))
    if vals[0] != vals[1]:
        raise RuntimeError(f"structure constant depends on the approach direction: {vals}")
    return vals[0]


def theta_expansion(f: TruncatedSeries, d: ScatteringDiagram, p: PerturbedPoint,
                    max_degree: int | None = None) -> dict | None:
    """Coefficients ``{u: c}`` with ``f = sum c_u theta_{u,p}`` mod I^k.

    Peels off the lex-smallest y-exponent repeatedly; each theta function is
    ``z^u`` plus terms with strictly larger y-exponent, so this terminates and
    a peeled coefficient is never touched again.  With ``max_degree`` the
    peeling stops and returns None at the first index of y-degree at least
    ``max_degree``.
    """
    d = _diagram_at(d, f.order)
    rest = f
    out: dict = {}
    while rest:
        u, c = next(iter(rest.items()))
        if max_degree is not None and u.degree >= max_degree:
            return None
        out[u] = out.get(u, 0) + c
        rest = rest - theta_function(d, u, p).series.scale(c)
    return {u: c for u, c in out.items() if c}


def stabilize(builder: Callable[[int], ScatteringDiagram], u, p: PerturbedPoint, k_start: int,
              step: int = 2, cap: int | None = None) -> tuple:
    """Recompute at orders k, k+step, ... until the term set stops changing twice in a row."""
    if cap is None:
        cap = k_start + 3 * step
    prev = None
    same = 0
    k = k_start
    theta = None
    while k <= cap:
        d = builder(k)
        theta = theta_function(d, u, p)
        terms = theta.series.terms
        if prev is not None and terms == prev:
            same += 1
            if same >= 2:
                theta.stabilized = True
                return theta, True
        else:
            same = 0
        prev = terms
        k += step
    return theta, False


def is_finite_at(theta: ThetaFunction, k: int) -> bool:
    """No term of y-degree ``>= k``: computing at this order lost nothing below it."""
    return all(sum(key[2:]) < k for key in theta.series.terms)


def line_trace_json(lines: Sequence[BrokenLine]) -> list:
    return [bl.to_json() for bl in lines]
