"""Valuations, tropicalization and taut broken lines.

Covectors may be exact (a plain vector) or perturbed, ``n + eps*c1 + eps^2*c2``,
in which case pairings are compared lexicographically level by level.  A
covector has ``2`` entries (pairing with x-exponents only) or ``2 + r``
(pairing with y-exponents as well).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .broken_lines import (
    BendEvent,
    BrokenLine,
    _wall_table,
    next_wall,
    as_exponent,
    enumerate_broken_lines,
)
from .lattice_core import (
    DEFAULT_EPS1,
    DEFAULT_EPS2,
    GenericityError,
    PerturbedPoint,
    dual_pair,
    pcmp,
    psign,
    sign,
)
from .scattering import ScatteringDiagram, Wall, _merge_key
from .series_ring import ExponentPair, TruncatedSeries

EXACT = "exact"
UPPER = "upper-bound"
UNBOUNDED = "unbounded-suspected"
INFINITE = "infinite"


@dataclass(frozen=True)
class ValuationResult:
    value: object  # Fraction/int, or None for +infinity
    certified: str
    order: int
    witness: object = None

    @property
    def exact(self) -> bool:
        return self.certified == EXACT

    @property
    def finite(self) -> bool:
        return self.value is not None and self.certified == EXACT


# --- covectors -----------------------------------------------------------------------


def covector_levels(v, width: int) -> tuple:
    """Normalize ``v`` to three levels of length ``width`` (missing y-entries are 0)."""
    if isinstance(v, PerturbedPoint):
        levels = v.levels
    elif len(v) == 3 and all(isinstance(x, (tuple, list)) for x in v):
        levels = tuple(tuple(x) for x in v)
    else:
        z = (0,) * len(v)
        levels = (tuple(v), z, z)
    out = []
    for lv in levels:
        lv = tuple(Fraction(x) for x in lv)
        if len(lv) > width:
            raise ValueError(f"covector {lv} is longer than {width}")
        out.append(lv + (Fraction(0),) * (width - len(lv)))
    return tuple(out)


def perturbed_covector(n: Sequence, eps1: Sequence = DEFAULT_EPS1,
                       eps2: Sequence = DEFAULT_EPS2) -> tuple:
    return (tuple(n), tuple(eps1), tuple(eps2))


def pair_levels(u: ExponentPair, V: tuple) -> tuple:
    key = u.m + u.q
    return tuple(sum((a * b for a, b in zip(key, lv)), Fraction(0)) for lv in V)


def _scale_levels(c, t: tuple) -> tuple:
    return tuple(c * x for x in t)


# --- valuations ------------------------------------------------------------------------


def valuation(f: TruncatedSeries, w: Sequence, s: Sequence | None = None) -> ValuationResult:
    """``min (m, q) . (w, s)`` over the stored terms; an upper bound for a truncated series."""
    if not f:
        return ValuationResult(None, INFINITE, f.order)
    s = tuple(s) if s is not None else (0,) * f.r
    V = covector_levels(tuple(w) + tuple(s), f.d + f.r)
    best = None
    arg = None
    for u, _ in f.items():
        val = pair_levels(u, V)
        if best is None or pcmp(val, best) < 0:
            best, arg = val, u
    return ValuationResult(_clean(best[0]), UPPER, f.order, arg)


def _clean(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _min_over(lines, V, max_degree=None):
    best = None
    arg = None
    for bl in lines:
        if max_degree is not None and bl.final.degree >= max_degree:
            continue
        val = pair_levels(bl.final, V)
        if best is None or pcmp(val, best) < 0:
            best, arg = val, bl
    return best, arg


def val_theta(d: ScatteringDiagram, u, v, p: PerturbedPoint, k: int | None = None,
              lines: Sequence[BrokenLine] | None = None) -> ValuationResult:
    """``val_{v,p}(theta_u)`` from broken lines computed at the diagram order.

    With ``k`` below the diagram order, the value is certified exact when no
    broken line reaches y-degree ``k`` (the theta function has stabilized);
    otherwise it is an upper bound, flagged as unbounded-suspected when the
    per-order minima fall linearly.
    """
    K = d.order
    k = K if k is None else k
    if k > K:
        raise ValueError(f"certification order {k} exceeds the diagram order {K}")
    u = as_exponent(u, d.r)
    if lines is None:
        lines = enumerate_broken_lines(d, u, p)
    V = covector_levels(v, 2 + d.r)
    if not lines:
        return ValuationResult(None, INFINITE, K)
    best, arg = _min_over(lines, V)
    if k < K and all(bl.final.degree < k for bl in lines):
        return ValuationResult(_clean(best[0]), EXACT, K, arg)
    per_order = []
    for j in [j for j in (K - 4, K - 2, K) if j > 0]:
        b, _ = _min_over(lines, V, j)
        if b is not None:
            per_order.append(b[0])
    label = UPPER
    if len(per_order) == 3:
        d1, d2 = per_order[1] - per_order[0], per_order[2] - per_order[1]
        if d1 < 0 and d1 == d2:
            label = UNBOUNDED
    return ValuationResult(_clean(best[0]), label, K, arg)


def theta_set_valuation(d: ScatteringDiagram, m: Sequence, v, p: PerturbedPoint,
                        k: int | None = None) -> ValuationResult:
    """``val_v(Theta_{m,p})`` for rational ``m`` via ``(1/kappa) val_v(theta_{kappa m})``."""
    m = tuple(Fraction(x) for x in m)
    if all(x == 0 for x in m):
        return ValuationResult(0, EXACT, d.order)
    kappa = 1
    for x in m:
        kappa = kappa * x.denominator // math.gcd(kappa, x.denominator)
    mi = tuple(int(x * kappa) for x in m)
    r = val_theta(d, mi, v, p, k)
    if r.value is None:
        return r
    return ValuationResult(_clean(Fraction(r.value) / kappa), r.certified, r.order, r.witness)


# --- tautness ----------------------------------------------------------------------------


@dataclass
class TautCertificate:
    line: BrokenLine
    covectors: list  # v_{t+eps} just after each crossing, forward order
    checks: list  # (event index, lhs, rhs, ok)
    inconclusive: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c[3] for c in self.checks)


def _prim(f):
    prim, g = f.base.primitive()
    return prim, g


def _reference_degree(wall: Wall, d_ref: ScatteringDiagram | None):
    """Degree of the wall function in units of its own base, or None if unknown."""
    f = wall.function
    if not f.possibly_truncated():
        return f.degree
    if d_ref is None:
        return None
    key = _merge_key(wall)
    for w in d_ref.walls:
        if _merge_key(w) == key and not w.function.possibly_truncated():
            fp = w.function.primitive()
            _, g = _prim(f)
            if fp.degree % g:
                return None
            return fp.degree // g
    return None


def _cotransport(V: tuple, ev: BendEvent, width: int) -> tuple:
    """``T^vee`` of the bend at ``ev`` applied to the covector just after it."""
    if not ev.multiple:
        return V
    w = ev.wall
    base = w.function.base
    n = w.normal
    u_in = ev.in_monomial[1]
    un = dual_pair(u_in.m, n)
    coef = Fraction(ev.multiple, un)
    a = pair_levels(base, V)
    out = []
    for lv, al in zip(V, a):
        add = tuple(coef * al * n[i] if i < 2 else 0 for i in range(width))
        out.append(tuple(x + y for x, y in zip(lv, add)))
    return tuple(out)


def transported_covectors(line: BrokenLine, v, r: int) -> list:
    """``v_{t+eps}`` just after each crossing of ``line`` (forward order)."""
    width = 2 + r
    V = covector_levels(v, width)
    after = [None] * len(line.events)
    for i in range(len(line.events) - 1, -1, -1):
        after[i] = V
        V = _cotransport(V, line.events[i], width)
    return after


def check_taut(line: BrokenLine, v, r: int, d_ref: ScatteringDiagram | None = None) -> TautCertificate:
    """Check the v-taut inequality at every crossing of ``line``."""
    covs = transported_covectors(line, v, r)
    checks = []
    inconclusive = []
    for i, (ev, V) in enumerate(zip(line.events, covs)):
        base = ev.wall.function.base
        a = pair_levels(base, V)
        j = ev.multiple
        lhs = _scale_levels(j, a)  # (u_out - u_in) . v
        sa = psign(a)
        if sa >= 0:
            rhs = tuple(Fraction(0) for _ in a)
        else:
            K = _reference_degree(ev.wall, d_ref)
            if K is None:
                # the true degree is at least the stored one
                if j < ev.exponent * ev.wall.function.degree:
                    checks.append((i, lhs, None, False))
                else:
                    inconclusive.append(i)
                continue
            rhs = _scale_levels(ev.exponent * K, a)
        checks.append((i, lhs, rhs, pcmp(lhs, rhs) <= 0))
    return TautCertificate(line, covs, checks, inconclusive)


@dataclass
class TraceOutcome:
    line: BrokenLine | None
    certificate: TautCertificate | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.line is not None


def _trace(d: ScatteringDiagram, p: PerturbedPoint, u_final: ExponentPair, choose, V=None,
           d_ref=None, max_crossings: int = 2000) -> TraceOutcome:
    walls = list(d.walls)
    for w in walls:
        if w.side(p) == 0:
            raise GenericityError(f"basepoint lies on wall {w!r}")
    width = 2 + d.r
    table = _wall_table(walls)
    cur = u_final
    pt = p
    last = None
    evs = []
    for _ in range(max_crossings):
        if not any(cur.m):
            break
        nxt = next_wall(walls, pt, cur.m, last, table)
        if nxt is None:
            break
        idx, X = nxt
        w = walls[idx]
        e = abs(dual_pair(cur.m, w.normal))
        base = w.function.base
        if w.function.is_trivial():
            j = 0
        else:
            verdict = choose(w, cur, V)
            if verdict == "max":
                K = _reference_degree(w, d_ref)
                if K is None:
                    return TraceOutcome(None, None, f"unbounded bend demanded at wall {idx}")
                j = e * K
            else:
                j = 0
        prev = ExponentPair(tuple(a - j * b for a, b in zip(cur.m, base.m)),
                            tuple(a - j * b for a, b in zip(cur.q, base.q)))
        if any(x < 0 for x in prev.q):
            return TraceOutcome(None, None, f"y-exponent turns negative at wall {idx}")
        h = w.function.power_coeffs(e) if j else [1]
        a_j = h[j] if j < len(h) else 0
        if not a_j:
            return TraceOutcome(None, None, f"bend beyond the truncation at wall {idx}")
        ev = BendEvent(idx, X, j, (None, prev), (None, cur), e, w)
        if V is not None:
            V = _cotransport(V, ev, width)
        evs.append((ev, a_j))
        cur = prev
        pt = X
        last = idx
    else:
        return TraceOutcome(None, None, "crossing cap exceeded")
    evs.reverse()
    c = 1
    events = []
    for ev, a_j in evs:
        c_in = c
        c = c * a_j
        events.append(BendEvent(ev.wall_index, ev.point, ev.multiple, (c_in, ev.in_monomial[1]),
                                (c, ev.out_monomial[1]), ev.exponent, ev.wall))
    return TraceOutcome(BrokenLine(cur, p, tuple(events), c, u_final))


def taut_trace(d: ScatteringDiagram, v, p: PerturbedPoint, u_final, d_ref=None) -> TraceOutcome:
    """The v-taut broken line ending at ``p`` with final exponent ``u_final``, traced backwards."""
    u_final = as_exponent(u_final, d.r)
    V = covector_levels(v, 2 + d.r)

    def choose(w, cur, Vcur):
        a = psign(pair_levels(w.function.base, Vcur))
        if a == 0:
            raise GenericityError(f"covector is not generic: tie at wall {w!r}")
        return "zero" if a > 0 else "max"

    out = _trace(d, p, u_final, choose, V, d_ref)
    if out.line is not None:
        out.certificate = check_taut(out.line, v, d.r, d_ref)
    return out


def lambda_taut_trace(d: ScatteringDiagram, mode: str, p: PerturbedPoint, m_final,
                      d_ref=None) -> TraceOutcome:
    """Lambda-taut (``mode='L'``) or Lambda^T-taut (``mode='LT'``) line, traced backwards.

    Lambda-taut lines bend maximally when crossing from the positive to the
    negative side of a wall and not at all otherwise; Lambda^T-taut lines do
    the opposite.
    """
    if mode not in ("L", "LT"):
        raise ValueError("mode must be 'L' or 'LT'")
    u_final = as_exponent(m_final, d.r)

    def choose(w, cur, _):
        # forward, the line arrives from the side where cur.m . n has its sign
        sigma = sign(dual_pair(cur.m, w.normal))
        pos_to_neg = sigma > 0
        if mode == "L":
            return "max" if pos_to_neg else "zero"
        return "zero" if pos_to_neg else "max"

    return _trace(d, p, u_final, choose, None, d_ref)


# --- momentum and tropicalization ------------------------------------------------------------


def _matvec(L, x):
    return tuple(sum((Fraction(L[i][j]) * x[j] for j in range(len(x))), Fraction(0)) for i in range(len(L)))


def momentum(line: BrokenLine, L) -> list:
    """``m_t . L Gamma(t)`` sampled at the end of each segment."""
    out = []
    for _, u, pt in line.segments():
        out.append(_clean(dual_pair(u.m, _matvec(L, pt.base))))
    return out


def momentum_levels(line: BrokenLine, L) -> list:
    """Momentum at every perturbation level; all entries equal along a line."""
    out = []
    for _, u, pt in line.segments():
        out.append(tuple(_clean(dual_pair(u.m, _matvec(L, lv))) for lv in pt.levels))
    return out


@dataclass
class TropSample:
    ray: tuple
    values: list  # (scale, ValuationResult)

    @property
    def linear(self) -> bool:
        vals = [(s, r.value) for s, r in self.values if r.exact]
        if len(vals) < 2:
            return True
        s0, v0 = vals[0]
        return all(Fraction(v) * s0 == Fraction(v0) * s for s, v in vals)


def tropicalize(d: ScatteringDiagram, u, rays: Sequence, p: PerturbedPoint, k: int | None = None,
                scales: Sequence = (1, 2, 3)) -> list:
    """Sample ``v -> val_v(theta_{u,p})`` along rays."""
    u = as_exponent(u, d.r)
    lines = enumerate_broken_lines(d, u, p)
    out = []
    for ray in rays:
        vals = []
        for s in scales:
            v = tuple(Fraction(s) * Fraction(x) for x in ray)
            vals.append((s, val_theta(d, u, v, p, k, lines)))
        out.append(TropSample(tuple(ray), vals))
    return out


def trop_value(f: TruncatedSeries, v) -> object:
    """``f^trop(v)`` for an exact series (min over the stored terms)."""
    return valuation(f, tuple(v)[:f.d], tuple(v)[f.d:] or None).value


def rational_rays(count: int, radius: int = 5) -> list:
    """``count`` primitive integer directions spread around the circle, deterministic."""
    cands = set()
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            if (a, b) != (0, 0) and math.gcd(a, b) == 1:
                cands.add((a, b))
    ordered = sorted(cands, key=lambda v: math.atan2(v[1], v[0]))
    if count >= len(ordered):
        return ordered
    step = len(ordered) / count
    return [ordered[int(i * step)] for i in range(count)]


def valuation_table_csv(rows: Sequence) -> str:
    """CSV with columns u, v, value, certified, order."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["u", "v", "value", "certified", "order"])
    for u, v, res in rows:
        val = "inf" if res.value is None else str(res.value)
        wr.writerow([" ".join(str(x) for x in u), " ".join(str(x) for x in v), val,
                     res.certified, res.order])
    return buf.getvalue()
