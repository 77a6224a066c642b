"""Planar scattering diagrams: walls, path-ordered products, completion.

Walls live in the plane M_R = R^2.  A wall is a ray or a full line (possibly
affine, i.e. not through the origin), a primitive normal ``n`` and a function
``f`` in one composite variable.  Crossing it from the positive side of ``n``
to the negative side acts by ``x^m y^q -> x^m y^q f^(m.n)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .lattice_core import (
    DomainError,
    GenericityError,
    PerturbedPoint,
    cross2,
    dual_pair,
    pcmp,
    primitive_part,
    primitive_rational,
    psign,
    rot90,
    sign,
    solve_unimodular_row,
    vec,
    vsub,
)
from .series_ring import (
    ExponentPair,
    InvalidWallError,
    ScatFunction,
    TruncatedSeries,
    elementary_transform,
)

RAY = "ray"
LINE = "line"


class ConsistencyError(RuntimeError):
    """The completion met a discrepancy it cannot factor (a bug, not user error)."""


class ChamberError(ValueError):
    pass


@dataclass(frozen=True)
class WallSupport:
    base: tuple
    direction: tuple
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "base", vec(self.base))
        d, g = primitive_part(self.direction)
        object.__setattr__(self, "direction", d)
        if self.kind not in (RAY, LINE):
            raise ValueError(f"unknown support kind {self.kind!r}")

    def contains(self, x: Sequence) -> bool:
        rel = vsub(x, self.base)
        if cross2(self.direction, rel) != 0:
            return False
        return self.kind == LINE or dual_pair(rel, self.direction) >= 0

    def canonical_key(self) -> tuple:
        """Equal keys mean equal point sets."""
        if self.kind == RAY:
            return (RAY, self.base, self.direction)
        d = self.direction
        if d[0] < 0 or (d[0] == 0 and d[1] < 0):
            d = (-d[0], -d[1])
        n = rot90(d)
        return (LINE, d, dual_pair(self.base, n))

    def half_rays_at(self, x: Sequence) -> list[tuple]:
        """Directions of the support leaving the point ``x`` (empty if x is off it)."""
        if not self.contains(x):
            return []
        d = self.direction
        if self.kind == RAY and tuple(x) == self.base:
            return [d]
        return [d, (-d[0], -d[1])]


@dataclass(eq=False)
class Wall:
    support: WallSupport
    normal: tuple
    function: ScatFunction

    def __post_init__(self):
        self.normal = tuple(self.normal)
        if dual_pair(self.function.base.m, self.normal) != 0:
            raise InvalidWallError("wall function exponent must be orthogonal to the normal")
        if dual_pair(self.support.direction, self.normal) != 0:
            raise InvalidWallError("wall normal must annihilate the support direction")

    @property
    def order(self) -> int:
        return self.function.order

    def is_incoming(self) -> bool:
        if self.support.kind == LINE:
            return True
        m = self.function.base.m
        if all(c == 0 for c in m):
            return True
        return dual_pair(m, self.support.direction) > 0

    def is_outgoing(self) -> bool:
        return not self.is_incoming()

    def side(self, p: PerturbedPoint) -> int:
        """Sign of ``(p - base) . n`` with perturbation tie-breaks."""
        t = p.pair(self.normal)
        t = (t[0] - dual_pair(self.support.base, self.normal),) + tuple(t[1:])
        return psign(t)

    def with_function(self, f: ScatFunction) -> "Wall":
        return Wall(self.support, self.normal, f)

    def with_order(self, order: int) -> "Wall":
        return Wall(self.support, self.normal, self.function.with_order(order))

    def transform(self, g: TruncatedSeries, s: int) -> TruncatedSeries:
        return elementary_transform(self.normal, self.function, g, s)

    def to_json(self) -> dict:
        return {"base": [str(x) for x in self.support.base],
                "direction": list(self.support.direction),
                "kind": self.support.kind,
                "normal": list(self.normal),
                "function": self.function.to_json()}

    @classmethod
    def from_json(cls, obj: dict, order: int) -> "Wall":
        return cls(WallSupport(obj["base"], obj["direction"], obj["kind"]), obj["normal"],
                   ScatFunction.from_json(obj["function"], order))

    def __repr__(self):
        s = self.support
        return (f"Wall({s.kind} {tuple(str(b) for b in s.base)} dir={s.direction} n={self.normal} "
                f"f={self.function!r})")


def line_wall(normal: Sequence[int], function: ScatFunction, base=(0, 0)) -> Wall:
    n, _ = primitive_part(normal)
    return Wall(WallSupport(base, rot90(n), LINE), normal, function)


def normalize_wall(w: Wall) -> Wall:
    """Make the normal primitive using E_{g n, f} = E_{n, f^g}."""
    n, g = primitive_part(w.normal)
    f = w.function.primitive()
    if g != 1:
        f = f.power(g)
    return Wall(w.support, n, f)


@dataclass
class ScatteringDiagram:
    walls: list
    order: int
    r: int
    qbullet: tuple | None = None  # d x r rational matrix; fixes wall normal signs
    d: int = 2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for w in self.walls:
            if w.function.order != self.order:
                raise ValueError("all walls must carry the diagram order")
            if len(w.function.base.q) != self.r:
                raise ValueError("wall exponent has the wrong number of y-entries")
        # Every generator has nonzero q >= 0, so |q| > 0 is a strictly positive
        # functional on the exponent cone; that is all strict convexity needs.
        for w in self.walls:
            if w.function.base.degree <= 0:
                raise ValueError("exponent cone would not be strictly convex")

    @property
    def exponent_cone(self) -> list:
        seen = []
        for w in self.walls:
            b = w.function.primitive().base
            if b not in seen:
                seen.append(b)
        return seen

    def truncate(self, order: int) -> "ScatteringDiagram":
        walls = []
        for w in self.walls:
            w2 = w.with_order(order)
            if not w2.function.is_trivial():
                walls.append(w2)
        return ScatteringDiagram(walls, order, self.r, self.qbullet, self.d, dict(self.meta))

    def joints(self) -> list:
        return find_joints(self.walls)

    def to_json(self) -> dict:
        out = {"order": self.order, "r": self.r,
               "walls": [w.to_json() for w in sorted(self.walls, key=_wall_sort_key)]}
        if self.qbullet is not None:
            out["qbullet"] = [[str(x) for x in row] for row in self.qbullet]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ScatteringDiagram":
        order = obj["order"]
        walls = [Wall.from_json(w, order) for w in obj["walls"]]
        r = obj.get("r")
        if r is None:
            r = len(walls[0].function.base.q) if walls else 0
        qb = obj.get("qbullet")
        if qb is not None:
            qb = tuple(tuple(Fraction(x) for x in row) for row in qb)
        return cls(walls, order, r, qb)

    def one(self) -> TruncatedSeries:
        return TruncatedSeries.one(self.order, self.d, self.r)

    def monomial(self, m, q=None) -> TruncatedSeries:
        q = tuple(q) if q is not None else (0,) * self.r
        return TruncatedSeries.monomial(m, q, self.order)


def _wall_sort_key(w: Wall):
    s = w.support
    return (s.kind, tuple(Fraction(x) for x in s.base), s.direction, w.normal,
            w.function.base.q, w.function.base.m, tuple(str(c) for c in w.function.coeffs))


# --- crossings along straight segments ---------------------------------------


def segment_crossings(walls: Sequence[Wall], start: PerturbedPoint, direction: Sequence,
                      t_max: Sequence | None = None, exclude_zero: bool = True):
    """Walls crossed by ``start + t*direction`` for ``0 < t`` (``< t_max``).

    Returns ``(t, index, s)`` sorted by the perturbed time ``t``; ``s`` is the
    crossing sign (+1 when moving from the positive to the negative side).
    Crossings at ``t == 0`` to every perturbation order are left out, as the
    caller is sitting on that wall.  Simultaneous crossings of walls that are
    not collinear mean the segment runs through a joint and raise.
    """
    out = []
    D = tuple(direction)
    levels = start.levels
    for idx, w in enumerate(walls):
        n = w.normal
        nd = D[0] * n[0] + D[1] * n[1]
        b = w.support.base
        val0 = (levels[0][0] - b[0]) * n[0] + (levels[0][1] - b[1]) * n[1]
        val1 = levels[1][0] * n[0] + levels[1][1] * n[1]
        val2 = levels[2][0] * n[0] + levels[2][1] * n[1]
        if nd == 0:
            if val0 == 0 and val1 == 0 and val2 == 0:
                raise GenericityError(f"segment runs along wall {w!r}")
            continue
        t = (Fraction(-val0, 1) / nd if val0 else 0,
             Fraction(-val1, 1) / nd if val1 else 0,
             Fraction(-val2, 1) / nd if val2 else 0)
        st = psign(t)
        if st < 0 or (st == 0 and exclude_zero):
            continue
        if t_max is not None:
            c = pcmp(t, t_max)
            if c > 0:
                continue
            if c == 0:
                raise GenericityError(f"segment ends on wall {w!r}")
        if w.support.kind == RAY:
            dd = w.support.direction
            a0 = (levels[0][0] + t[0] * D[0] - b[0]) * dd[0] + (levels[0][1] + t[0] * D[1] - b[1]) * dd[1]
            a1 = (levels[1][0] + t[1] * D[0]) * dd[0] + (levels[1][1] + t[1] * D[1]) * dd[1]
            a2 = (levels[2][0] + t[2] * D[0]) * dd[0] + (levels[2][1] + t[2] * D[1]) * dd[1]
            sa = psign((a0, a1, a2))
            if sa < 0:
                continue
            if sa == 0:
                raise GenericityError(f"segment passes through the apex {w.support.base} of a ray")
        s = -sign(nd)
        out.append((t, idx, s))
    out.sort(key=lambda c: (c[0], c[1]))
    for a, b in zip(out, out[1:]):
        if a[0] == b[0]:
            wa, wb = walls[a[1]], walls[b[1]]
            if cross2(wa.normal, wb.normal) != 0:
                pt = start.moved(a[0], D)
                raise GenericityError(f"segment passes through the joint {tuple(str(x) for x in pt.base)}")
    return out


@dataclass(frozen=True)
class PlanarPath:
    """A polyline through perturbed points sharing one perturbation."""

    points: tuple

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        for p in pts[1:]:
            if p.eps1 != pts[0].eps1 or p.eps2 != pts[0].eps2:
                raise ValueError("path points must share their perturbation vectors")

    @classmethod
    def segment(cls, a: PerturbedPoint, b: PerturbedPoint) -> "PlanarPath":
        return cls((a, b))

    @property
    def start(self) -> PerturbedPoint:
        return self.points[0]

    @property
    def end(self) -> PerturbedPoint:
        return self.points[-1]

    def crossings(self, walls: Sequence[Wall]) -> list:
        """``(wall, s)`` in path order."""
        seq = []
        for a, b in zip(self.points, self.points[1:]):
            D = vsub(b.base, a.base)
            if all(x == 0 for x in D):
                continue
            for w in walls:
                if w.side(a) == 0:
                    raise GenericityError(f"path point lies on wall {w!r}")
            for _, idx, s in segment_crossings(walls, a, D, (1, 0, 0)):
                seq.append((walls[idx], s))
        for w in walls:
            if w.side(self.end) == 0:
                raise GenericityError(f"path end lies on wall {w!r}")
        return seq


def path_ordered_product(d: ScatteringDiagram, path: PlanarPath,
                         g: TruncatedSeries) -> TruncatedSeries:
    """Apply the wall crossings met along ``path`` to ``g``, earliest first."""
    for w, s in path.crossings(d.walls):
        g = w.transform(g, s)
    return g


# --- loops around joints -------------------------------------------------------


def _angle_half(v) -> int:
    # 0 for angles in (0, pi], 1 for (pi, 2pi]; the positive x-axis comes last.
    x, y = v
    if y > 0 or (y == 0 and x < 0):
        return 0
    return 1


def _angle_cmp(a, b) -> int:
    ha, hb = _angle_half(a[0]), _angle_half(b[0])
    if ha != hb:
        return ha - hb
    c = cross2(a[0], b[0])
    if c > 0:
        return -1
    if c < 0:
        return 1
    return (a[1] > b[1]) - (a[1] < b[1])


def loop_crossings(walls: Sequence[Wall], joint: Sequence) -> list:
    """Crossings ``(wall, s)`` of a small counterclockwise loop around ``joint``.

    The loop starts just above the positive x-direction.  At the half-ray with
    direction ``u`` the loop moves along ``rot90(u)``, so it arrives from the
    side where ``-rot90(u) . n`` has its sign.
    """
    joint = vec(joint)
    items = []
    for idx, w in enumerate(walls):
        for u in w.support.half_rays_at(joint):
            items.append((u, idx))
    items.sort(key=functools.cmp_to_key(_angle_cmp))
    out = []
    for u, idx in items:
        w = walls[idx]
        s = -sign(dual_pair(rot90(u), w.normal))
        out.append((w, s))
    return out


def apply_loop(walls: Sequence[Wall], joint: Sequence, g: TruncatedSeries) -> TruncatedSeries:
    for w, s in loop_crossings(walls, joint):
        g = w.transform(g, s)
    return g


@dataclass
class ConsistencyReport:
    joint: tuple
    images: tuple
    generators: tuple

    @property
    def consistent(self) -> bool:
        return all(a == b for a, b in zip(self.images, self.generators))


def check_consistency(d: ScatteringDiagram, joint: Sequence, order: int | None = None) -> ConsistencyReport:
    """Loop product around ``joint`` applied to x^(1,0) and x^(0,1)."""
    k = order or d.order
    gens = tuple(TruncatedSeries.monomial(e, (0,) * d.r, k) for e in ((1, 0), (0, 1)))
    walls = d.walls if k == d.order else d.truncate(k).walls
    imgs = tuple(apply_loop(walls, joint, g) for g in gens)
    return ConsistencyReport(tuple(vec(joint)), imgs, gens)


def find_joints(walls: Sequence[Wall]) -> list:
    """Points where two wall supports meet, including ray apexes on other walls."""
    pts = set()
    for i, a in enumerate(walls):
        for b in walls[i + 1:]:
            for p in _support_meet(a.support, b.support):
                pts.add(p)
    return sorted(pts, key=lambda p: (Fraction(p[0]), Fraction(p[1])))


def _support_meet(a: WallSupport, b: WallSupport) -> list:
    da, db = a.direction, b.direction
    den = cross2(da, db)
    if den == 0:
        out = []
        for s, o in ((a, b), (b, a)):
            if s.kind == RAY and o.contains(s.base):
                out.append(s.base)
        return out
    rel = vsub(b.base, a.base)
    t = Fraction(cross2(rel, db)) / den
    u = Fraction(cross2(rel, da)) / den
    if a.kind == RAY and t < 0:
        return []
    if b.kind == RAY and u < 0:
        return []
    p = tuple(a.base[i] + t * da[i] for i in range(2))
    return [vec(p)]


# --- normalization -------------------------------------------------------------


def _merge_key(w: Wall) -> tuple:
    return (w.support.canonical_key(), w.normal, w.function.primitive().base)


def normalize(d: ScatteringDiagram) -> ScatteringDiagram:
    """Primitive normals, merged parallel walls on equal supports, trivial walls dropped."""
    merged: dict = {}
    order_keys = []
    for w in d.walls:
        w = normalize_wall(w)
        n = w.normal
        f = w.function
        neg = (-n[0], -n[1])
        key = _merge_key(w)
        key_neg = (key[0], neg, key[2])
        if key_neg in merged and key not in merged:
            key, f = key_neg, f.power(-1)
            n = neg
        if key in merged:
            old = merged[key]
            merged[key] = Wall(old.support, old.normal, old.function.times(f))
        else:
            merged[key] = Wall(w.support, n, f)
            order_keys.append(key)
    walls = [merged[k] for k in order_keys if not merged[k].function.is_trivial()]
    walls.sort(key=_wall_sort_key)
    return ScatteringDiagram(walls, d.order, d.r, d.qbullet, d.d, dict(d.meta))


# --- consistent completion ------------------------------------------------------


def _new_wall_normal(u: ExponentPair, n_u: tuple, qbullet) -> tuple[tuple, Fraction]:
    """Primitive normal for the wall carrying exponent ``u`` and ``n_u = lam * n``."""
    if qbullet is not None:
        nd = tuple(sum(Fraction(qbullet[i][j]) * u.q[j] for j in range(len(u.q)))
                   for i in range(len(qbullet)))
        if all(x == 0 for x in nd):
            raise ConsistencyError(f"Q-bullet image of {u.q} vanishes")
        n, _ = primitive_rational(nd)
    else:
        n, _ = primitive_rational(n_u)
    nn = dual_pair(n, n)
    lam = Fraction(dual_pair(n_u, n)) / nn
    if tuple(lam * x for x in n) != tuple(n_u):
        raise ConsistencyError(f"discrepancy {n_u} for {u} is not parallel to normal {n}")
    return n, lam


def consistent_completion(initial: Iterable[Wall], k: int, r: int | None = None,
                          qbullet=None) -> ScatteringDiagram:
    """Add outgoing rays order by order until every joint loop is trivial mod I^k."""
    walls = [normalize_wall(w.with_order(k)) for w in initial]
    walls = [w for w in walls if not w.function.is_trivial()]
    if r is None:
        if not walls:
            return ScatteringDiagram([], k, 0, qbullet)
        r = len(walls[0].function.base.q)
    diagram = normalize(ScatteringDiagram(walls, k, r, qbullet))
    walls = list(diagram.walls)
    for j in range(1, k):
        jk = j + 1
        loop_walls = [w.with_order(jk) for w in walls]
        loop_walls = [w for w in loop_walls if not w.function.is_trivial()]
        new = []
        for joint in find_joints(loop_walls):
            new.extend(_scatter_joint(loop_walls, joint, j, r, qbullet, k))
        if new:
            walls = normalize(ScatteringDiagram(walls + new, k, r, qbullet)).walls
    return normalize(ScatteringDiagram(walls, k, r, qbullet))


def _scatter_joint(walls, joint, j, r, qbullet, k) -> list:
    order = j + 1
    gens = [(1, 0), (0, 1)]
    images = []
    for e in gens:
        g = TruncatedSeries.monomial(e, (0,) * r, order)
        images.append(apply_loop(walls, joint, g) - g)
    coeffs: dict = {}
    for i, (e, img) in enumerate(zip(gens, images)):
        for key, c in img.terms.items():
            deg = sum(key[2:])
            if deg < j:
                raise ConsistencyError(
                    f"loop at {joint} is nontrivial in degree {deg} < {j}; lower orders are inconsistent")
            m = (key[0] - e[0], key[1] - e[1])
            u = ExponentPair(m, tuple(key[2:]))
            coeffs.setdefault(u, [0, 0])[i] += c
    new = []
    for u in sorted(coeffs, key=lambda u: (u.q, u.m)):
        n_u = tuple(coeffs[u])
        if n_u == (0, 0):
            continue
        if dual_pair(n_u, u.m) != 0:
            raise ConsistencyError(f"discrepancy term {u} with {n_u} is not a wall-crossing log")
        if u.m == (0, 0):
            raise ConsistencyError(f"pure coefficient discrepancy {u} at {joint}")
        n, lam = _new_wall_normal(u, n_u, qbullet)
        direction, _ = primitive_part((-u.m[0], -u.m[1]))
        s = -sign(dual_pair(rot90(direction), n))
        c = -lam / s
        f = ScatFunction.binomial(u.m, u.q, k, c)
        new.append(Wall(WallSupport(joint, direction, RAY), n, f))
    return new


# --- chambers -----------------------------------------------------------------------


def locate_chamber(d: ScatteringDiagram, p: PerturbedPoint) -> tuple:
    """Signs of ``(p - base) . n`` over the walls of ``d``."""
    out = []
    for w in d.walls:
        s = w.side(p)
        if s == 0:
            raise GenericityError(f"point lies on wall {w!r} to every perturbation order")
        out.append(s)
    return tuple(out)


def chamber_point(d: ScatteringDiagram, side: int = 1, eps1=(1, 7), eps2=(3, 1),
                  radius: int = 6) -> PerturbedPoint:
    """A perturbed point on the ``side`` of every wall (the chamber C^+ or C^-)."""
    cands = []
    for R in range(0, radius + 1):
        for x in range(-R, R + 1):
            for y in range(-R, R + 1):
                if max(abs(x), abs(y)) == R:
                    cands.append((x, y))
    for c in cands:
        p = PerturbedPoint(c, eps1, eps2)
        if all(w.side(p) == side for w in d.walls):
            return p
    raise ChamberError("no chamber on the requested side of every wall was found")


def translate_for_positive_chamber(initial: Sequence[Wall], offsets: Sequence | None = None) -> list:
    """Shift each line wall to ``{x . n = -delta}`` so the origin is strictly positive."""
    walls = list(initial)
    if offsets is None:
        offsets = list(range(1, len(walls) + 1))
    out = []
    for w, delta in zip(walls, offsets):
        delta = Fraction(delta)
        if delta <= 0:
            raise DomainError("translation offsets must be positive")
        n, _ = primitive_part(w.normal)
        v = solve_unimodular_row(n)
        base = vec((-delta * v[0], -delta * v[1]))
        out.append(Wall(WallSupport(base, w.support.direction, w.support.kind), w.normal, w.function))
    pts: dict = {}
    for i, a in enumerate(out):
        for b in out[i + 1:]:
            for p in _support_meet(a.support, b.support):
                pts[p] = pts.get(p, 0) + 1
    for p, cnt in pts.items():
        if sum(1 for w in out if w.support.contains(p)) > 2:
            raise DomainError(f"translation offsets produce a triple point at {p}")
    return out
