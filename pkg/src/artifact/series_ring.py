"""The truncated ring Z[x^M][[y^Q]] / I^k and wall-crossing automorphisms.

Terms are keyed by a flat tuple ``(m_1, .., m_d, q_1, .., q_r)``; a term
survives only while its y-degree ``|q|`` is below the order ``k``.
Coefficients are Python ints, or Fractions where rational data demands it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from . import kernels
from .lattice_core import DimensionError, DomainError, dual_pair, int_vec


class OrderMismatch(ValueError):
    pass


class NonUnitError(ValueError):
    pass


class InvalidWallError(ValueError):
    pass


class ExponentPair(NamedTuple):
    """An element (m, q) of M + Q with q entrywise nonnegative."""

    m: tuple
    q: tuple

    @classmethod
    def make(cls, m: Sequence[int], q: Sequence[int]) -> "ExponentPair":
        m, q = int_vec(m), int_vec(q)
        if any(x < 0 for x in q):
            raise DomainError(f"y-exponent {q} has a negative entry")
        return cls(m, q)

    @property
    def key(self) -> tuple:
        return self.m + self.q

    @property
    def degree(self) -> int:
        return sum(self.q)

    def __add__(self, other):  # type: ignore[override]
        return ExponentPair(tuple(a + b for a, b in zip(self.m, other.m)),
                            tuple(a + b for a, b in zip(self.q, other.q)))

    def scaled(self, k: int) -> "ExponentPair":
        return ExponentPair(tuple(k * a for a in self.m), tuple(k * a for a in self.q))

    def primitive(self) -> tuple["ExponentPair", int]:
        g = math.gcd(*self.m, *self.q)
        if g == 0:
            raise DomainError("zero exponent has no primitive part")
        return ExponentPair(tuple(a // g for a in self.m), tuple(a // g for a in self.q)), g


def split_key(key: tuple, d: int) -> ExponentPair:
    return ExponentPair(key[:d], key[d:])


def _clean(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class TruncatedSeries:
    """Sparse element of Z[x^M][[y^Q]] reduced modulo y-degree ``order``."""

    __slots__ = ("terms", "order", "d", "r")

    def __init__(self, terms: Mapping[tuple, object], order: int, d: int, r: int,
                 _trusted: bool = False):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order
        self.d = d
        self.r = r
        if _trusted:
            self.terms = dict(terms)
            return
        clean = {}
        for key, c in terms.items():
            key = tuple(key)
            if len(key) != d + r:
                raise DimensionError(f"key {key} does not have length {d + r}")
            if any(x < 0 for x in key[d:]):
                raise DomainError(f"negative y-exponent in {key}")
            if c and sum(key[d:]) < order:
                clean[key] = _clean(clean.get(key, 0) + c)
                if not clean[key]:
                    del clean[key]
        self.terms = clean

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, order: int, d: int = 2, r: int = 0) -> "TruncatedSeries":
        return cls({}, order, d, r, _trusted=True)

    @classmethod
    def one(cls, order: int, d: int = 2, r: int = 0) -> "TruncatedSeries":
        return cls.monomial((0,) * d, (0,) * r, order)

    @classmethod
    def monomial(cls, m: Sequence[int], q: Sequence[int], order: int, c=1) -> "TruncatedSeries":
        m, q = tuple(m), tuple(q)
        return cls({m + q: c}, order, len(m), len(q))

    @classmethod
    def from_terms(cls, terms: Iterable, order: int, d: int | None = None,
                   r: int | None = None) -> "TruncatedSeries":
        """Build from ``(m, q, c)`` triples."""
        acc: dict = {}
        for m, q, c in terms:
            m, q = tuple(m), tuple(q)
            d, r = len(m), len(q)
            acc[m + q] = acc.get(m + q, 0) + c
        if d is None or r is None:
            raise ValueError("dimensions unknown for an empty term list")
        return cls(acc, order, d, r)

    # -- inspection --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.order == other.order and self.d == other.d and self.r == other.r
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.order, self.d, self.r, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"TruncatedSeries(order={self.order}, {self.pretty()})"

    def items(self):
        for key in sorted(self.terms, key=self._sort_key):
            yield split_key(key, self.d), self.terms[key]

    def _sort_key(self, key):
        return (key[self.d:], key[:self.d])

    def coefficient(self, m: Sequence[int], q: Sequence[int]):
        return self.terms.get(tuple(m) + tuple(q), 0)

    def constant_term(self):
        return self.terms.get((0,) * (self.d + self.r), 0)

    def exponents(self) -> list[ExponentPair]:
        return [e for e, _ in self.items()]

    def max_degree(self) -> int:
        return max((sum(k[self.d:]) for k in self.terms), default=-1)

    def degree_part(self, j: int) -> "TruncatedSeries":
        return TruncatedSeries({k: c for k, c in self.terms.items() if sum(k[self.d:]) == j},
                               self.order, self.d, self.r, _trusted=True)

    def is_nonnegative(self) -> bool:
        return all(c > 0 for c in self.terms.values())

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.items():
            mon = []
            if any(e.m):
                mon.append("x^" + str(tuple(e.m)).replace(" ", ""))
            if any(e.q):
                mon.append("y^" + str(tuple(e.q)).replace(" ", ""))
            parts.append(f"{c}" + ("*" + "*".join(mon) if mon else ""))
        return " + ".join(parts)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if self.order != other.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")
        if (self.d, self.r) != (other.d, other.r):
            raise DimensionError("series live in different rings")

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, other.scale(-1))

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "TruncatedSeries":
        if not c:
            return TruncatedSeries.zero(self.order, self.d, self.r)
        return TruncatedSeries({k: _clean(c * v) for k, v in self.terms.items()},
                               self.order, self.d, self.r, _trusted=True)

    def shift(self, m: Sequence[int], q: Sequence[int]) -> "TruncatedSeries":
        """Multiply by the monomial x^m y^q."""
        s = tuple(m) + tuple(q)
        return TruncatedSeries({tuple(a + b for a, b in zip(k, s)): c
                                for k, c in self.terms.items()}, self.order, self.d, self.r)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatch("cannot raise the truncation order")
        return TruncatedSeries({k: c for k, c in self.terms.items()
                                if sum(k[self.d:]) < order}, order, self.d, self.r, _trusted=True)

    def with_order(self, order: int) -> "TruncatedSeries":
        """Reinterpret at another order (dropping terms when lowering)."""
        return TruncatedSeries(self.terms, order, self.d, self.r)

    def map_terms(self, fn) -> "TruncatedSeries":
        """Apply ``fn(m, q, c) -> (m', q', c')`` termwise, summing collisions."""
        acc: dict = {}
        d2 = r2 = None
        for e, c in self.items():
            m2, q2, c2 = fn(e.m, e.q, c)
            d2, r2 = len(m2), len(q2)
            key = tuple(m2) + tuple(q2)
            acc[key] = acc.get(key, 0) + c2
        if d2 is None:
            d2, r2 = self.d, self.r
        return TruncatedSeries(acc, self.order, d2, r2)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list:
        out = []
        for e, c in self.items():
            out.append({"m": list(e.m), "q": list(e.q),
                        "c": c if isinstance(c, int) else str(c)})
        return out

    @classmethod
    def from_json(cls, data: list, order: int, d: int = 2, r: int | None = None) -> "TruncatedSeries":
        triples = [(t["m"], t["q"], Fraction(t["c"]) if isinstance(t["c"], str) else t["c"])
                   for t in data]
        if not triples:
            return cls.zero(order, d, r or 0)
        return cls.from_terms(triples, order)


def add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    out = dict(a.terms)
    for k, c in b.terms.items():
        v = out.get(k, 0) + c
        if v:
            out[k] = _clean(v)
        else:
            out.pop(k, None)
    return TruncatedSeries(out, a.order, a.d, a.r, _trusted=True)


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return TruncatedSeries(kernels.mul_terms(a.terms, b.terms, a.d, a.order),
                           a.order, a.d, a.r, _trusted=True)


def pow_unit(f: TruncatedSeries, e: int) -> TruncatedSeries:
    """``f**e`` for ``f`` in 1 + I; negative ``e`` via the geometric series."""
    if f.constant_term() != 1:
        raise NonUnitError("constant term must be exactly 1")
    one = TruncatedSeries.one(f.order, f.d, f.r)
    if e < 0:
        g = f - one  # nilpotent mod I^k
        inv = one
        term = one
        for _ in range(1, f.order):
            term = mul(term, g).scale(-1)
            if not term:
                break
            inv = inv + term
        return pow_unit(inv, -e)
    result, base = one, f
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


class ScatFunction:
    """``f = 1 + sum_j c_j z^(j*base)`` truncated so that ``j*|base_q| < order``."""

    __slots__ = ("base", "coeffs", "order", "_pow")

    def __init__(self, base: ExponentPair, coeffs: Sequence, order: int):
        base = ExponentPair.make(base[0], base[1])
        if base.degree == 0:
            raise InvalidWallError("scattering function base must involve y")
        n = (order - 1) // base.degree
        cs = [_clean(c) for c in list(coeffs)[:n]]
        while cs and not cs[-1]:
            cs.pop()
        self.base = base
        self.coeffs = tuple(cs)
        self.order = order
        self._pow: dict = {}

    @classmethod
    def binomial(cls, m, q, order, c=1) -> "ScatFunction":
        """``1 + c x^m y^q`` expressed over the primitive part of (m, q)."""
        u = ExponentPair.make(m, q)
        prim, g = u.primitive()
        coeffs = [0] * (g - 1) + [c]
        return cls(prim, coeffs, order)

    def __eq__(self, other):
        if not isinstance(other, ScatFunction):
            return NotImplemented
        if self.is_trivial() and other.is_trivial():
            return self.order == other.order
        a, b = self.primitive(), other.primitive()
        return (a.base, a.coeffs, a.order) == (b.base, b.coeffs, b.order)

    def __hash__(self):
        p = self.primitive()
        return hash((p.base, p.coeffs, p.order))

    def __repr__(self):
        return f"ScatFunction(base={tuple(self.base.m)}|{tuple(self.base.q)}, coeffs={list(self.coeffs)}, order={self.order})"

    @property
    def degree(self) -> int:
        """Largest power of the base variable present (0 if trivial)."""
        return len(self.coeffs)

    @property
    def capacity(self) -> int:
        """Largest power of the base variable representable at this order."""
        return (self.order - 1) // self.base.degree

    def possibly_truncated(self) -> bool:
        """True when a higher term could exist beyond the truncation."""
        return self.degree > 0 and self.degree >= self.capacity

    def is_trivial(self) -> bool:
        return not self.coeffs

    def primitive(self) -> "ScatFunction":
        prim, g = self.base.primitive()
        if g == 1:
            return self
        cs = [0] * (g * len(self.coeffs))
        for j, c in enumerate(self.coeffs, start=1):
            cs[g * j - 1] = c
        return ScatFunction(prim, cs, self.order)

    def power_coeffs(self, e: int) -> list:
        """Univariate coefficients of ``f**e`` up to the representable degree."""
        h = self._pow.get(e)
        if h is None:
            h = kernels.upow(list(self.coeffs), e, self.capacity)
            self._pow[e] = h
        return h

    def power(self, e: int) -> "ScatFunction":
        return ScatFunction(self.base, self.power_coeffs(e)[1:], self.order)

    def times(self, other: "ScatFunction") -> "ScatFunction":
        """Product of two functions whose bases are positive multiples of one exponent."""
        a, b = self.primitive(), other.primitive()
        if a.base != b.base:
            raise InvalidWallError("cannot merge functions with different base exponents")
        n = a.capacity
        fa = [1] + list(a.coeffs) + [0] * (n - len(a.coeffs))
        fb = [1] + list(b.coeffs) + [0] * (n - len(b.coeffs))
        prod = [sum(fa[i] * fb[j - i] for i in range(j + 1)) for j in range(n + 1)]
        return ScatFunction(a.base, prod[1:], a.order)

    def with_order(self, order: int) -> "ScatFunction":
        return ScatFunction(self.base, self.coeffs, order)

    def as_series(self) -> TruncatedSeries:
        d, r = len(self.base.m), len(self.base.q)
        terms = {(0,) * (d + r): 1}
        for j, c in enumerate(self.coeffs, start=1):
            if c:
                terms[tuple(j * x for x in self.base.key)] = c
        return TruncatedSeries(terms, self.order, d, r)

    def terms(self):
        """``(j, c_j)`` for the nonzero coefficients."""
        return [(j, c) for j, c in enumerate(self.coeffs, start=1) if c]

    def to_json(self) -> dict:
        return {"base_exponent": {"m": list(self.base.m), "q": list(self.base.q)},
                "coeffs": [c if isinstance(c, int) else str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict, order: int) -> "ScatFunction":
        be = obj["base_exponent"]
        cs = [Fraction(c) if isinstance(c, str) else c for c in obj["coeffs"]]
        return cls(ExponentPair.make(be["m"], be["q"]), cs, order)


def elementary_transform(n: Sequence[int], f: ScatFunction, g: TruncatedSeries,
                         sign: int = 1) -> TruncatedSeries:
    """``E_{sign*n, f}``: each ``x^m y^q`` goes to ``x^m y^q f^(sign * m.n)``."""
    if dual_pair(f.base.m, n) != 0:
        raise InvalidWallError(f"base exponent {f.base.m} is not orthogonal to normal {tuple(n)}")
    if f.is_trivial():
        return g
    d = g.d
    w = f.base.key
    wdeg = f.base.degree
    order = g.order
    out: dict = {}
    for key, c in g.terms.items():
        e = sign * sum(key[i] * n[i] for i in range(d))
        if e == 0:
            out[key] = out.get(key, 0) + c
            if not out[key]:
                del out[key]
            continue
        h = f.power_coeffs(e)
        room = order - sum(key[d:])
        kernels.shift_accumulate(out, key, c, w, wdeg, h, room)
    return TruncatedSeries(out, order, d, g.r, _trusted=True)


# --- specialization -----------------------------------------------------------


class Specialization:
    """``y^{e_i} -> c_i x^{m_i}`` with every ``c_i`` nonzero."""

    def __init__(self, images: Sequence[tuple]):
        imgs = []
        for c, m in images:
            if not c:
                raise DomainError("a specialization may not send a y-variable to zero")
            imgs.append((c, tuple(m)))
        self.images = tuple(imgs)

    @classmethod
    def unit(cls, r: int, d: int = 2) -> "Specialization":
        """The specialization y_i -> 1."""
        return cls([(1, (0,) * d)] * r)

    def __repr__(self):
        return f"Specialization({list(self.images)})"


def specialize(f, nu: Specialization) -> dict:
    """Apply ``nu`` to a series (or a ``{(m, q): c}`` dict); returns ``{m: c}``."""
    if isinstance(f, TruncatedSeries):
        items = [((e.m, e.q), c) for e, c in f.items()]
    else:
        items = [((tuple(m), tuple(q)), c) for (m, q), c in f.items()]
    out: dict = {}
    for (m, q), c in items:
        if len(q) != len(nu.images):
            raise DimensionError("specialization has the wrong number of images")
        coeff = c
        mm = list(m)
        for qi, (ci, mi) in zip(q, nu.images):
            if qi:
                coeff *= ci ** qi
                mm = [a + qi * b for a, b in zip(mm, mi)]
        key = tuple(mm)
        out[key] = out.get(key, 0) + coeff
        if not out[key]:
            del out[key]
    return out


def laurent_pretty(p: Mapping[tuple, object]) -> str:
    if not p:
        return "0"
    return " + ".join(f"{c}*x^{tuple(m)}" for m, c in sorted(p.items()))
