"""Exact lattice vectors, pairings and symbolic perturbation.

Everything here is integer or ``Fraction`` arithmetic.  A perturbed point is
``base + eps*eps1 + eps**2*eps2`` for an infinitesimal ``eps > 0``; every
quantity derived from it by affine operations with exact coefficients is a
triple of rationals compared lexicographically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = int | Fraction
Vec = tuple  # tuple of ints or Fractions


class DimensionError(ValueError):
    """Vectors of incompatible length were combined."""


class DomainError(ValueError):
    """An operation was applied outside its domain (e.g. the zero vector)."""


class GenericityError(RuntimeError):
    """A perturbation or path turned out to be degenerate."""


def as_rational(x) -> Rational:
    """Coerce ints, Fractions and strings like ``"-3/2"`` to an exact value."""
    if isinstance(x, bool):
        raise TypeError("booleans are not lattice entries")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return as_rational(Fraction(x))
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"refusing inexact float entry {x!r}")
        return int(x)
    raise TypeError(f"not a rational entry: {x!r}")


def vec(entries: Iterable) -> Vec:
    return tuple(as_rational(e) for e in entries)


def int_vec(entries: Iterable) -> tuple[int, ...]:
    out = []
    for e in entries:
        e = as_rational(e)
        if not isinstance(e, int):
            raise DomainError(f"expected an integral vector, got entry {e}")
        out.append(e)
    return tuple(out)


def dual_pair(a: Sequence, b: Sequence) -> Rational:
    """The pairing sum(a_i * b_i)."""
    if len(a) != len(b):
        raise DimensionError(f"cannot pair vectors of length {len(a)} and {len(b)}")
    return sum((x * y for x, y in zip(a, b)), 0)


def vadd(a: Sequence, b: Sequence) -> Vec:
    if len(a) != len(b):
        raise DimensionError("length mismatch in vector sum")
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence, b: Sequence) -> Vec:
    if len(a) != len(b):
        raise DimensionError("length mismatch in vector difference")
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Sequence) -> Vec:
    return tuple(c * x for x in a)


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def primitive_part(v: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Split ``v = g * nu`` with ``g`` the gcd of the entries and ``nu`` primitive."""
    v = int_vec(v)
    g = math.gcd(*v) if v else 0
    if g == 0:
        raise DomainError("the zero vector has no primitive part")
    return tuple(x // g for x in v), g


def primitive_rational(v: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """Primitive integral vector on the ray through a nonzero rational vector.

    Returns ``(nu, lam)`` with ``v = lam * nu`` and ``lam > 0``.
    """
    v = vec(v)
    den = 1
    for x in v:
        if isinstance(x, Fraction):
            den = den * x.denominator // math.gcd(den, x.denominator)
    nu, g = primitive_part([int(x * den) for x in v])
    return nu, Fraction(g, den)


def sign(x) -> int:
    return (x > 0) - (x < 0)


def rot90(d: Sequence) -> Vec:
    """Counterclockwise quarter turn of a planar vector."""
    return (-d[1], d[0])


def cross2(a: Sequence, b: Sequence):
    return a[0] * b[1] - a[1] * b[0]


def solve_unimodular_row(n: Sequence[int]) -> tuple[int, ...]:
    """Some integral ``w`` with ``n . w == 1`` for a primitive planar ``n``."""
    a, b = n
    g, x, y = _ext_gcd(a, b)
    if abs(g) != 1:
        raise DomainError(f"{tuple(n)} is not primitive")
    return (x * g, y * g)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


# --- perturbation -----------------------------------------------------------

PScalar = tuple  # (value, eps-coefficient, eps^2-coefficient)


def psign(t: Sequence) -> int:
    """Lexicographic sign of a perturbed scalar."""
    for x in t:
        if x > 0:
            return 1
        if x < 0:
            return -1
    return 0


def pcmp(a: Sequence, b: Sequence) -> int:
    return psign(tuple(x - y for x, y in zip(a, b)))


@dataclass(frozen=True)
class PerturbedPoint:
    """The point ``base + eps*eps1 + eps^2*eps2`` for infinitesimal ``eps > 0``."""

    base: Vec
    eps1: Vec
    eps2: Vec

    def __post_init__(self):
        object.__setattr__(self, "base", vec(self.base))
        object.__setattr__(self, "eps1", vec(self.eps1))
        object.__setattr__(self, "eps2", vec(self.eps2))
        if not (len(self.base) == len(self.eps1) == len(self.eps2)):
            raise DimensionError("perturbation levels must have equal length")

    @classmethod
    def exact(cls, base: Sequence) -> "PerturbedPoint":
        z = tuple(0 for _ in base)
        return cls(base, z, z)

    @property
    def levels(self) -> tuple[Vec, Vec, Vec]:
        return (self.base, self.eps1, self.eps2)

    def pair(self, functional: Sequence) -> PScalar:
        return tuple(dual_pair(functional, lv) for lv in self.levels)

    def translate(self, shift: Sequence) -> "PerturbedPoint":
        return PerturbedPoint(vadd(self.base, shift), self.eps1, self.eps2)

    def moved(self, t: Sequence, direction: Sequence) -> "PerturbedPoint":
        """``self + t*direction`` for a perturbed scalar ``t`` and exact direction."""
        b = tuple(x + t[0] * d for x, d in zip(self.base, direction))
        e1 = tuple(x + t[1] * d for x, d in zip(self.eps1, direction))
        e2 = tuple(x + t[2] * d for x, d in zip(self.eps2, direction))
        return PerturbedPoint(b, e1, e2)

    def to_json(self) -> dict:
        return {"base": [str(x) for x in self.base],
                "eps1": [str(x) for x in self.eps1],
                "eps2": [str(x) for x in self.eps2]}

    @classmethod
    def from_json(cls, obj: dict) -> "PerturbedPoint":
        return cls(obj["base"], obj.get("eps1", [0] * len(obj["base"])),
                   obj.get("eps2", [0] * len(obj["base"])))


def perturbed_sign(functional: Sequence, p: PerturbedPoint) -> int:
    """Sign of ``functional . p`` decided level by level; 0 means degenerate."""
    return psign(p.pair(functional))


DEFAULT_EPS1 = (1, 7)
DEFAULT_EPS2 = (3, 1)


def perturb(base: Sequence, eps1: Sequence = DEFAULT_EPS1,
            eps2: Sequence = DEFAULT_EPS2) -> PerturbedPoint:
    return PerturbedPoint(base, eps1, eps2)


def fmt_rational(x) -> str:
    return str(as_rational(x))
