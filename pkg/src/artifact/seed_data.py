"""Seed data (P, Q-bullet, D), duals, linear morphisms and Lambda-structures.

Matrices are tuples of rows.  ``P`` and ``Qbullet`` are d x r; column i of
``P`` is the exponent ``P e_i`` and column i of ``Q = Qbullet D`` is the
normal of the i-th initial wall.
"""

from __future__ import annotations

import functools
import math
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy

from .lattice_core import as_rational, primitive_part
from .scattering import (
    LINE,
    ScatteringDiagram,
    Wall,
    WallSupport,
    consistent_completion,
    translate_for_positive_chamber,
)
from .series_ring import ScatFunction, TruncatedSeries


class SeedValidationError(ValueError):
    pass


class MorphismError(ValueError):
    pass


Matrix = tuple  # tuple of row tuples


def mat(rows) -> Matrix:
    return tuple(tuple(as_rational(x) for x in row) for row in rows)


def shape(A: Matrix) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def transpose(A: Matrix, ncols: int | None = None) -> Matrix:
    if not A:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*A))


def matmul(A: Matrix, B: Matrix) -> Matrix:
    n, k = len(A), (len(A[0]) if A else 0)
    if n == 0:  # 0 x k times anything; the row-tuple form cannot record k
        return ()
    if k != len(B):
        raise ValueError(f"cannot multiply {n}x{k} by {len(B)}x?")
    m = len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = 0
            for t in range(k):
                s += A[i][t] * B[t][j]
            row.append(_clean(s))
        out.append(tuple(row))
    return tuple(out)


def matvec(A: Matrix, v: Sequence) -> tuple:
    return tuple(_clean(sum((a * b for a, b in zip(row, v)), 0)) for row in A)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def diag(entries) -> Matrix:
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n))


def neg(A: Matrix) -> Matrix:
    return tuple(tuple(-x for x in row) for row in A)


def column(A: Matrix, j: int) -> tuple:
    return tuple(row[j] for row in A)


def hstack(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a) + tuple(b) for a, b in zip(A, B))


def vstack(*blocks: Matrix) -> Matrix:
    out = []
    for b in blocks:
        out.extend(tuple(r) for r in b)
    return tuple(out)


def zeros(n: int, m: int) -> Matrix:
    return tuple(tuple(0 for _ in range(m)) for _ in range(n))


def _clean(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def is_integral(A: Matrix) -> bool:
    return all(isinstance(_clean(x), int) for row in A for x in row)


def to_sympy(A: Matrix, ncols: int | None = None) -> sympy.Matrix:
    if not A:
        return sympy.zeros(0, ncols or 0)
    return sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in A])


def from_sympy(M: sympy.Matrix) -> Matrix:
    return tuple(tuple(_clean(Fraction(int(x.p), int(x.q))) for x in M.row(i)) for i in range(M.rows))


@dataclass(frozen=True)
class SeedDatum:
    P: Matrix
    Qbullet: Matrix
    D: tuple
    labels: tuple | None = None

    @property
    def d(self) -> int:
        return len(self.P)

    @property
    def r(self) -> int:
        return len(self.D)

    @property
    def Q(self) -> Matrix:
        return matmul(self.Qbullet, diag(self.D)) if self.r else self.Qbullet

    @property
    def Pbullet(self) -> Matrix:
        return matmul(self.P, diag(self.D)) if self.r else self.P

    @property
    def B(self) -> Matrix:
        return matmul(transpose(self.Q, self.r), self.P)

    @property
    def Bbullet(self) -> Matrix:
        return matmul(transpose(self.Qbullet, self.r), self.P)

    def key(self) -> tuple:
        return (self.P, self.Qbullet, self.D)

    def to_json(self) -> dict:
        out = {"P": [[str(x) for x in row] if not is_integral((row,)) else list(row) for row in self.P],
               "Qbullet": [[str(x) for x in row] if not is_integral((row,)) else list(row)
                           for row in self.Qbullet],
               "D": [str(x) for x in self.D]}
        if self.labels:
            out["labels"] = list(self.labels)
        return out


def validate_seed(P, Qbullet, D=None, labels=None) -> SeedDatum:
    """Check the seed axioms and return the datum."""
    P, Qb = mat(P), mat(Qbullet)
    d = len(P)
    if len(Qb) != d:
        raise SeedValidationError(f"P has {d} rows but Qbullet has {len(Qb)}")
    r = len(P[0]) if d else 0
    if any(len(row) != r for row in P) or any(len(row) != r for row in Qb):
        raise SeedValidationError("P and Qbullet must both be d x r")
    if D is None:
        D = (1,) * r
    D = tuple(as_rational(x) for x in D)
    if len(D) != r:
        raise SeedValidationError(f"D has {len(D)} entries, expected {r}")
    if any(x <= 0 for x in D):
        raise SeedValidationError("D must be positive")
    if not is_integral(P):
        raise SeedValidationError("P must be integral")
    s = SeedDatum(P, Qb, D, tuple(labels) if labels else None)
    Q = s.Q
    if not is_integral(Q):
        raise SeedValidationError(f"Q = Qbullet*D = {Q} is not integral")
    for i in range(r):
        if all(x == 0 for x in column(Q, i)):
            raise SeedValidationError(f"column Q e_{i + 1} vanishes")
    Bb = s.Bbullet
    for i in range(r):
        for j in range(r):
            if i == j and Bb[i][i]:
                raise SeedValidationError(
                    f"Bbullet = Qbullet^T P is not skew-symmetric: diagonal entry ({i + 1},{i + 1}) "
                    f"is {Bb[i][i]}")
            if Bb[i][j] != -Bb[j][i]:
                raise SeedValidationError(
                    f"Bbullet = Qbullet^T P is not skew-symmetric: entry ({i + 1},{j + 1}) is "
                    f"{Bb[i][j]} but ({j + 1},{i + 1}) is {Bb[j][i]}")
    return s


def seed_from_json(obj: dict) -> SeedDatum:
    D = obj.get("D")
    return validate_seed(obj["P"], obj["Qbullet"], D, obj.get("labels"))


def load_seed(path) -> SeedDatum:
    with open(path) as fh:
        return seed_from_json(json.load(fh))


# --- diagrams --------------------------------------------------------------------


def initial_diagram(s: SeedDatum, k: int) -> list:
    """Walls ``((Q e_i)^perp, 1 + x^(P e_i) y^(e_i), Q e_i)``, normals made primitive."""
    if s.d != 2:
        raise SeedValidationError("scattering computations need ambient rank 2")
    walls = []
    Q = s.Q
    for i in range(s.r):
        n = tuple(int(x) for x in column(Q, i))
        m = tuple(int(x) for x in column(s.P, i))
        if m[0] * n[0] + m[1] * n[1] != 0:
            raise RuntimeError("P e_i is not orthogonal to Q e_i in a validated seed")
        q = tuple(1 if j == i else 0 for j in range(s.r))
        f = ScatFunction.binomial(m, q, k)
        n0, g = primitive_part(n)
        walls.append(Wall(WallSupport((0, 0), (-n0[1], n0[0]), LINE), n0, f.power(g)))
    return walls


@functools.lru_cache(maxsize=64)
def _completed(key, k: int, offsets) -> ScatteringDiagram:
    s = SeedDatum(*key)
    walls = initial_diagram(s, k)
    if offsets is not None:
        walls = translate_for_positive_chamber(walls, offsets)
    d = consistent_completion(walls, k, s.r, s.Qbullet)
    d.meta["translated"] = offsets is not None
    return d


def seed_diagram(s: SeedDatum, k: int, offsets=None) -> ScatteringDiagram:
    """Consistent completion of the (optionally translated) initial diagram."""
    off = tuple(Fraction(x) for x in offsets) if offsets is not None else None
    d = _completed(s.key(), k, off)
    return ScatteringDiagram(list(d.walls), d.order, d.r, d.qbullet, d.d, dict(d.meta))


def has_positive_chamber(s: SeedDatum) -> bool:
    """Whether some x has x . Q e_i > 0 for all i (strict feasibility, exact LP-free test in rank 2)."""
    from .scattering import chamber_point, ChamberError

    walls = initial_diagram(s, 2)
    try:
        chamber_point(ScatteringDiagram(walls, 2, s.r, s.Qbullet), 1)
        return True
    except ChamberError:
        return False


# --- duals ------------------------------------------------------------------------


def _rescale_D(D: Sequence, Qbullet: Matrix):
    """Scale D to coprime positive integers and Qbullet inversely."""
    den = 1
    for x in D:
        x = Fraction(x)
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(Fraction(x) * den) for x in D]
    g = math.gcd(*ints) if ints else 1
    k = Fraction(den, g)
    D2 = tuple(_clean(Fraction(x) * k) for x in D)
    Qb2 = tuple(tuple(_clean(Fraction(x) / k) for x in row) for row in Qbullet)
    return D2, Qb2


def chiral_dual(s: SeedDatum) -> SeedDatum:
    """``(Qbullet, Pbullet)`` with the same D."""
    if not is_integral(s.Qbullet):
        raise SeedValidationError("the chiral dual needs an integral Qbullet (rescale D first)")
    return validate_seed(s.Qbullet, s.P, s.D)


def chiral_langlands_dual(s: SeedDatum) -> SeedDatum:
    """``(Q, P)``; the symmetrizer becomes ``D^-1`` (rescaled to integers)."""
    Dinv = tuple(_clean(1 / Fraction(x)) for x in s.D)
    Qb = matmul(s.P, diag(tuple(Fraction(x) for x in s.D))) if s.r else s.P
    D2, Qb2 = _rescale_D(Dinv, Qb)
    return validate_seed(s.Q, Qb2, D2)


def langlands_dual(s: SeedDatum) -> SeedDatum:
    """``(Q, -P)``."""
    cl = chiral_langlands_dual(s)
    return validate_seed(cl.P, neg(cl.Qbullet), cl.D)


def negate_q(s: SeedDatum) -> SeedDatum:
    """``(P, -Q)``: the same walls with positive and negative sides swapped."""
    return validate_seed(s.P, neg(s.Qbullet), s.D)


# --- linear morphisms ---------------------------------------------------------------


@dataclass(frozen=True)
class LinearMorphism:
    A: Matrix
    source: SeedDatum
    target: SeedDatum
    integral: bool


def check_linear_morphism(A, s: SeedDatum, t: SeedDatum) -> LinearMorphism:
    """Verify ``A P = P'`` and ``A^T Q' = Q``."""
    A = mat(A)
    if s.B != t.B:
        raise MorphismError(f"exchange matrices differ: {s.B} vs {t.B}")
    if len(A) != t.d or (A and len(A[0]) != s.d):
        raise MorphismError(f"A must be {t.d}x{s.d}")
    AP = matmul(A, s.P)
    if AP != t.P:
        raise MorphismError(f"A P = {AP} differs from P' = {t.P}")
    AtQ = matmul(transpose(A, s.d), t.Q)
    if AtQ != s.Q:
        raise MorphismError(f"A^T Q' = {AtQ} differs from Q = {s.Q}")
    return LinearMorphism(A, s, t, is_integral(A))


def adjoint_morphism(phi: LinearMorphism) -> LinearMorphism:
    """``A^T`` between the chiral-Langlands duals, in the reverse direction."""
    return check_linear_morphism(transpose(phi.A, phi.source.d),
                                 chiral_langlands_dual(phi.target), chiral_langlands_dual(phi.source))


def rho_transport(phi, f: TruncatedSeries) -> TruncatedSeries:
    """``x^m y^q -> x^(A m) y^q``."""
    A = phi.A if isinstance(phi, LinearMorphism) else mat(phi)

    def move(m, q, c):
        image = matvec(A, m)
        if not all(isinstance(_clean(x), int) for x in image):
            raise MorphismError(f"exponent {m} maps to the non-lattice point {image}")
        return tuple(int(x) for x in image), q, c

    return f.map_terms(move)


def saturated_resolution(s: SeedDatum):
    """``(P,Q) -A-> (P',Q') <-B- (P'',Q'')`` with ``(P'',Q'')`` saturated-injective."""
    d, r = s.d, s.r
    I = identity(r)
    Z = zeros(r, r)
    P1 = vstack(s.P, Z)
    Q1 = vstack(s.Q, I)
    P2 = vstack(s.P, Z, I)
    Q2 = vstack(s.Q, I, Z)
    s1 = validate_seed(P1, _qbullet_from(Q1, s.D), s.D)
    s2 = validate_seed(P2, _qbullet_from(Q2, s.D), s.D)
    A = vstack(identity(d), zeros(r, d))
    B = hstack(identity(d + r), zeros(d + r, r))
    return s1, s2, check_linear_morphism(A, s, s1), check_linear_morphism(B, s2, s1)


def _qbullet_from(Q: Matrix, D) -> Matrix:
    return tuple(tuple(_clean(Fraction(x) / Fraction(D[j])) for j, x in enumerate(row)) for row in Q)


# --- Lambda structures ----------------------------------------------------------------


@dataclass(frozen=True)
class LambdaStructure:
    L: Matrix

    def check(self, s: SeedDatum) -> bool:
        return (matmul(self.L, s.P) == _clean_mat(s.Qbullet)
                and matmul(transpose(self.L), s.P) == _clean_mat(neg(s.Qbullet)))


def _clean_mat(A: Matrix) -> Matrix:
    return tuple(tuple(_clean(x) for x in row) for row in A)


@dataclass(frozen=True)
class LambdaAbsent:
    witness: tuple  # v with P v = 0 but Qbullet v != 0, when one exists


def lambda_find(s: SeedDatum):
    """Solve ``L P = Qbullet`` and ``L^T P = -Qbullet``; free parameters are set to 0."""
    d, r = s.d, s.r
    if r == 0:
        # no equations: L = 0 qualifies
        return LambdaStructure(zeros(d, d))
    syms = sympy.symbols(f"l0:{d * d}")
    L = sympy.Matrix(d, d, syms)
    P = to_sympy(s.P, r)
    Qb = to_sympy(s.Qbullet, r)
    eqs = list(L * P - Qb) + list(L.T * P + Qb)
    sol = sympy.linsolve(eqs, syms)
    if not sol:
        return LambdaAbsent(_kernel_witness(s))
    (vals,) = tuple(sol)
    subs = {x: 0 for x in syms}
    numeric = [sympy.nsimplify(v.subs(subs)) for v in vals]
    Lm = tuple(tuple(_clean(Fraction(int(sympy.Rational(numeric[i * d + j]).p),
                                     int(sympy.Rational(numeric[i * d + j]).q)))
                     for j in range(d)) for i in range(d))
    lam = LambdaStructure(Lm)
    if not lam.check(s):
        raise RuntimeError("Lambda solution failed verification")
    return lam


def _kernel_witness(s: SeedDatum):
    P = to_sympy(s.P, s.r)
    Qb = to_sympy(s.Qbullet, s.r)
    for v in P.nullspace():
        if any(x != 0 for x in Qb * v):
            den = sympy.ilcm(*[x.q for x in v]) if len(v) else 1
            return tuple(int(x * den) for x in v)
    return ()


def lambda_invertible_extension(s: SeedDatum, lam: LambdaStructure):
    """``M' = M + N``, ``P'v = (Pv, 0)``, ``Q'v = (Qv, P.v)``, ``L'(m, n) = (Lm - n, m)``."""
    if not lam.check(s):
        raise ValueError("not a Lambda-structure for this seed")
    d, r = s.d, s.r
    P1 = vstack(s.P, zeros(d, r))
    Qb1 = vstack(s.Qbullet, s.P)
    s1 = validate_seed(P1, Qb1, s.D)
    I, Z = identity(d), zeros(d, d)
    L1 = vstack(hstack(lam.L, neg(I)), hstack(I, Z))
    lam1 = LambdaStructure(_clean_mat(L1))
    if not lam1.check(s1):
        raise RuntimeError("extended Lambda fails its defining equations")
    if to_sympy(L1).det() == 0:
        raise RuntimeError("extended Lambda is not invertible")
    A = vstack(identity(d), zeros(d, d))
    phi = check_linear_morphism(A, s, s1)
    if matmul(matmul(transpose(A), L1), A) != _clean_mat(lam.L):
        raise RuntimeError("congruence A^T L' A = L fails")
    return s1, lam1, phi


def lambda_inverse(lam1: LambdaStructure, d: int):
    """The inverse ``(n, m) -> (m, L m - n)`` of an extended Lambda, as a function."""
    L = tuple(row[:d] for row in lam1.L[:d])

    def inv(v):
        n, m = tuple(v[:d]), tuple(v[d:])
        Lm = matvec(L, m)
        return m + tuple(_clean(a - b) for a, b in zip(Lm, n))

    return inv


# --- standard seeds -------------------------------------------------------------------


def a2_seed() -> SeedDatum:
    return validate_seed([[0, -1], [1, 0]], [[1, 0], [0, 1]])


def kronecker_seed() -> SeedDatum:
    return validate_seed([[0, -2], [2, 0]], [[1, 0], [0, 1]])


def three_wall_seed() -> SeedDatum:
    """Rank-2 seed with three initial walls and no positive chamber."""
    return validate_seed([[0, -1, 1], [1, 0, -1]], [[1, 0, -1], [0, 1, -1]])


def torus_seed() -> SeedDatum:
    return validate_seed([[], []], [[], []], [])


def kronecker_extension_seed(q3=(-1, -1)) -> SeedDatum:
    """The Kronecker seed with a third column ``(p3, q3)``, ``p3 = (-2 q3_2, 2 q3_1)``.

    The default ``q3 = (-1, -1)`` gives ``b_13 = -2``, ``b_23 = 2``.  Every
    exponent of the loop element then pairs nonnegatively with ``q3``, which is
    what the arrow conditions ``b_23 >= 0``, ``b_13 + b_23 >= 0`` express when
    the third vertex has its own coordinate.  There is no positive chamber, so
    diagrams of this seed are built with translated walls.
    """
    a, b = q3
    return validate_seed([[0, -2, -2 * b], [2, 0, 2 * a]], [[1, 0, a], [0, 1, b]])


def arrow_numbers(s: SeedDatum) -> Matrix:
    """``b_ij = P e_i . Q e_j``, the number of arrows from i to j."""
    return transpose(s.B)
