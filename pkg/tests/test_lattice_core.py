from fractions import Fraction

import pytest

from artifact.lattice_core import (
    DimensionError,
    DomainError,
    PerturbedPoint,
    as_rational,
    cross2,
    dual_pair,
    pcmp,
    perturbed_sign,
    primitive_part,
    primitive_rational,
    psign,
    rot90,
    solve_unimodular_row,
    vec,
)


def test_as_rational_accepts_exact_inputs():
    assert as_rational("-3/2") == Fraction(-3, 2)
    assert as_rational(Fraction(4, 2)) == 2 and isinstance(as_rational(Fraction(4, 2)), int)
    assert as_rational(3.0) == 3


@pytest.mark.parametrize("bad", [0.5, True, None, [1]])
def test_as_rational_rejects(bad):
    with pytest.raises(TypeError):
        as_rational(bad)


def test_dual_pair_and_lengths():
    assert dual_pair((1, 2), (3, -4)) == -5
    with pytest.raises(DimensionError):
        dual_pair((1, 2), (1, 2, 3))


def test_primitive_part():
    assert primitive_part((4, -6)) == ((2, -3), 2)
    assert primitive_part((0, -5)) == ((0, -1), 5)
    with pytest.raises(DomainError):
        primitive_part((0, 0))


def test_primitive_rational_keeps_direction():
    nu, lam = primitive_rational((Fraction(1, 2), Fraction(3, 4)))
    assert nu == (2, 3) and lam == Fraction(1, 4)
    nu, lam = primitive_rational((-2, 0))
    assert nu == (-1, 0) and lam == 2


@pytest.mark.parametrize("n", [(3, 5), (-7, 2), (1, 0), (0, -1), (12, -5)])
def test_solve_unimodular_row(n):
    w = solve_unimodular_row(n)
    assert dual_pair(n, w) == 1


def test_solve_unimodular_row_needs_primitive():
    with pytest.raises(DomainError):
        solve_unimodular_row((2, 4))


def test_rot90_and_cross():
    assert rot90((1, 0)) == (0, 1)
    assert cross2((1, 0), (0, 1)) == 1
    assert cross2((2, 4), (1, 2)) == 0


def test_perturbed_signs_are_lexicographic():
    assert psign((0, 0, 1)) == 1
    assert psign((0, -1, 5)) == -1
    assert psign((0, 0, 0)) == 0
    assert pcmp((1, 0, 0), (1, 0, -1)) == 1


def test_perturbation_breaks_ties():
    p = PerturbedPoint((1, -1), (1, 7), (3, 1))
    # exactly on the line x + y = 0; eps-level decides: 1 + 7 > 0
    assert perturbed_sign((1, 1), p) == 1
    assert perturbed_sign((-1, -1), p) == -1
    q = PerturbedPoint((0, 0), (0, 0), (0, 0))
    assert perturbed_sign((1, 0), q) == 0


def test_moved_point_levels():
    p = PerturbedPoint((0, 0), (1, 7), (3, 1))
    q = p.moved((Fraction(1, 2), 1, 0), (2, 0))
    assert q.base == (1, 0)
    assert q.eps1 == (3, 7)
    assert q.eps2 == (3, 1)
    assert PerturbedPoint.from_json(q.to_json()) == q


def test_vec_normalizes():
    assert vec(["1/2", 2]) == (Fraction(1, 2), 2)
