from fractions import Fraction

import pytest

from artifact import seed_data as sd
from artifact.broken_lines import (
    as_exponent,
    enumerate_broken_lines,
    is_finite_at,
    limit_theta,
    line_trace_json,
    next_wall,
    stabilize,
    structure_constants,
    theta_expansion,
    theta_function,
    transport,
)
from artifact.lattice_core import GenericityError, PerturbedPoint
from artifact.scattering import PlanarPath
from artifact.series_ring import ExponentPair, Specialization, specialize

EPS = ((1, 7), (3, 1))


def test_loop_element_has_three_terms(kron_d6, kron_plus):
    th = theta_function(kron_d6, (1, -1), kron_plus, keep_lines=True)
    assert th.series.terms == {(1, -1, 0, 0): 1, (-1, -1, 0, 1): 1, (-1, 1, 1, 1): 1}
    # (x1^2 + x2^2 + 1) / (x1 x2) after y -> 1
    assert specialize(th.series, Specialization.unit(2)) == {(1, -1): 1, (-1, 1): 1, (-1, -1): 1}
    assert len(th.lines) == 3
    assert sorted(len(bl.bends) for bl in th.lines) == [0, 1, 2]


def test_loop_square_is_chebyshev(kron_d6, kron_plus):
    ell = theta_function(kron_d6, (1, -1), kron_plus).series
    exp = theta_expansion(ell * ell, kron_d6, kron_plus)
    # l^2 = theta_(2,-2) + 2 y1 y2 theta_0, the y -> 1 image of T_2(l) = l^2 - 2
    assert exp == {ExponentPair((2, -2), (0, 0)): 1, ExponentPair((0, 0), (1, 1)): 2}
    assert structure_constants(kron_d6, [(1, -1), (1, -1)], (2, -2)) == 1


def test_theta_of_zero_is_one(kron_d6, kron_plus):
    assert theta_function(kron_d6, (0, 0), kron_plus).series.terms == {(0, 0, 0, 0): 1}


def test_theta_in_positive_chamber_is_monomial(a2_d6, a2_plus):
    # the basepoint sees u = (1, 2) without any wall on the way in
    th = theta_function(a2_d6, (1, 2), a2_plus)
    assert th.series.terms == {(1, 2, 0, 0): 1}


@pytest.mark.parametrize("u,v", [((1, 0), (1, -1)), ((-1, 0), (-1, -1)), ((0, 1), (-1, 1)),
                                 ((1, -1), (2, -1))])
def test_theta_multiplicative_within_a_chamber(a2_d10, a2_plus, u, v):
    # u and v span a cone inside one chamber closure, so no structure constants appear
    tu = theta_function(a2_d10, u, a2_plus).series
    tv = theta_function(a2_d10, v, a2_plus).series
    w = (u[0] + v[0], u[1] + v[1])
    prod = (tu * tv).truncate(6)
    assert prod == theta_function(a2_d10, w, a2_plus, k=6).series


def test_a2_exchange_relation(a2_d10, a2_plus):
    # across the ray (1,-1): theta_(1,0) theta_(0,-1) = theta_(1,-1) + y-shifted theta_0
    a = theta_function(a2_d10, (1, 0), a2_plus).series
    b = theta_function(a2_d10, (0, -1), a2_plus).series
    exp = theta_expansion((a * b).truncate(6), a2_d10.truncate(6), a2_plus)
    assert all(c > 0 for c in exp.values())
    assert ExponentPair((1, -1), (0, 0)) in exp


@pytest.mark.parametrize("u", [(1, -1), (2, -1), (-1, 2), (3, -2), (0, -1)])
def test_transport_matches_direct(kron_d6, u):
    p = PerturbedPoint((1, 1), *EPS)
    q = PerturbedPoint((-2, 1), *EPS)
    r = PerturbedPoint((1, -3), *EPS)
    th = theta_function(kron_d6, u, p)
    for end in (q, r):
        moved = transport(kron_d6, th, PlanarPath.segment(p, end))
        assert moved.series == theta_function(kron_d6, u, end).series


def test_transport_needs_matching_start(kron_d6, kron_plus):
    th = theta_function(kron_d6, (1, -1), kron_plus)
    other = PerturbedPoint((5, 5), *EPS)
    with pytest.raises(ValueError):
        transport(kron_d6, th, PlanarPath.segment(other, kron_plus))


def test_limit_theta_on_a_wall(a2_d6):
    # (2, 0) lies on the horizontal wall; approach from above and from below
    above = limit_theta(a2_d6, (-1, 1), (2, 0), (0, 1))
    below = limit_theta(a2_d6, (-1, 1), (2, 0), (0, -1))
    pa = PerturbedPoint((2, Fraction(1, 3)), *EPS)
    pb = PerturbedPoint((2, Fraction(-1, 3)), *EPS)
    near_a = theta_function(a2_d6, (-1, 1), pa)
    assert above.series == near_a.series
    assert below.series == theta_function(a2_d6, (-1, 1), pb).series
    assert above.series != below.series
    assert transport(a2_d6, near_a, PlanarPath.segment(pa, pb)).series == below.series


def test_limit_at_origin_depends_on_direction(kron_d6):
    a = limit_theta(kron_d6, (1, -1), (0, 0), (1, 1))
    b = limit_theta(kron_d6, (1, -1), (0, 0), (1, -3))
    assert a.series != b.series
    assert a.series == theta_function(kron_d6, (1, -1), PerturbedPoint((1, 1), *EPS)).series
    assert b.series == theta_function(kron_d6, (1, -1), PerturbedPoint((1, -3), *EPS)).series


def test_nongeneric_basepoint_raises(a2_d6):
    p = PerturbedPoint((2, 0), (0, 0), (0, 0))
    with pytest.raises(GenericityError):
        theta_function(a2_d6, (-1, 1), p)


def test_lines_end_at_basepoint_with_consistent_bends(kron_d6, kron_plus):
    lines = enumerate_broken_lines(kron_d6, (2, -1), kron_plus)
    assert lines
    for bl in lines:
        mons = bl.monomials()
        assert mons[0] == (1, bl.initial)
        assert mons[-1][1] == bl.final
        for e in bl.bends:
            c_in, u_in = e.in_monomial
            c_out, u_out = e.out_monomial
            # a bend adds a positive multiple of the wall exponent
            base = kron_d6.walls[e.wall_index].function.base
            assert u_out == u_in + base.scaled(e.multiple)
            assert e.multiple > 0
    js = line_trace_json(lines)
    assert len(js) == len(lines) and "final" in js[0]


def test_next_wall_returns_first_hit(a2_d6):
    p = PerturbedPoint((-3, 1), *EPS)
    idx, X = next_wall(a2_d6.walls, p, (1, 0))
    assert a2_d6.walls[idx].normal == (1, 0)
    assert X.base == (0, 1)
    assert next_wall(a2_d6.walls, PerturbedPoint((1, 1), *EPS), (1, 1)) is None


def test_stabilize_and_finiteness(kron, kron_plus):
    th, ok = stabilize(lambda k: sd.seed_diagram(kron, k), (1, -1), kron_plus, 4)
    assert ok and th.stabilized
    assert is_finite_at(th, 4)
    # theta_(3,-3) has terms of y-degree 6, which an order-6 computation cuts
    big = theta_function(sd.seed_diagram(kron, 8), (3, -3), kron_plus)
    assert not is_finite_at(big, 6)
    assert is_finite_at(big, 8)


def test_as_exponent_forms():
    assert as_exponent((1, 2), 2) == ExponentPair((1, 2), (0, 0))
    assert as_exponent(((1, 2), (0, 1)), 2) == ExponentPair((1, 2), (0, 1))


def test_asking_beyond_diagram_order(a2_d6, a2_plus):
    with pytest.raises(ValueError):
        theta_function(a2_d6, (1, 0), a2_plus, k=8)
