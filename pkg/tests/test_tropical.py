import math
from fractions import Fraction
from types import SimpleNamespace

import pytest

from artifact import seed_data as sd
from artifact.broken_lines import enumerate_broken_lines, theta_function
from artifact.lattice_core import GenericityError, PerturbedPoint
from artifact.series_ring import ExponentPair, TruncatedSeries
from artifact.tropical import (
    EXACT,
    INFINITE,
    UNBOUNDED,
    UPPER,
    check_taut,
    covector_levels,
    lambda_taut_trace,
    momentum,
    momentum_levels,
    perturbed_covector,
    rational_rays,
    taut_trace,
    theta_set_valuation,
    tropicalize,
    trop_value,
    val_theta,
    valuation,
    valuation_table_csv,
)

KRON_LAMBDA = ((0, 1), (-1, 0))
VS = [(1, 0), (0, 1), (-1, -2), (1, -1), (-2, -1), (3, 2)]


def test_valuation_of_series():
    f = TruncatedSeries({(1, -1, 0): 1, (-1, 2, 1): 3}, 4, 2, 1)
    assert valuation(f, (1, 0)).value == -1
    assert valuation(f, (1, 0), (5,)).value == 1
    assert valuation(f, (0, 1)).certified == UPPER
    assert valuation(TruncatedSeries({}, 4, 2, 1), (1, 0)).certified == INFINITE


def test_covector_levels_pad_y_entries():
    V = covector_levels((1, 2), 4)
    assert V[0] == (1, 2, 0, 0) and V[1] == (0, 0, 0, 0)
    V = covector_levels(perturbed_covector((1, 2)), 2)
    assert V[1] == (1, 7)
    with pytest.raises(ValueError):
        covector_levels((1, 2, 3), 2)


@pytest.mark.parametrize("u", [(1, -1), (2, -1), (-1, 2), (4, -3), (1, 1)])
def test_val_theta_is_min_over_theta_terms(kron_d10, kron_plus, u):
    th = theta_function(kron_d10, u, kron_plus)
    for v in VS:
        r = val_theta(kron_d10, u, v, kron_plus, 6)
        assert r.certified == EXACT
        assert r.value == trop_value(th.series, v)


def test_loop_element_values(kron_d10, kron_plus):
    # exponents (1,-1), (-1,-1), (-1,1)
    assert val_theta(kron_d10, (1, -1), (1, 0), kron_plus, 6).value == -1
    assert val_theta(kron_d10, (1, -1), (1, -1), kron_plus, 6).value == -2


def test_large_index_is_only_an_upper_bound(kron_d10, kron_plus):
    r = val_theta(kron_d10, (3, -3), (1, 0), kron_plus, 6)
    assert r.certified == UPPER
    assert not r.finite


def test_linearly_falling_minima_are_flagged():
    def line(m, q):
        return SimpleNamespace(final=ExponentPair(m, q))

    d = SimpleNamespace(order=10, r=1)
    lines = [line((0, 0), (0,)), line((-1, 0), (6,)), line((-2, 0), (8,))]
    r = val_theta(d, (0, 0), (1, 0), None, 6, lines)
    assert r.certified == UNBOUNDED and r.value == -2


def test_certification_order_cannot_exceed_diagram(kron_d6, kron_plus):
    with pytest.raises(ValueError):
        val_theta(kron_d6, (1, -1), (1, 0), kron_plus, 8)


def test_theta_set_valuation_scales(kron_d10, kron_plus):
    half = theta_set_valuation(kron_d10, (Fraction(1, 2), Fraction(-1, 2)), (1, 0), kron_plus, 6)
    full = val_theta(kron_d10, (1, -1), (1, 0), kron_plus, 6)
    assert half.value == Fraction(full.value, 2)
    assert theta_set_valuation(kron_d10, (0, 0), (1, 0), kron_plus).value == 0


def test_taut_trace_recovers_the_minimizer(kron, kron_d10, kron_plus):
    d_ref = sd.seed_diagram(kron, 12)
    for u in [(2, -1), (-1, 2), (4, -3), (1, 1)]:
        for n in VS:
            v = perturbed_covector(n)
            r = val_theta(kron_d10, u, v, kron_plus, 6)
            out = taut_trace(kron_d10, v, kron_plus, r.witness.final, d_ref)
            assert out, out.reason
            assert out.line.initial == ExponentPair(u, (0, 0))
            assert out.certificate.ok and not out.certificate.inconclusive


def test_minimizing_lines_are_taut(a2, a2_d10, a2_plus):
    d_ref = sd.seed_diagram(a2, 12)
    for u in [(1, -1), (-1, 0), (0, -1), (-1, 1)]:
        lines = enumerate_broken_lines(a2_d10, u, a2_plus)
        for n in VS:
            v = perturbed_covector(n)
            r = val_theta(a2_d10, u, v, a2_plus, 6, lines)
            cert = check_taut(r.witness, v, a2_d10.r, d_ref)
            assert cert.ok


def test_taut_trace_needs_generic_covector(kron_d10, kron_plus):
    # traced backwards the line crosses the vertical wall, whose exponent (0, 2)
    # pairs to 0 with v = (1, 0)
    with pytest.raises(GenericityError):
        taut_trace(kron_d10, (1, 0), kron_plus, ExponentPair((-1, -1), (0, 1)))


def test_lambda_taut_trace_modes(kron_d10, kron_plus):
    out = lambda_taut_trace(kron_d10, "L", kron_plus, (2, -1))
    assert out and out.line.final == ExponentPair((2, -1), (0, 0))
    with pytest.raises(ValueError):
        lambda_taut_trace(kron_d10, "X", kron_plus, (2, -1))


@pytest.mark.parametrize("u", [(1, -1), (2, -1), (3, -2), (-1, 2), (2, -2)])
def test_momentum_is_conserved(kron_d6, u):
    p = PerturbedPoint((Fraction(1, 2), -3), (1, 7), (3, 1))
    for bl in enumerate_broken_lines(kron_d6, u, p):
        levels = momentum_levels(bl, KRON_LAMBDA)
        assert len(set(levels)) == 1
        assert len(set(momentum(bl, KRON_LAMBDA))) == 1


def test_tropicalization_is_homogeneous(a2_d10, a2_plus):
    for sample in tropicalize(a2_d10, (1, -1), rational_rays(8), a2_plus, 6):
        assert sample.linear


def test_rational_rays_are_primitive_and_distinct():
    rays = rational_rays(24)
    assert len(rays) == len(set(rays)) == 24
    for a, b in rays:
        assert math.gcd(a, b) == 1


def test_csv_table(kron_d10, kron_plus):
    r = val_theta(kron_d10, (1, -1), (1, 0), kron_plus, 6)
    text = valuation_table_csv([((1, -1), (1, 0), r)])
    assert text.splitlines() == ["u,v,value,certified,order", "1 -1,1 0,-1,exact,10"]
