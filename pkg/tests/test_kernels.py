import random
from fractions import Fraction

import pytest

from artifact import _kernels_py, kernels
from artifact.broken_lines import _int_point, _wall_table
from artifact.lattice_core import GenericityError, PerturbedPoint, primitive_part, psign
from artifact.scattering import LINE, RAY, Wall, WallSupport, segment_crossings
from artifact.series_ring import ScatFunction

BACKENDS = kernels.backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_upow_matches_binomial_series(name):
    k = BACKENDS[name]
    assert k.upow([1], 4, 5) == [1, 4, 6, 4, 1, 0]
    assert k.upow([1], -1, 4) == [1, -1, 1, -1, 1]
    assert k.upow([Fraction(1, 2)], 2, 2) == [1, 1, Fraction(1, 4)]


def _rand_series(rng, n):
    out = {}
    for _ in range(n):
        key = (rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(0, 3), rng.randint(0, 3))
        out[key] = rng.choice([-2, -1, 1, 3, Fraction(1, 3)])
    return out


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_backends_agree_on_random_inputs():
    rng = random.Random(7)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(50):
        a, b = _rand_series(rng, 6), _rand_series(rng, 6)
        assert py.mul_terms(a, b, 2, 5) == cy.mul_terms(a, b, 2, 5)
        coeffs = [rng.randint(-2, 2) for _ in range(3)]
        e = rng.randint(-4, 4)
        assert py.upow(coeffs, e, 4) == cy.upow(coeffs, e, 4)
        out1, out2 = dict(a), dict(a)
        key = (1, 0, 0, 1)
        h = py.upow([1, 2], 3, 4)
        py.shift_accumulate(out1, key, 2, (0, 1, 1, 0), 1, h, 4)
        cy.shift_accumulate(out2, key, 2, (0, 1, 1, 0), 1, h, 4)
        assert out1 == out2


def _wall(base, direction, kind, normal):
    m = (-normal[1], normal[0])
    return Wall(WallSupport(base, direction, kind), normal, ScatFunction.binomial(m, (1,), 3))


def test_first_crossing_by_hand():
    walls = [_wall((0, 0), (0, 1), LINE, (1, 0)),
             _wall((3, 0), (0, 1), RAY, (1, 0))]
    P, den = _int_point(PerturbedPoint((-2, 1), (0, 0), (0, 0)))
    res = _kernels_py.first_crossing(_wall_table(walls), P, den, (1, 0), None)
    code, idx, T, Q = res
    assert (code, idx) == (0, 0)
    assert Fraction(T[0], Q) == 2
    # from below the ray's apex the ray wall is missed
    P, den = _int_point(PerturbedPoint((1, -1), (0, 0), (0, 0)))
    assert _kernels_py.first_crossing(_wall_table(walls), P, den, (1, 0), None) is None


def _oracle(walls, pt, D, last):
    """First crossing from the Fraction-based segment_crossings."""
    try:
        cr = segment_crossings(walls, pt, D, exclude_zero=False)
    except GenericityError:
        return "degenerate"
    keep = []
    for t, idx, _ in cr:
        if psign(t) == 0:
            if last is None or idx == last:
                continue
            if idx < last:
                continue
        keep.append((t, idx))
    if not keep:
        return None
    return keep[0]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_first_crossing_matches_fraction_oracle(name):
    impl = BACKENDS[name].first_crossing
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        walls = []
        for _ in range(rng.randint(1, 5)):
            n = (rng.randint(-3, 3), rng.randint(-3, 3))
            if n == (0, 0):
                continue
            n, _ = primitive_part(n)
            base = (Fraction(rng.randint(-6, 6), rng.randint(1, 3)), Fraction(rng.randint(-6, 6), 2))
            kind = rng.choice([LINE, RAY])
            direction = (-n[1], n[0]) if rng.random() < 0.5 else (n[1], -n[0])
            walls.append(_wall(base, direction, kind, n))
        if not walls:
            continue
        pt = PerturbedPoint((Fraction(rng.randint(-9, 9), 2), Fraction(rng.randint(-9, 9), 3)),
                            (1, 7), (3, 1))
        D = (rng.randint(-3, 3), rng.randint(-3, 3))
        if D == (0, 0):
            continue
        expect = _oracle(walls, pt, D, None)
        if expect == "degenerate":
            continue
        P, den = _int_point(pt)
        got = impl(_wall_table(walls), P, den, D, None)
        if expect is None:
            assert got is None
        else:
            t, idx = expect
            assert got[0] == 0
            assert got[1] == idx
            assert tuple(Fraction(x, got[3]) for x in got[2]) == tuple(Fraction(x) for x in t)
        checked += 1
    assert checked > 150


def test_benchmark_runs(capsys):
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    before = {n: getattr(kernels, n) for n in bench.NAMES}
    bench.main(["--repeat", "1", "--order", "4"])
    out = capsys.readouterr().out
    assert "end-to-end" in out and "first_crossing" in out
    assert {n: getattr(kernels, n) for n in bench.NAMES} == before
