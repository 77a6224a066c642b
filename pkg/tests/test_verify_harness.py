import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from artifact import seed_data as sd
from artifact import verify_harness as vh
from artifact.broken_lines import theta_function
from artifact.scattering import chamber_point
from artifact.series_ring import Specialization


def test_report_bookkeeping():
    rep = vh.CheckReport("demo", {"k": 6})
    assert rep.record({"a": 1}, 2, 2)
    assert not rep.record({"a": 2}, Fraction(1, 2), 1)
    rep.skip({"a": 3}, "x:upper-bound")
    rep.skip({"a": 4}, "x:upper-bound")
    assert rep.instances == 4 and rep.passes == 1
    assert not rep.ok
    assert rep.skip_reasons() == {"x:upper-bound": 2}
    data = json.loads(rep.dumps())
    assert data["failures"][0]["expected"] == "1/2"
    assert rep.summary().startswith("FAIL demo: 1/4 passed, 1 failed, 2 skipped")


def test_child_failure_propagates():
    parent, child = vh.CheckReport("p"), vh.CheckReport("c")
    child.record({}, 1, 2)
    parent.children.append(child)
    assert not parent.ok


def test_box_points():
    pts = vh.box_points(1)
    assert len(pts) == 8 and (0, 0) not in pts
    assert vh.box_points((0, 1)) == [(0, 1), (1, 0), (1, 1)]


def test_side_val_rational_index(kron):
    side = vh.Side(kron, 10, 6)
    whole = vh.side_val(side, (2, -2), (1, 0))
    half = vh.side_val(side, (1, -1), (1, 0))
    assert whole.value == 2 * half.value


def test_vit_on_fixed_combination(kron_d10, kron_plus):
    rep = vh.vit_check(kron_d10, {(1, -1): 2, (2, -1): -3, (-1, 2): 1}, [(1, 0), (0, 1), (-2, -1)],
                       kron_plus, 6)
    assert rep.ok and rep.passes == 3


def test_vit_detects_cancellation(kron_d10, kron_plus):
    # theta - theta is zero; valuation +infinity is not the min of the two
    rep = vh.vit_check(kron_d10, {(1, -1): 1}, (1, 0), kron_plus, 6)
    assert rep.ok
    bad = vh.CheckReport("vit")
    vh._compare(bad, {}, vh.side_val(vh.Side(sd.kronecker_seed(), 10, 6), (1, -1), (1, 0)),
                vh.side_val(vh.Side(sd.kronecker_seed(), 10, 6), (2, -1), (1, 0)), ("a", "b"))
    assert not bad.ok


@pytest.mark.parametrize("make", [sd.a2_seed, sd.kronecker_seed])
def test_random_vit_suite_small(make):
    rep = vh.random_vit_suite(make(), n_combos=6, n_covectors=6)
    assert rep.ok
    assert rep.passes > 0


@pytest.mark.parametrize("variant", ["chiral", "chiral_langlands", "langlands"])
def test_reciprocity_small_box(a2, variant):
    rep = vh.reciprocity_check(a2, box=1, variant=variant)
    assert rep.ok, rep.failures[:3]
    assert rep.passes > 0


def test_reciprocity_kronecker_lambda_form(kron):
    rep = vh.reciprocity_check(kron, box=1)
    assert rep.ok
    assert [c.name for c in rep.children] == ["reciprocity-lambda"]
    assert rep.children[0].passes > 0


def test_lambda_form_absent_is_reported():
    s = sd.validate_seed([[1, -1], [0, 0]], [[0, 0], [1, 1]])
    rep = vh.lambda_reciprocity_check(s, box=1)
    assert rep.instances == 0 or rep.skipped


def test_tautness_small(kron):
    side = vh.Side(kron, 10, 6)
    rep = vh.tautness_check(side, vh.box_points(2), vh.rational_rays(6))
    assert rep.ok and rep.passes > 0


def test_extension_keeps_loop_element():
    kron, ext = sd.kronecker_seed(), sd.kronecker_extension_seed()
    rep = vh.extension_check(kron, ext, [(1, -1), (2, -2), (1, 0)])
    assert rep.ok
    assert rep.passes >= 2


def test_extension_rejects_unrelated_columns():
    with pytest.raises(ValueError):
        vh.extension_check(sd.a2_seed(), sd.kronecker_extension_seed(), [(1, -1)])


def test_newton_vertices_exact():
    square = [(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0)]
    assert vh.newton_vertices(square) == [(0, 0), (0, 2), (2, 0), (2, 2)]
    seg = [(0, 0, 1), (1, 1, 1), (3, 3, 1)]
    assert vh.newton_vertices(seg) == [(0, 0, 1), (3, 3, 1)]
    # a planar hull inside 4 coordinates
    flat = [(0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 0, 1), (1, 1, 1, 1), (0, 0, 0, 0)]
    assert len(vh.newton_vertices(flat)) == 4
    # tetrahedron plus its centroid: the centroid is not a vertex
    tet = [(0, 0, 0), (4, 0, 0), (0, 4, 0), (0, 0, 4), (1, 1, 1)]
    assert vh.newton_vertices(tet) == [(0, 0, 0), (0, 0, 4), (0, 4, 0), (4, 0, 0)]


def test_newton_monic_on_loop_element(kron_d10, kron_plus):
    th = vh.stable_theta(kron_d10, (1, -1), kron_plus, 6)
    assert th is not None and th.stabilized
    rep = vh.newton_monic_check(th)
    assert rep.ok and rep.passes == 3
    with pytest.raises(ValueError):
        vh.newton_monic_check(theta_function(kron_d10, (1, -1), kron_plus))


def test_specialization_keeps_independence(kron_d10, kron_plus):
    thetas = [vh.stable_theta(kron_d10, u, kron_plus, 6) for u in [(1, -1), (2, -1), (-1, 2), (1, 0)]]
    rep = vh.specialization_independence_check(thetas, Specialization.unit(2), vh.rational_rays(6),
                                               trials=5)
    assert rep.ok


def test_adjunction(a2):
    t = sd.validate_seed(sd.matmul(((1, 1), (0, 1)), a2.P), [[1, 0], [-1, 1]])
    phi = sd.check_linear_morphism([[1, 1], [0, 1]], a2, t)
    rep = vh.adjunction_check(phi, vh.box_points(1), vh.box_points(1))
    assert rep.ok and rep.passes > 0


def test_superlevel_set(a2_d10, a2_plus):
    out = vh.superlevel_points([(1, 0), (0, 1)], 0, 2, a2_d10, a2_plus, 6)
    # theta_(1,0) and theta_(0,1) are monomials at the positive chamber
    assert set(out) == {(a, b) for a in range(3) for b in range(3)}
    assert out.skipped == []


def test_render_svg_is_deterministic(a2_d6, a2_plus):
    th = theta_function(a2_d6, (1, -1), a2_plus, keep_lines=True)
    a = vh.render_svg(a2_d6, th.lines, shade=1)
    b = vh.render_svg(a2_d6, th.lines, shade=1)
    assert a == b
    root = ET.fromstring(a)
    assert root.tag.endswith("svg")
    assert "polygon" in a
