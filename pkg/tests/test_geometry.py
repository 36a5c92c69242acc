import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exq.geometry import (
    BoundaryProximityError,
    Contour,
    Domain,
    DomainFileError,
    GeometryError,
    annulus,
    curvature_integral,
    domain_from_dict,
    domain_to_dict,
    geometric_summary,
    isoperimetric_slack,
    load_domain,
    perturbed_annulus,
)
from helpers import random_domain


def test_annulus_summary():
    s = geometric_summary(annulus(2, 1))
    assert s.area == pytest.approx(3 * np.pi, rel=1e-12)
    assert s.perimeter == pytest.approx(6 * np.pi, rel=1e-12)
    assert s.lambda_min == pytest.approx(1.0, rel=1e-12)
    assert sum(s.component_lengths) == pytest.approx(s.perimeter, rel=1e-14)


def test_ellipse_point_and_curvature():
    e = Contour.ellipse(2, 1)
    assert e.eval(0.0) == pytest.approx(2.0)
    assert e.curvature(0.0) == pytest.approx(2.0, rel=1e-12)
    assert e.curvature(np.pi / 2) == pytest.approx(0.25, rel=1e-12)


def test_circle_tangent_and_unit_conj_tangent():
    c = Contour.circle(1.5)
    t = c.grid(16)
    tau = c.tangent(t)
    z = c.eval(t)
    assert np.allclose(tau, 1j * z / 1.5, atol=1e-14)
    assert np.allclose(c.unit_conj_tangent(t), np.conj(tau), atol=1e-14)


def test_membership():
    dom = annulus(2, 1)
    assert dom.contains(1.5)
    assert not dom.contains(0.5)
    assert not dom.contains(3.0)
    with pytest.raises(BoundaryProximityError):
        dom.contains(2.0 + 1e-12)
    assert not dom.inside(2.0 + 1e-12)


def test_orientation_and_immersion_checks():
    cw = Contour.from_terms({-1: 1.0})
    with pytest.raises(GeometryError):
        cw.validate()
    cusp = Contour.from_terms({1: 1.0, 2: 0.5})  # gamma'(pi) = 0
    with pytest.raises(GeometryError):
        cusp.validate()


def test_nesting_violation():
    dom = Domain(Contour.circle(2), (Contour.circle(1, 1.5),))
    with pytest.raises(GeometryError):
        dom.validate()


def test_curvature_integrals():
    unit = Contour.circle(1.0)
    assert curvature_integral(unit, 1.0, +1) == pytest.approx(4 * np.pi, abs=1e-8)
    assert curvature_integral(Contour.circle(2.0), 1.0, -1) == pytest.approx(2 * np.pi, abs=1e-8)


def test_turning_number():
    assert Contour.ellipse(3, 1).turning() == pytest.approx(2 * np.pi, abs=1e-10)


def test_domain_roundtrip(tmp_path):
    dom = perturbed_annulus(2, 1, {3: 0.05})
    doc = domain_to_dict(dom)
    back = domain_from_dict(json.loads(json.dumps(doc)))
    assert np.allclose(back.outer.coeffs, dom.outer.coeffs)
    p = tmp_path / "d.json"
    p.write_text(json.dumps(doc))
    assert geometric_summary(load_domain(p)).area == pytest.approx(geometric_summary(dom).area)


@pytest.mark.parametrize("doc", [{}, {"contours": []}, {"contours": [{"coeffs": [[1.5, 1, 0]]}]}, {"contours": [{"coeffs": [[1, 1]]}]}])
def test_malformed_documents(doc):
    with pytest.raises(DomainFileError):
        domain_from_dict(doc)


def test_similarity_scaling_of_lambda():
    dom = perturbed_annulus(2, 1, {3: 0.05})
    base = geometric_summary(dom).lambda_min
    moved = geometric_summary(dom.transformed(3 * np.exp(0.7j), 1 - 2j)).lambda_min
    assert moved == pytest.approx(3 * base, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_isoperimetric_slack_nonnegative(seed):
    dom = random_domain(np.random.default_rng(seed))
    s = geometric_summary(dom)
    assert isoperimetric_slack(dom) >= -1e-9 * s.perimeter


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_area_by_green_equals_shoelace(seed):
    dom = random_domain(np.random.default_rng(seed))
    z = dom.outer.eval(dom.outer.grid(8192))
    shoelace = 0.5 * np.sum(np.imag(np.conj(z) * np.roll(z, -1)))
    assert dom.outer.signed_area() == pytest.approx(shoelace, rel=1e-6)
