import numpy as np
import pytest

from exq.analytic import RationalFunction
from exq.geometry import Contour, Domain, annulus
from exq.quaddiff import (
    BranchError,
    Rect,
    argument_count,
    boundary_metric_check,
    classify,
    find_zeros,
    render_svg,
    sqrt_tracked,
    stokes_graph,
    trace_trajectory,
)

ANNULUS_FP = RationalFunction.pole(0, [0, -2])


def test_find_zeros_examples():
    z = find_zeros(RationalFunction.polynomial([-1, 0, 1]), (-2, 2, -2, 2))
    assert sorted((round(q.location.real, 12), q.order) for q in z) == [(-1.0, 1), (1.0, 1)]
    (z3,) = find_zeros(RationalFunction.polynomial([0, 0, 0, 1]), (-1, 1, -1, 1))
    assert z3.order == 3 and abs(z3.location) < 1e-8
    assert find_zeros(ANNULUS_FP, (-2.5, 2.5, -2.5, 2.5)) == []


def test_total_multiplicity_matches_global_count():
    rng = np.random.default_rng(4)
    roots = rng.uniform(-1, 1, 5) + 1j * rng.uniform(-1, 1, 5)
    fp = RationalFunction.polynomial(np.poly(roots)[::-1])
    box = (-1.3, 1.4, -1.2, 1.35)
    zs = find_zeros(fp, box)
    assert sum(q.order for q in zs) == argument_count(fp, box) == 5
    for q in zs:
        assert abs(fp(q.location)) < 1e-10


def test_find_zeros_black_box_callable():
    zs = find_zeros(lambda z: np.sin(z), (-4, 4, -1, 1.1))
    assert sorted(round(q.location.real, 8) for q in zs) == pytest.approx([-np.pi, 0.0, np.pi])


def test_sqrt_tracked_examples():
    path = np.linspace(0, 1, 11) + 0j
    assert np.allclose(sqrt_tracked(lambda z: np.ones_like(z), path), 1.0)
    circ = np.exp(1j * np.linspace(0, 2 * np.pi, 200))
    r = sqrt_tracked(lambda z: z, circ)
    assert r[-1] == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(r**2, circ, rtol=1e-12)
    r2 = sqrt_tracked(lambda z: z**2, circ)
    assert r2[-1] == pytest.approx(r2[0], abs=1e-12)


def test_sqrt_tracked_branch_failure():
    with pytest.raises(BranchError):
        sqrt_tracked(lambda z: z, np.array([1.0, -1.0 + 0j]))


def test_closed_circle_trajectory():
    arc = trace_trajectory(ANNULUS_FP, 1.5, "plus", 100, Rect(-2.5, 2.5, -2.5, 2.5))
    assert arc.end_type == "closed"
    assert arc.closure_gap < 1e-6 * 5
    assert np.ptp(np.abs(arc.points)) < 1e-8
    assert arc.drift <= arc.drift_bound


def test_straight_trajectory():
    arc = trace_trajectory(RationalFunction.polynomial([1]), 0j, "plus", 10, Rect(-2, 2, -1, 1))
    assert arc.end_type == "boundary"
    assert np.max(np.abs(arc.points.imag)) < 1e-12
    vert = trace_trajectory(RationalFunction.polynomial([1]), 0j, "minus", 10, Rect(-2, 2, -1, 1))
    assert np.max(np.abs(vert.points.real)) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_arc_structure_at_monomial_zero(m):
    fp = RationalFunction.polynomial([0] * m + [1])
    g = stokes_graph(fp, Rect(-1, 1.1, -1.05, 1))
    assert len(g.arcs_from(0, "plus")) == m + 2
    assert len(g.arcs_from(0, "minus")) == m + 2
    assert g.check_invariants() == []
    ang = np.sort([a.departure_angle % (2 * np.pi) for a in g.arcs_from(0, "plus")])
    assert np.allclose(np.diff(ang), 2 * np.pi / (m + 2), atol=1e-3)


def test_rotated_leading_coefficient():
    fp = RationalFunction.polynomial([0, 1j])
    g = stokes_graph(fp, Rect(-1, 1, -1, 1))
    for a in g.arcs_from(0, "plus"):
        z = a.points[5]
        # horizontal: (2/3) sqrt(a) z^(3/2) real, i.e. Im(a z^3) = 0
        assert abs((1j * z**3).imag) < 1e-6 * abs(z) ** 3


def test_two_zero_graph_has_connecting_arc():
    g = stokes_graph(RationalFunction.polynomial([-1, 0, 1]), Rect(-2, 2.1, -2, 2.05))
    ends = [a.end_type for a in g.arcs]
    assert "zero" in ends
    assert set(ends) <= {"zero", "boundary"}


def test_boundary_metric_examples():
    dom = annulus(2, 1)
    res = boundary_metric_check(dom, RationalFunction.pole(0, [2]), 1.0)
    assert max(res) < 1e-10
    assert boundary_metric_check(dom, RationalFunction(), 0.0) == pytest.approx([1.0, 1.0])


def test_classification_examples():
    dom = annulus(2, 1)
    g = stokes_graph(ANNULUS_FP, dom)
    c = classify(g, dom, ANNULUS_FP, n_samples=4, seed=1)
    assert c.graph_arcs == 0 and c.boundary_ending_count == 0 and c.maximal
    disk = Domain(Contour.circle(1.0))
    fz = RationalFunction.polynomial([0, 1])
    gz = stokes_graph(fz, disk)
    assert [a.end_type for a in gz.arcs_from(0, "plus")] == ["boundary"] * 3
    assert not classify(gz, disk, fz, n_samples=3).maximal
    fc = RationalFunction.polynomial([1])
    assert not classify(stokes_graph(fc, disk), disk, fc, n_samples=3).maximal


def test_svg_and_csv_are_deterministic():
    fp = RationalFunction.polynomial([0, 1])
    r = Rect(-1, 1, -1, 1)
    a, b = stokes_graph(fp, r), stokes_graph(fp, r)
    assert render_svg(a, r) == render_svg(b, r)
    assert a.to_csv() == b.to_csv()
    svg = render_svg(a, r)
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="1024" height="1024"')
