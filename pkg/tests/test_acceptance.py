"""Acceptance criteria 1-14, one check per criterion.

Run with pytest for one test per criterion, or as a script
(``python3 tests/test_acceptance.py``) for a plain pass/fail listing.
"""

from __future__ import annotations

import filecmp
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from exq.analytic import MobiusMap, RationalFunction, cauchy_derivatives, mobius_compose_schwarzian_check, schwarzian  # noqa: E402
from exq.appendix import (  # noqa: E402
    ConformalMap,
    curvature_pair_checks,
    mobius_pair_identities,
    mu_checks,
    polar_curvature,
    polar_profile,
)
from exq.cli import main as cli_main  # noqa: E402
from exq.extremal import (  # noqa: E402
    Basis,
    Verdict,
    boundary_residual,
    extremality_report,
    fit_best_phi,
    monodromy_sum,
    riccati_residual,
    vacuum_solution,
)
from exq.geometry import Contour, annulus, curvature_integral, geometric_summary, isoperimetric_slack, perturbed_annulus  # noqa: E402
from exq.odewkb import local_series, solve_ode, wkb_error_scaling  # noqa: E402
from exq.quaddiff import Rect, stokes_graph, trace_trajectory  # noqa: E402
from helpers import random_contour, random_domain  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def annulus_phi(R1, R2):
    return RationalFunction.pole(0, [R1 * R2])


def criterion_1():
    s = geometric_summary(annulus(2, 1))
    s3 = geometric_summary(annulus(3, 1))
    errs = [
        abs(s.area - 3 * np.pi) / (3 * np.pi),
        abs(s.perimeter - 6 * np.pi) / (6 * np.pi),
        abs(s.lambda_min - 1.0),
        abs(s3.lambda_min - 2.0) / 2.0,
    ]
    return max(errs) < 1e-12, f"max relative error {max(errs):.2e}"


def criterion_2():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        R1 = rng.uniform(1.0, 5.0)
        R2 = rng.uniform(0.1, 0.9) * R1
        dom = annulus(R1, R2)
        phi = annulus_phi(R1, R2)
        for k, c in enumerate(dom.contours):
            t = c.grid(512)
            worst = max(
                worst,
                float(np.max(np.abs(boundary_residual(dom, phi, R1 - R2, k, t)))),
                float(np.max(np.abs(riccati_residual(dom, phi.derivative(), R1 - R2, k, t)))),
            )
    return worst < 1e-10, f"max residual {worst:.2e} over 10 radius pairs"


def criterion_3():
    fit = fit_best_phi(annulus(2, 1), Basis(8, 8))
    coef = fit.phi.poles[0].coeffs[0]
    ok = abs(coef - 2.0) <= 1e-4 and abs(fit.achieved_norm - 1.0) <= 1e-6
    rng = np.random.default_rng(3)
    worst = np.inf
    for _ in range(20):
        dom = random_domain(rng)
        lam = geometric_summary(dom).lambda_min
        f = fit_best_phi(dom, Basis(4, 4), 256)
        worst = min(worst, f.achieved_norm - (lam - 1e-6))
    ok = ok and worst >= 0
    return ok, (
        f"pole coefficient {complex(coef):.8f}, norm {fit.achieved_norm:.9f}; "
        f"min(norm - lambda_m + 1e-6) over 20 domains {worst:.3e}"
    )


def criterion_4():
    dom = perturbed_annulus(2, 1, {3: 0.05})
    rep = extremality_report(dom)
    gap = rep.achieved_norm - rep.lambda_min
    ok = gap > 1e-3 and rep.verdict is Verdict.NOT_EXTREMAL
    return ok, f"norm - lambda_m = {gap:.4e} (required > 1e-3), verdict {rep.verdict.value}"


def criterion_5():
    m = monodromy_sum(annulus(2, 1), 1.0)
    return abs(m - 1.0) < 1e-8, f"monodromy sum / 2pi = {m:.12f}"


def criterion_6():
    ci = curvature_integral(Contour.circle(1.0), 1.0, +1)
    ok = abs(ci - 4 * np.pi) < 1e-8
    rng = np.random.default_rng(6)
    worst = np.inf
    for _ in range(20):
        dom = random_domain(rng)
        P = geometric_summary(dom).perimeter
        worst = min(worst, isoperimetric_slack(dom) / P)
    ok = ok and worst >= -1e-9
    return ok, f"curvature integral - 4pi = {ci - 4 * np.pi:.2e}; min slack/P = {worst:.3e}"


def criterion_7():
    from exq.quaddiff import boundary_metric_check

    dom = annulus(2, 1)
    oracle = max(boundary_metric_check(dom, annulus_phi(2, 1), 1.0))
    fit = fit_best_phi(dom, Basis(8, 8))
    fitted = max(boundary_metric_check(dom, fit.phi, 1.0))
    return oracle < 1e-10 and fitted < 1e-6, f"oracle {oracle:.2e}, fitted {fitted:.2e}"


def criterion_8():
    notes = []
    ok = True
    for m, count in ((1, 3), (3, 5)):
        fp = RationalFunction.polynomial([0] * m + [1])
        g = stokes_graph(fp, Rect(-1, 1.1, -1.05, 1))
        arcs = g.arcs_from(0, "plus")
        ang = np.sort([a.departure_angle % (2 * np.pi) for a in arcs])
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        dev = float(np.max(np.abs(gaps - 2 * np.pi / (m + 2))))
        ok = ok and len(arcs) == count and dev <= 1e-3
        notes.append(f"z^{m}: {len(arcs)} arcs, angle dev {dev:.1e}")
    fp = RationalFunction.pole(0, [0, -2])
    region = Rect(-2.5, 2.5, -2.5, 2.5)
    g = stokes_graph(fp, region)
    ok = ok and len(g.arcs) == 0 and len(g.zeros) == 0
    worst_gap = worst_rad = 0.0
    for r0 in (0.7, 1.3, 1.9 + 0.4j):
        arc = trace_trajectory(fp, r0, "plus", 100, region)
        ok = ok and arc.end_type == "closed"
        worst_gap = max(worst_gap, arc.closure_gap)
        worst_rad = max(worst_rad, float(np.ptp(np.abs(arc.points))))
    ok = ok and worst_gap < 1e-6 and worst_rad < 1e-8
    notes.append(f"-2/z^2: {len(g.arcs)} arcs, gap {worst_gap:.1e}, radius spread {worst_rad:.1e}")
    return ok, "; ".join(notes)


def criterion_9():
    fp = RationalFunction.pole(0, [0, -2])
    r = np.linspace(2, 1, 41) + 0j
    rad = solve_ode(fp, 1.0, r, (1.0, 1.0))
    e_rad = float(np.max(np.abs(rad.v / (r / 2) ** 2 - 1)))
    circ = 1.5 * np.exp(1j * np.linspace(0, 2 * np.pi, 181))
    cs = solve_ode(fp, 1.0, circ, ((1.5 / 2) ** 2, 1.5 / 2))
    e_circ = float(np.max(np.abs(cs.v / (circ / 2) ** 2 - 1)))
    path = np.array([2, 1.5 + 0.5j, 1.2 - 0.7j, -1.4 + 0.1j])
    a = solve_ode(fp, 1.0, path, (1.0, 0.0))
    b = solve_ode(fp, 1.0, path, (0.0, 1.0))
    w = a.wronskian(b)
    e_w = float(np.max(np.abs(w - w[0])) / abs(w[0]))
    # |v| spread along each boundary circle
    e_mod = 0.0
    for R in (2.0, 1.0):
        z = R * np.exp(1j * np.linspace(0, 2 * np.pi, 181))
        s = solve_ode(fp, 1.0, z, ((R / 2) ** 2, R / 2))
        e_mod = max(e_mod, float(np.ptp(np.abs(s.v)) / np.max(np.abs(s.v))))
    vac = vacuum_solution(annulus(2, 1), 1.0)
    e_mod = max(e_mod, max(float(np.ptp(np.abs(v))) for v in vac.v))
    ok = e_rad < 1e-9 and e_circ < 1e-9 and e_w < 1e-9 and e_mod < 1e-8
    return ok, f"radial {e_rad:.1e}, circular {e_circ:.1e}, Wronskian {e_w:.1e}, |v| spread {e_mod:.1e}"


def criterion_10():
    const = wkb_error_scaling(RationalFunction.polynomial([2.0]), 1.0, [0, 1.5], [0.1, 0.05, 0.025])
    lin = wkb_error_scaling(RationalFunction.polynomial([1, 1]), 1.0, [0.5, 1.5], [0.1, 0.05, 0.025])
    ok = max(const.errors) < 1e-9 and all(0.3 <= q <= 0.7 for q in lin.ratios)
    return ok, f"constant max error {max(const.errors):.1e}; 1+z ratios " + ", ".join(f"{q:.3f}" for q in lin.ratios)


def criterion_11():
    fp = RationalFunction.polynomial([0, 1])
    lam = 1.0
    init = (1.0, 0.5 + 0.25j)
    c0, c1, c3 = local_series(fp, 0, 1, lam, init)

    def v_at(z):
        z = np.atleast_1d(z)
        return np.array([solve_ode(fp, lam, [0, zz], init).v[-1] for zz in z])

    d = cauchy_derivatives(v_at, 0, 3, 0.5, nodes=32, rtol=1e-9, max_nodes=256)
    c = [d[0], d[1], d[2] / 2, d[3] / 6]
    size = max(abs(x) for x in (c[0], c[1], c[3]))
    rel2 = abs(c[2]) / size
    present = min(abs(c[0]), abs(c[1]), abs(c[3])) > 1e-3 * size
    ok = rel2 < 1e-8 and present and abs(c3 - c[3]) < 1e-8 * size
    return ok, f"|c2|/max = {rel2:.1e}; |c0|, |c1|, |c3| = {abs(c[0]):.3f}, {abs(c[1]):.3f}, {abs(c[3]):.3f}"


def criterion_12():
    rng = np.random.default_rng(12)
    s_mob = inv = 0.0
    for _ in range(100):
        m = MobiusMap(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        z = m.c + (rng.uniform(0.5, 2.0)) * np.exp(2j * np.pi * rng.uniform())
        r = 0.25 * abs(z - m.c)
        s_mob = max(s_mob, abs(schwarzian(m, z, r)))
    f = np.exp
    for _ in range(10):
        m = MobiusMap(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)) + 0.5, complex(*rng.normal(size=2)) + 3.0)
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        # keep exp(z) a distance from the pole of m
        r_left = 0.1 * min(1.0, abs(np.exp(z) - m.c) / (np.e * 2))
        inv = max(inv, mobius_compose_schwarzian_check(f, m, z, r_left, left=True))
        m2 = MobiusMap(0, 1, complex(*rng.normal(size=2)) + 4.0)
        inv = max(inv, mobius_compose_schwarzian_check(f, m2, z, 0.05, left=False))
    s_exp = schwarzian(np.exp, 0.3 - 0.2j, 0.5)
    ok = s_mob < 1e-8 and inv < 1e-7 and abs(s_exp + 0.5) < 1e-8
    return ok, f"max |S(Mobius)| {s_mob:.1e}; invariance {inv:.1e}; S(exp) + 0.5 = {abs(s_exp + 0.5):.1e}"


def criterion_13():
    notes = []
    ok = True
    for R1, R2 in ((2, 1), (3, 2)):
        cp = curvature_pair_checks(annulus(R1, R2), MobiusMap.linear(R1 / R2), R1 - R2)
        worst = max(cp.residuals[k] for k in ("id", "id2", "rw", "oh", "po"))
        mc = mu_checks(ConformalMap.identity(), -2, R1, R2, R2 * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False)))
        ok = ok and worst < 1e-9 and abs(cp.K - 1) < 1e-9 and mc.schwarzian_max < 1e-9
        notes.append(f"({R1},{R2}) residual {worst:.1e}, K-1 {abs(cp.K - 1):.1e}, S(mu) {mc.schwarzian_max:.1e}")
    rng = np.random.default_rng(13)
    worst_pair = 0.0
    for _ in range(10):
        c = complex(*rng.normal(size=2))
        src = random_contour(rng, rng.uniform(0.5, 2.0), c + 0.3 * complex(*rng.uniform(-1, 1, 2)))
        mu = MobiusMap(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)) + 0.5, c)
        res = mobius_pair_identities(mu, src).residuals
        worst_pair = max(worst_pair, max(res[k] for k in ("eqa_r", "eqa_phi", "area1", "ew1", "dif")))
    ok = ok and worst_pair < 1e-6
    notes.append(f"Mobius pairs {worst_pair:.1e}")
    polar = 0.0
    for e, center in ((Contour.ellipse(2, 1), 0j), (random_contour(rng, 1.5, 0.1j), 0.1j)):
        _, r, t = polar_profile(e, center)
        polar = max(polar, float(np.max(np.abs(polar_curvature(r) - e.curvature(t)))))
    ok = ok and polar < 1e-8
    notes.append(f"polar curvature {polar:.1e}")
    return ok, "; ".join(notes)


def criterion_14():
    with tempfile.TemporaryDirectory() as tmp:
        runs = [Path(tmp) / "run1", Path(tmp) / "run2"]
        for out in runs:
            for cmd in ("analyze", "fit", "stokes", "wkb", "appendix"):
                cli_main(["--command", cmd, "--domain", str(FIXTURES / "annulus_2_1.json"), "--seed", "11", "--out", str(out)])
        names = sorted(p.name for p in runs[0].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(runs[0], runs[1], names, shallow=False)
        ok = len(names) > 0 and not mismatch and not errors
        return ok, f"{len(match)} of {len(names)} files byte-identical"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 15)}


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, check in CRITERIA.items():
        ok, detail = check()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}", flush=True)
    sys.exit(1 if failed else 0)
