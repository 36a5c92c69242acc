"""Extremality system, best analytic approximation to conj(z), vacuum data.

On an extremal domain the best uniform approximation ``phi`` to ``conj(z)``
satisfies, on every boundary component ``k``,

    conj(z) + i alpha_k lam u_k = phi(z),     u_k = |gamma'| / gamma',

with ``lam = 2A/P``; differentiating along the curve gives the Riccati form
``u_k^2 + i alpha_k lam du_k/dz = phi'(z)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .analytic import PolePart, RationalFunction
from .geometry import TWO_PI, Domain, GeometryError, geometric_summary
from .minimax import solve_minimax

EXTREMAL_TOL = 1e-6
INDETERMINATE_TOL = 1e-4
DEGENERATE_TOL = 1e-8


class FitError(RuntimeError):
    pass


class Verdict(str, Enum):
    EXTREMAL = "Extremal"
    NOT_EXTREMAL = "NotExtremal"
    INDETERMINATE = "Indeterminate"


def boundary_residual(domain: Domain, phi: RationalFunction, lam: float, k: int, t):
    """``conj(gamma_k) + i alpha_k lam u_k - phi(gamma_k)`` at parameter ``t``."""
    c = domain.contours[k]
    z = c.eval(t)
    return np.conj(z) + 1j * domain.alpha(k) * lam * c.unit_conj_tangent(t) - phi(z)


def riccati_residual(domain: Domain, dphi: RationalFunction, lam: float, k: int, t):
    """``u_k^2 + i alpha_k lam (du_k/dt)/gamma_k' - phi'(gamma_k)``."""
    c = domain.contours[k]
    g1, g2 = c.d(t, 1), c.d(t, 2)
    sp = np.abs(g1)
    if np.any(sp <= 1e-12 * c.max_speed):
        raise GeometryError("degenerate tangent")
    u = sp / g1
    dsp = np.real(np.conj(g1) * g2) / sp
    du_dt = (dsp * g1 - sp * g2) / g1**2
    return u * u + 1j * domain.alpha(k) * lam * du_dt / g1 - dphi(c.eval(t))


def monodromy_sum(domain: Domain, lam: float) -> float:
    """Total boundary winding of the vacuum phases, in units of 2 pi.

    ``dArg(v_k)/ds = -alpha_k / lam`` so the sum is
    ``(L_1 - sum_{k>=2} L_k) / (2 pi lam)``; integrality is the monodromy
    condition.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    total = sum(-domain.alpha(k) * c.length() for k, c in enumerate(domain.contours))
    return total / (TWO_PI * lam)


@dataclass
class VacuumSolution:
    """Boundary vacuum data ``v_k(s) = exp(-i alpha_k s / lam)``, ``w_k = lam dv_k/ds``."""

    lam: float
    s: list[np.ndarray]
    v: list[np.ndarray]
    w: list[np.ndarray]
    winding: list[float]

    def phase_rate(self, k: int) -> np.ndarray:
        """Finite-difference-free rate dArg(v)/ds = Im(w / (lam v))."""
        return np.imag(self.w[k] / (self.lam * self.v[k]))


def vacuum_solution(domain: Domain, lam: float) -> VacuumSolution:
    ss, vs, ws, wind = [], [], [], []
    for k, c in enumerate(domain.contours):
        t = c.grid()
        sp = c.speed(t)
        # cumulative arclength by spectral integration of |gamma'|
        F = np.fft.fft(sp) / sp.size
        kk = np.fft.fftfreq(sp.size, 1.0 / sp.size)
        mean = F[0].real
        G = np.zeros_like(F)
        nz = kk != 0
        G[nz] = F[nz] / (1j * kk[nz])
        periodic = np.real(np.fft.ifft(G) * sp.size)
        s = mean * t + periodic - periodic[0]
        a = domain.alpha(k)
        v = np.exp(-1j * a * s / lam)
        ss.append(s)
        vs.append(v)
        ws.append(-1j * a * v)
        wind.append(-a * c.length() / lam)
    return VacuumSolution(lam, ss, vs, ws, wind)


# -- best approximation -------------------------------------------------------

@dataclass(frozen=True)
class Basis:
    n_poly: int = 8
    m_pole: int = 8


def _basis_matrix(domain: Domain, basis: Basis, z: np.ndarray):
    center = complex(domain.outer.coeffs[domain.outer.M])
    rho = float(np.max(np.abs(domain.outer.samples - center)))
    cols = [((z - center) / rho) ** j for j in range(basis.n_poly + 1)]
    scales = [rho**-j for j in range(basis.n_poly + 1)]
    pole_scales = []
    for c, inner in zip(domain.hole_centers, domain.inners):
        rk = float(np.min(np.abs(inner.samples - c)))
        pole_scales.append(rk)
        for j in range(1, basis.m_pole + 1):
            cols.append((rk / (z - c)) ** j)
    return np.stack(cols, axis=1), center, scales, pole_scales


def _to_rational(x, basis, center, scales, pole_scales, hole_centers) -> RationalFunction:
    npoly = basis.n_poly + 1
    poly = tuple(complex(x[j] * scales[j]) for j in range(npoly))
    poles = []
    for h, (c, rk) in enumerate(zip(hole_centers, pole_scales)):
        seg = x[npoly + h * basis.m_pole : npoly + (h + 1) * basis.m_pole]
        poles.append(PolePart(c, tuple(complex(b * rk**j) for j, b in enumerate(seg, 1))))
    return RationalFunction(poly, tuple(poles), center)


@dataclass
class FitResult:
    phi: RationalFunction
    achieved_norm: float
    fine_norm: float
    condition: float
    stages: list[tuple[int, float]]


def fit_best_phi(domain: Domain, basis: Basis | tuple[int, int] = Basis(), n: int = 512) -> FitResult:
    """Best uniform approximation to ``conj(z)`` on the sampled boundary.

    Minimises ``max |conj(z_i) - phi(z_i)|`` over all boundary samples, with
    ``phi`` a polynomial of degree ``n_poly`` plus poles of order ``m_pole``
    at each hole center.  ``achieved_norm`` is the discrete optimum;
    ``fine_norm`` re-evaluates the fitted ``phi`` on a 4x finer grid.
    """
    if isinstance(basis, tuple):
        basis = Basis(*basis)
    if basis.n_poly < 1 or (domain.inners and basis.m_pole < 1):
        raise ValueError("basis degrees must be >= 1")
    if n < 256:
        raise ValueError("need at least 256 samples per contour")
    z = np.concatenate([c.eval(c.grid(n)) for c in domain.contours])
    A, center, scales, pole_scales = _basis_matrix(domain, basis, z)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e12:
        raise FitError(f"ill-conditioned basis (condition estimate {cond:.3e})")
    res = solve_minimax(A, np.conj(z))
    phi = _to_rational(res.x, basis, center, scales, pole_scales, domain.hole_centers)
    zf = np.concatenate([c.eval(c.grid(4 * n)) for c in domain.contours])
    fine = float(np.max(np.abs(np.conj(zf) - phi(zf))))
    return FitResult(phi, res.norm, fine, cond, res.stages)


# -- report -------------------------------------------------------------------

@dataclass
class ExtremalityReport:
    lambda_min: float
    fitted_phi: RationalFunction
    achieved_norm: float
    fine_norm: float
    residual_profiles: list[np.ndarray]
    monodromy_sum_over_2pi: float
    verdict: Verdict
    max_residual: float
    diameter: float
    basis: Basis
    samples: int
    thresholds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "equations": ["boundary extremality S_k + i alpha lam u_k = phi", "topological bound norm >= 2A/P", "monodromy sum = integer"],
            "lambda_min": self.lambda_min,
            "fitted_phi": self.fitted_phi.to_dict(),
            "achieved_norm": self.achieved_norm,
            "fine_norm": self.fine_norm,
            "bound_gap": self.achieved_norm - self.lambda_min,
            "max_residual": self.max_residual,
            "diameter": self.diameter,
            "residual_max_per_contour": [float(np.max(r)) for r in self.residual_profiles],
            "monodromy_sum_over_2pi": self.monodromy_sum_over_2pi,
            "verdict": self.verdict.value,
            "basis": [self.basis.n_poly, self.basis.m_pole],
            "samples": self.samples,
            "thresholds": self.thresholds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def residual_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["contour", "index", "t", "residual"])
        for k, prof in enumerate(self.residual_profiles):
            n = prof.size
            for i, r in enumerate(prof):
                w.writerow([k, i, repr(float(TWO_PI * i / n)), repr(float(r))])
        return buf.getvalue()


def classify_residual(max_residual: float, diameter: float) -> Verdict:
    if max_residual < EXTREMAL_TOL * diameter:
        return Verdict.EXTREMAL
    if max_residual > INDETERMINATE_TOL * diameter:
        return Verdict.NOT_EXTREMAL
    return Verdict.INDETERMINATE


def extremality_report(domain: Domain, basis: Basis | Sequence[int] = Basis(), n: int = 512) -> ExtremalityReport:
    if not isinstance(basis, Basis):
        basis = Basis(*basis)
    summ = geometric_summary(domain)
    diam = domain.diameter
    if summ.lambda_min < DEGENERATE_TOL * diam:
        raise GeometryError(f"numerically degenerate domain (lambda_min = {summ.lambda_min:.3e})")
    fit = fit_best_phi(domain, basis, n)
    profiles = []
    for k, c in enumerate(domain.contours):
        profiles.append(np.abs(boundary_residual(domain, fit.phi, summ.lambda_min, k, c.grid(n))))
    mx = float(max(p.max() for p in profiles))
    return ExtremalityReport(
        lambda_min=summ.lambda_min,
        fitted_phi=fit.phi,
        achieved_norm=fit.achieved_norm,
        fine_norm=fit.fine_norm,
        residual_profiles=profiles,
        monodromy_sum_over_2pi=monodromy_sum(domain, summ.lambda_min),
        verdict=classify_residual(mx, diam),
        max_residual=mx,
        diameter=diam,
        basis=basis,
        samples=n,
        thresholds={"extremal": EXTREMAL_TOL, "indeterminate": INDETERMINATE_TOL, "scale": "diameter"},
    )
