"""Doubly-connected case: closed-form annulus oracle and curve-pair identities.

On a round annulus ``R2 < |z| < R1`` the extremal data are explicit:
``lam = R1 - R2``, ``phi = R1 R2 / z`` and the vacuum solutions
``v1 = (z/R1)^(R1/lam)``, ``v2 = (z/R2)^(-R2/lam)``.  For a general
doubly-connected domain with conformal map ``h`` onto a round annulus the
boundary correspondence ``mu = h^-1((R1/R2) h)`` carries the inner boundary
to the outer one; the functions below evaluate the identities that relate
curvature, arclength and polar data of the two curves under ``mu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import MobiusMap, PolePart, RationalFunction, cauchy_derivatives, schwarzian
from .extremal import boundary_residual, riccati_residual
from .geometry import TWO_PI, Contour, Domain, GeometryError, annulus, geometric_summary

DEGENERATE_TOL = 1e-8


# -- spectral helpers -------------------------------------------------------------

def spectral_derivative(x: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative in ``t`` of samples on the uniform periodic grid ``t_j = 2 pi j / n``."""
    n = x.size
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0 and order % 2 == 1:
        k[n // 2] = 0.0
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(x))
    return out if np.iscomplexobj(x) else out.real


def _curvature_from_derivs(d1, d2, d3):
    """Speed, signed curvature and ``d kappa / dt`` from parameter derivatives."""
    sp2 = np.abs(d1) ** 2
    sp = np.sqrt(sp2)
    im12 = np.imag(np.conj(d1) * d2)
    re12 = np.real(np.conj(d1) * d2)
    kappa = im12 / sp**3
    dkappa = (np.imag(np.conj(d1) * d3) * sp2 - 3 * im12 * re12) / sp**5
    return sp, kappa, dkappa


def _mobius_derivs(mu: MobiusMap, z):
    if mu.affine:
        one = np.ones_like(z)
        return mu.p * one, 0 * one, 0 * one
    w = z - mu.c
    return -mu.b / w**2, 2 * mu.b / w**3, -6 * mu.b / w**4


def _curve_data(z: np.ndarray):
    """Speed and signed curvature of a sampled closed curve (induced orientation)."""
    d1 = spectral_derivative(z, 1)
    d2 = spectral_derivative(z, 2)
    sp = np.abs(d1)
    kappa = np.imag(np.conj(d1) * d2) / sp**3
    return d1, sp, kappa


# -- annulus oracle ---------------------------------------------------------------

@dataclass
class AnnulusOracle:
    R1: float
    R2: float
    center: complex = 0j

    def __post_init__(self):
        if not (self.R1 > self.R2 > 0):
            raise ValueError("need R1 > R2 > 0")
        if self.lam < DEGENERATE_TOL * 2 * self.R1:
            raise GeometryError(f"numerically degenerate annulus (lambda = {self.lam:.3e})")

    @property
    def lam(self) -> float:
        return self.R1 - self.R2

    @property
    def phi(self) -> RationalFunction:
        c = complex(self.center)
        return RationalFunction((np.conj(c),), (PolePart(c, (self.R1 * self.R2,)),), c)

    @property
    def dphi(self) -> RationalFunction:
        return self.phi.derivative()

    def domain(self, n_samples: int = 512) -> Domain:
        return annulus(self.R1, self.R2, self.center, n_samples)

    def v1(self, z):
        return ((np.asarray(z) - self.center) / self.R1) ** (self.R1 / self.lam)

    def v2(self, z):
        return ((np.asarray(z) - self.center) / self.R2) ** (-self.R2 / self.lam)

    def invariants(self, n: int = 512) -> dict[str, float]:
        """Max boundary and Riccati residuals and the ``lam = 2A/P`` error."""
        dom = self.domain(n)
        b = max(float(np.max(np.abs(boundary_residual(dom, self.phi, self.lam, k, c.grid())))) for k, c in enumerate(dom.contours))
        r = max(float(np.max(np.abs(riccati_residual(dom, self.dphi, self.lam, k, c.grid())))) for k, c in enumerate(dom.contours))
        lm = geometric_summary(dom).lambda_min
        return {"boundary": b, "riccati": r, "lambda_formula": abs(lm - self.lam)}


def annulus_domain(R1: float, R2: float, center: complex = 0j, n_samples: int = 512) -> Domain:
    AnnulusOracle(R1, R2, center)
    return annulus(R1, R2, center, n_samples)


def annulus_oracle(R1: float, R2: float, center: complex = 0j) -> AnnulusOracle:
    return AnnulusOracle(R1, R2, center)


# -- conformal maps and mu ----------------------------------------------------------

@dataclass(frozen=True)
class ConformalMap:
    """A map ``h`` onto a round annulus with its inverse and derivative."""

    h: Callable
    h_inv: Callable
    dh: Callable

    @classmethod
    def identity(cls, center: complex = 0j) -> "ConformalMap":
        c = complex(center)
        return cls(lambda z: np.asarray(z) - c, lambda w: np.asarray(w) + c, lambda z: np.ones_like(np.asarray(z, dtype=complex)))

    @classmethod
    def from_mobius(cls, m: MobiusMap) -> "ConformalMap":
        """``h = m``; the domain is the preimage of the round annulus under ``m``."""
        inv = m.inverse()
        return cls(m, inv, m.derivative)


def quaddiff_from_map(cmap: ConformalMap, C: complex) -> Callable:
    """``phi'(z) = C (h'(z) / h(z))^2``."""

    def fp(z):
        z = np.asarray(z, dtype=complex)
        d = np.asarray(cmap.dh(z), dtype=complex)
        if np.any(d == 0):
            raise ZeroDivisionError("h' vanishes")
        out = C * (d / cmap.h(z)) ** 2
        return out[()] if out.ndim == 0 else out

    return fp


def mu_map(cmap: ConformalMap, R1: float, R2: float, z, tol: float = 1e-8):
    """Boundary correspondence ``mu(z) = h^-1((R1/R2) h(z))`` on the inner circle."""
    z = np.asarray(z, dtype=complex)
    hz = np.asarray(cmap.h(z), dtype=complex)
    if np.any(np.abs(np.abs(hz) - R2) > tol * max(1.0, R2)):
        raise ValueError("point is not on the inner boundary |h(z)| = R2")
    out = np.asarray(cmap.h_inv((R1 / R2) * hz), dtype=complex)
    return out[()] if out.ndim == 0 else out


@dataclass
class MuCheck:
    derivative_residual: float
    branch_consistent: bool
    schwarzian_max: float
    roundtrip: float


def mu_checks(cmap: ConformalMap, C: complex, R1: float, R2: float, z2: Sequence[complex], r: float | None = None) -> MuCheck:
    """Derivative law ``mu' = sqrt(phi'(z2)/phi'(z1))``, Schwarzian of ``mu``, and round trip.

    ``mu'`` is computed by Cauchy differentiation of the composed map; the
    square root is continued along the sample sequence from the branch
    that matches at the first sample.
    """
    z2 = np.asarray(z2, dtype=complex)
    fp = quaddiff_from_map(cmap, C)

    def mu(z):
        return cmap.h_inv((R1 / R2) * cmap.h(z))

    def mu_inv(z):
        return cmap.h_inv((R2 / R1) * cmap.h(z))

    if r is None:
        r = 0.05 * float(np.min(np.abs(cmap.h(z2))))
    z1 = mu(z2)
    dmu = np.array([cauchy_derivatives(mu, z, 1, r)[1] for z in z2])
    ratio = fp(z2) / fp(z1)
    root = np.empty_like(ratio)
    root[0] = np.sqrt(ratio[0])
    if abs(root[0] - dmu[0]) > abs(root[0] + dmu[0]):
        root[0] = -root[0]
    for k in range(1, ratio.size):
        c = np.sqrt(ratio[k])
        root[k] = c if abs(c - root[k - 1]) <= abs(c + root[k - 1]) else -c
    res = np.abs(root - dmu) / np.maximum(np.abs(dmu), 1e-300)
    pointwise = np.minimum(np.abs(np.sqrt(ratio) - dmu), np.abs(np.sqrt(ratio) + dmu)) / np.maximum(np.abs(dmu), 1e-300)
    consistent = bool(np.max(res) <= 10 * np.max(pointwise) + 1e-12)
    S = max(abs(schwarzian(mu, z, r)) for z in z2)
    rt = float(np.max(np.abs(mu_inv(z1) - z2)))
    return MuCheck(float(np.max(res)), consistent, float(S), rt)


def invariance_check(fp, mu, z2: Sequence[complex], dmu: Callable | None = None) -> float:
    """``max |phi'(z2) - phi'(mu(z2)) mu'(z2)^2|`` over the samples."""
    z2 = np.asarray(z2, dtype=complex)
    f = fp.eval if isinstance(fp, RationalFunction) else fp
    if dmu is None:
        dmu = mu.derivative if hasattr(mu, "derivative") else (lambda z: np.array([cauchy_derivatives(mu, w, 1, 1e-2 * max(1.0, abs(w)))[1] for w in np.atleast_1d(z)]))
    return float(np.max(np.abs(f(z2) - f(mu(z2)) * np.asarray(dmu(z2)) ** 2)))


# -- curvature pair identities --------------------------------------------------------

@dataclass
class CurvaturePairResult:
    id_lhs: np.ndarray
    id_rhs: np.ndarray
    residuals: dict[str, float]
    K: float
    K_spread: float

    @property
    def id_residual(self) -> float:
        return self.residuals["id"]


def curvature_pair_checks(domain: Domain, mu: Callable, lam: float, n: int = 512) -> CurvaturePairResult:
    """Residuals of the curvature identities along the correspondence ``z1 = mu(z2)``.

    The inner boundary is sampled at ``n`` uniform parameter values; the
    image curve inherits the parameter, and arclength ratios ``ds1/ds2``
    stand in for the polar radius ratio ``r1/r2``.  Curvatures are those of
    the counterclockwise orientation.  Returned residuals:

    ``id``     ``|(1 - lam k1)(ds1/ds2)^2 - (1 + lam k2)|``
    ``id2``    ``|dk1/ds2 - dk2/ds1|``
    ``rw``     spread of the pointwise ``K = (1 - lam k1) ds1/ds2``
    ``q1``     ``|2 pi lam - (L1 - K L2)|``
    ``q2``     ``|K L1 - (L2 + 2 pi lam)|``
    ``oh``     ``max(|(1 - lam k1) rho - 1|, |(1 + lam k2) - rho|)``, ``rho = ds1/ds2``
    ``po``     ``|k2 - k1 rho|``
    ``image``  distance of the image samples from the outer contour
    """
    if domain.n_components != 2:
        raise ValueError("curve-pair checks need a doubly-connected domain")
    inner, outer = domain.inners[0], domain.outer
    t = inner.grid(n)
    z2 = inner.eval(t)
    z1 = np.asarray(mu(z2), dtype=complex)
    g1, g2, g3 = inner.d(t, 1), inner.d(t, 2), inner.d(t, 3)
    s2, k2, dk2 = _curvature_from_derivs(g1, g2, g3)
    if isinstance(mu, MobiusMap):
        m1, m2, m3 = _mobius_derivs(mu, z2)
        s1, k1, dk1 = _curvature_from_derivs(m1 * g1, m2 * g1**2 + m1 * g2, m3 * g1**3 + 3 * m2 * g1 * g2 + m1 * g3)
        h1 = m1 * g1
    else:
        h1, s1, k1 = _curve_data(z1)
        dk1 = spectral_derivative(k1)
    ccw1 = np.sum(np.imag(np.conj(z1) * h1)) > 0
    if not ccw1:
        k1 = -k1
    rho = s1 / s2
    lhs = (1 - lam * k1) * rho**2
    rhs = 1 + lam * k2
    Kp = (1 - lam * k1) * rho
    K = float(np.mean(Kp))
    L1 = float(np.mean(s1) * TWO_PI)
    L2 = float(np.mean(s2) * TWO_PI)
    sub = z1[:: max(1, n // 64)]
    image = max(outer.distance(z) for z in sub)
    res = {
        "id": float(np.max(np.abs(lhs - rhs))),
        "id2": float(np.max(np.abs(dk1 / s2 - dk2 / s1))),
        "rw": float(np.ptp(Kp)),
        "q1": abs(TWO_PI * lam - (L1 - K * L2)),
        "q2": abs(K * L1 - (L2 + TWO_PI * lam)),
        "oh": float(max(np.max(np.abs((1 - lam * k1) * rho - 1)), np.max(np.abs(1 + lam * k2 - rho)))),
        "po": float(np.max(np.abs(k2 - k1 * rho))),
        "image": float(image),
    }
    return CurvaturePairResult(lhs, rhs, res, K, float(np.ptp(Kp)))


# -- polar data -----------------------------------------------------------------------

def polar_curvature(r: np.ndarray) -> np.ndarray:
    """Curvature of ``r(phi)`` sampled on a uniform periodic grid in ``phi``.

    Standard polar formula ``(r^2 + 2 r'^2 - r r'') / (r^2 + r'^2)^(3/2)``
    with spectral derivatives.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("polar radius must be positive")
    r1 = spectral_derivative(r, 1)
    r2 = spectral_derivative(r, 2)
    return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5


def polar_profile(contour: Contour, center: complex, n: int = 512) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(phi, r(phi), t(phi))`` on a uniform grid for a curve star-shaped about ``center``."""
    tt = contour.grid(8 * n)
    w = contour.eval(tt) - center
    th = np.unwrap(np.angle(w))
    if np.any(np.diff(th) <= 0):
        raise GeometryError("curve is not star-shaped about the center")
    phis = th[0] + TWO_PI * np.arange(n) / n
    t = np.interp(phis, th, tt)
    for _ in range(8):
        wt = contour.eval(t) - center
        dth = np.imag(contour.d(t, 1) / wt)
        err = np.angle(wt * np.exp(-1j * phis))
        t = t - err / dth
    r = np.abs(contour.eval(t) - center)
    return phis, r, t


@dataclass
class MobiusPairResult:
    residuals: dict[str, float]
    mask_fraction: float


def mobius_pair_identities(mu: MobiusMap, source: Contour, n: int = 512, mask: float = 0.1) -> MobiusPairResult:
    """Polar identities for ``z1 = a + b/(z2 - c)`` along a source curve.

    With ``r1 e^{i phi1} = z1 - a`` and ``r2 e^{i phi2} = z2 - c``:

    ``eqa_r``    ``|r1 r2 - |b|| / |b|``
    ``eqa_phi``  spread of ``phi1 + phi2`` (mod 2 pi)
    ``area1``    relative error of ``dz1/dz2 = -(z1-a)/(z2-c)`` and ``ds1/ds2 = r1/r2``
    ``ew1``      ``|p1 - p2|`` and ``|q1 + q2|`` with ``p = r'/r``, ``q = dp/dphi``
    ``dif``      ``|k1 r1 - k2 r2 + 2 q1/(1 + p1^2)^(3/2)|``

    Derivatives are spectral in the curve parameter; ``p`` and ``q`` are only
    compared where ``|dphi/dt|`` exceeds ``mask`` times its maximum.
    Curvatures are taken in the direction of increasing polar angle.
    """
    if mu.affine:
        raise ValueError("polar identities need a non-affine Moebius map")
    a, b, c = mu.a, mu.b, mu.c
    t = source.grid(n)
    z2 = source.eval(t)
    if np.min(np.abs(z2 - c)) < 1e-8 * source.diameter:
        raise ZeroDivisionError("source curve passes through the pole of the map")
    z1 = mu(z2)
    w1, w2 = z1 - a, z2 - c
    r1, r2 = np.abs(w1), np.abs(w2)
    d1, s1, k1 = _curve_data(z1)
    d2, s2, k2 = _curve_data(z2)
    L1 = spectral_derivative(w1) / w1
    L2 = spectral_derivative(w2) / w2
    ph1, ph2 = L1.imag, L2.imag  # dphi/dt
    k1 = k1 * np.sign(ph1)
    k2 = k2 * np.sign(ph2)
    keep = (np.abs(ph1) > mask * np.max(np.abs(ph1))) & (np.abs(ph2) > mask * np.max(np.abs(ph2)))
    p1, p2 = L1.real / ph1, L2.real / ph2
    q1 = _dp_dphi(w1)
    q2 = _dp_dphi(w2)
    ang = np.angle(w1 * w2)
    res = {
        "eqa_r": float(np.max(np.abs(r1 * r2 - abs(b))) / abs(b)),
        "eqa_phi": float(np.max(np.abs(np.angle(np.exp(1j * (ang - ang[0])))))),
        "area1": float(max(
            np.max(np.abs(d1 / d2 + w1 / w2) / np.abs(w1 / w2)),
            np.max(np.abs(s1 / s2 - r1 / r2) / (r1 / r2)),
        )),
        "ew1": float(max(np.max(np.abs(p1 - p2)[keep]), np.max(np.abs(q1 + q2)[keep]))),
        "dif": float(np.max(np.abs(k1 * r1 - k2 * r2 + 2 * q1 / (1 + p1**2) ** 1.5)[keep])),
    }
    return MobiusPairResult(res, float(1 - keep.mean()))


def _dp_dphi(w: np.ndarray) -> np.ndarray:
    """``d/dphi (r'/r)`` for ``w = r e^{i phi}`` sampled on a periodic grid."""
    wt = spectral_derivative(w)
    wtt = spectral_derivative(w, 2)
    L = wt / w
    Lt = wtt / w - L * L  # d/dt log-derivative
    rt, pt = L.real, L.imag  # (log r)_t, phi_t
    rtt, ptt = Lt.real, Lt.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        dp_dt = (rtt * pt - rt * ptt) / pt**2
        return dp_dt / pt


# -- concentric-circle conclusion ---------------------------------------------------------

def concentric_circle_check(domain: Domain, n: int = 512) -> dict[str, float]:
    """Curvature spread and center offset of the two boundary curves.

    Centers are averaged centers of curvature ``z + i tau / kappa``.
    """
    if domain.n_components != 2:
        raise ValueError("needs a doubly-connected domain")
    out = {}
    centers = []
    for name, c in zip(("outer", "inner"), domain.contours):
        t = c.grid(n)
        k = c.curvature(t)
        out[f"{name}_curvature_rel_std"] = float(np.std(k) / abs(np.mean(k)))
        centers.append(np.mean(c.eval(t) + 1j * c.tangent(t) / k))
    out["center_offset"] = float(abs(centers[0] - centers[1]))
    out["scale"] = float(domain.diameter)
    return out


# -- verification report -------------------------------------------------------------------

CURVATURE_LABELS = {
    "id": "id: (1 - lam k1) rho^2 = 1 + lam k2",
    "id2": "id2: dk1/ds2 = dk2/ds1",
    "rw": "rw: (1 - lam k1) rho constant",
    "q1": "q1: 2 pi lam = L1 - K L2",
    "q2": "q2: K L1 = L2 + 2 pi lam",
    "oh": "oh: (1 - lam k1) rho = 1, 1 + lam k2 = rho",
    "po": "po: k2 = k1 rho",
}


@dataclass
class Check:
    label: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, label: str, residual: float, tolerance: float) -> None:
        self.checks.append(Check(label, float(residual), float(tolerance)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        w = max((len(c.label) for c in self.checks), default=5)
        lines = [f"{'label':<{w}}  {'residual':>12}  {'tolerance':>10}  result"]
        for c in self.checks:
            lines.append(f"{c.label:<{w}}  {c.residual:>12.3e}  {c.tolerance:>10.1e}  {'PASS' if c.passed else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "checks": [{"label": c.label, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed} for c in self.checks],
            "passed": self.passed,
        }


def verify_annulus(R1: float, R2: float, n: int = 512, tol: float = 1e-9, center: complex = 0j) -> VerificationReport:
    """Run every doubly-connected identity on the round annulus ``R2 < |z - center| < R1``."""
    center = complex(center)
    o = AnnulusOracle(R1, R2, center)
    rep = VerificationReport()
    inv = o.invariants(n)
    rep.add("boundary extremality residual", inv["boundary"], 1e-12 * max(1.0, R1))
    rep.add("riccati residual", inv["riccati"], 1e-10)
    rep.add("lambda = 2A/P", inv["lambda_formula"], 1e-12 * R1)
    dom = o.domain(n)
    t = dom.inners[0].grid(64)
    z2 = dom.inners[0].eval(t)
    cmap = ConformalMap.identity(center)
    C = -R1 * R2
    fp = quaddiff_from_map(cmap, C)
    rep.add("phi' = C (h'/h)^2", float(np.max(np.abs(fp(z2) - o.dphi(z2)))), 1e-12 * max(1.0, abs(C)))
    mc = mu_checks(cmap, C, R1, R2, z2)
    rep.add("mu' = sqrt(phi'(z2)/phi'(z1))", mc.derivative_residual, 1e-8)
    rep.add("mu Schwarzian", mc.schwarzian_max, 1e-9)
    rep.add("mu round trip", mc.roundtrip, 1e-10 * R1)
    mu = MobiusMap.linear(R1 / R2, center * (1 - R1 / R2))
    rep.add("phi' invariance under mu", invariance_check(o.dphi, mu, z2), 1e-10)
    cp = curvature_pair_checks(dom, mu, o.lam, n)
    for key in ("id", "id2", "rw", "q1", "q2", "oh", "po"):
        rep.add(CURVATURE_LABELS[key], cp.residuals[key], tol)
    rep.add("K = 1", abs(cp.K - 1.0), tol)
    cc = concentric_circle_check(dom, n)
    rep.add("concentric: curvature spread (outer)", cc["outer_curvature_rel_std"], 1e-4)
    rep.add("concentric: curvature spread (inner)", cc["inner_curvature_rel_std"], 1e-4)
    rep.add("concentric: center offset", cc["center_offset"], 1e-6 * cc["scale"])
    return rep
