"""Closed analytic contours and multiply-connected planar domains.

A contour is a truncated complex Fourier series

    gamma(t) = sum_j c_j exp(i j t),   t in [0, 2 pi),

so derivatives are exact coefficient shifts and every boundary integral is a
periodic trapezoid sum (spectrally accurate).

Contours are stored counterclockwise.  A domain has one outer contour and any
number of inner contours; the orientation of each component relative to the
domain is carried by ``alpha``: -1 for the outer contour, +1 for holes.
Contour indices are 0-based, index 0 is the outer contour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

TWO_PI = 2.0 * np.pi
DEFAULT_SAMPLES = 512


class GeometryError(ValueError):
    """Invalid contour or domain."""


class BoundaryProximityError(GeometryError):
    """Point too close to a contour for a reliable membership decision."""


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed curve ``gamma(t) = sum_j c_j e^{ijt}`` with ``j`` in ``[-M, M]``.

    ``coeffs[j + M]`` holds ``c_j``.  ``n_samples`` is the default size of
    the uniform quadrature grid.
    """

    coeffs: np.ndarray
    n_samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if c.size % 2 == 0:
            raise GeometryError("coefficient array must have odd length 2M+1")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)
        if self.n_samples < 8:
            raise GeometryError("n_samples must be >= 8")

    # -- construction -----------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Mapping[int, complex], n_samples: int = DEFAULT_SAMPLES) -> "Contour":
        M = max([abs(int(j)) for j in terms] + [1])
        c = np.zeros(2 * M + 1, dtype=complex)
        for j, v in terms.items():
            c[int(j) + M] += complex(v)
        return cls(c, n_samples)

    @classmethod
    def circle(cls, radius: float, center: complex = 0.0, n_samples: int = DEFAULT_SAMPLES) -> "Contour":
        if radius <= 0:
            raise GeometryError("radius must be positive")
        return cls.from_terms({0: center, 1: radius}, n_samples)

    @classmethod
    def ellipse(cls, a: float, b: float, center: complex = 0.0, n_samples: int = DEFAULT_SAMPLES) -> "Contour":
        # a cos t + i b sin t = (a+b)/2 e^{it} + (a-b)/2 e^{-it}
        return cls.from_terms({0: center, 1: (a + b) / 2, -1: (a - b) / 2}, n_samples)

    @classmethod
    def from_samples(cls, z: np.ndarray, M: int | None = None, n_samples: int = DEFAULT_SAMPLES) -> "Contour":
        """Fourier-interpolate uniform samples ``z[k] = gamma(2 pi k / n)``."""
        z = np.asarray(z, dtype=complex)
        n = z.size
        if M is None:
            M = (n - 1) // 2
        if 2 * M + 1 > n:
            raise GeometryError("need at least 2M+1 samples")
        F = np.fft.fft(z) / n
        j = np.arange(-M, M + 1)
        return cls(F[j % n], n_samples)

    def scaled(self, factor: complex, shift: complex = 0.0) -> "Contour":
        """Contour ``factor * gamma + shift``."""
        c = np.array(self.coeffs) * factor
        c[self.M] += shift
        return Contour(c, self.n_samples)

    # -- evaluation -------------------------------------------------------
    @property
    def M(self) -> int:
        return (self.coeffs.size - 1) // 2

    @cached_property
    def _modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def derivative_coeffs(self, order: int = 1) -> np.ndarray:
        return self.coeffs * (1j * self._modes) ** order

    def _series(self, c: np.ndarray, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(t, self._modes)) @ c

    def eval(self, t):
        """Point ``gamma(t)``; ``t`` may be an array."""
        out = self._series(self.coeffs, np.mod(t, TWO_PI))
        return out[()] if np.ndim(out) == 0 else out

    __call__ = eval

    def d(self, t, order: int = 1):
        """``order``-th derivative of gamma with respect to ``t``."""
        out = self._series(self.derivative_coeffs(order), np.mod(t, TWO_PI))
        return out[()] if np.ndim(out) == 0 else out

    def speed(self, t):
        return np.abs(self.d(t))

    def tangent(self, t):
        """Unit tangent ``gamma'(t) / |gamma'(t)|``."""
        g1 = self.d(t)
        sp = np.abs(g1)
        if np.any(sp <= 1e-12 * max(self.max_speed, 1e-300)):
            raise GeometryError("degenerate tangent: |gamma'| vanishes")
        return g1 / sp

    def curvature(self, t):
        """Signed curvature ``Im(conj(g') g'') / |g'|^3`` (positive on ccw circles)."""
        g1, g2 = self.d(t, 1), self.d(t, 2)
        sp = np.abs(g1)
        if np.any(sp <= 1e-12 * max(self.max_speed, 1e-300)):
            raise GeometryError("degenerate tangent: |gamma'| vanishes")
        return np.imag(np.conj(g1) * g2) / sp**3

    def unit_conj_tangent(self, t):
        """``u = |gamma'| / gamma' = 1 / tau``, i.e. ds/dz on the curve."""
        g1 = self.d(t)
        return np.abs(g1) / g1

    # -- grid quantities --------------------------------------------------
    def grid(self, n: int | None = None) -> np.ndarray:
        n = n or self.n_samples
        return TWO_PI * np.arange(n) / n

    @cached_property
    def samples(self) -> np.ndarray:
        return self.eval(self.grid())

    @cached_property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self._series(self.derivative_coeffs(1), self.grid()))))

    def signed_area(self, n: int | None = None) -> float:
        t = self.grid(n)
        g, g1 = self.eval(t), self.d(t)
        return float(0.5 * np.mean(np.imag(np.conj(g) * g1)) * TWO_PI)

    def length(self, n: int | None = None) -> float:
        return float(np.mean(self.speed(self.grid(n))) * TWO_PI)

    def turning(self, n: int | None = None) -> float:
        """``oint kappa ds`` (equals 2 pi for simple ccw curves)."""
        t = self.grid(n)
        return float(np.mean(self.curvature(t) * self.speed(t)) * TWO_PI)

    @cached_property
    def diameter(self) -> float:
        z = self.samples
        # cheap exact-enough diameter: max pairwise distance over the grid
        step = max(1, z.size // 256)
        zs = z[::step]
        return float(np.max(np.abs(zs[:, None] - zs[None, :])))

    # -- validity ---------------------------------------------------------
    def validate(self) -> None:
        t = self.grid()
        sp = self.speed(t)
        if sp.min() <= 1e-9 * sp.max():
            raise GeometryError("contour is not an immersion (gamma' vanishes)")
        z = self.samples
        n = z.size
        diam = self.diameter
        idx = np.arange(n)
        dt = np.abs(idx[:, None] - idx[None, :])
        dt = np.minimum(dt, n - dt) * (TWO_PI / n)
        close = (np.abs(z[:, None] - z[None, :]) < 1e-8 * diam) & (dt > TWO_PI / 16)
        if np.any(close):
            raise GeometryError("contour is not simple (self-intersection detected)")
        if self.signed_area() <= 0:
            raise GeometryError("contour must be counterclockwise")

    # -- distance / winding -----------------------------------------------
    def distance(self, z: complex) -> float:
        """Distance from ``z`` to the curve (grid search + local refinement)."""
        t = self.grid()
        k = int(np.argmin(np.abs(self.samples - z)))
        h = TWO_PI / t.size
        res = minimize_scalar(
            lambda s: abs(self.eval(s) - z),
            bounds=(t[k] - 1.5 * h, t[k] + 1.5 * h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        return float(min(res.fun, np.abs(self.samples[k] - z)))

    def winding_number(self, z: complex, tol: float = 1e-8) -> int:
        """Winding number of the curve about ``z``.

        Uses the polygon angle sum on a grid fine enough that the chord sag is
        below the distance from ``z`` to the curve.  Raises
        :class:`BoundaryProximityError` within ``tol * diameter`` of the curve.
        """
        z = complex(z)
        samples = self.samples
        dmin = float(np.min(np.abs(samples - z)))
        seg = self.max_speed * TWO_PI / samples.size
        if dmin > 2.0 * seg:
            return _polygon_winding(samples, z)
        d = self.distance(z)
        if d < tol * self.diameter:
            raise BoundaryProximityError(f"point {z} lies within {d:.3e} of the contour")
        kmax = float(np.max(np.abs(self.curvature(self.grid()))))
        # chord sag ~ kappa h^2 / 8 must stay below d / 2
        h_needed = np.sqrt(4.0 * d / max(kmax, 1e-300))
        n = int(min(2**22, max(samples.size, np.ceil(self.max_speed * TWO_PI / h_needed))))
        return _polygon_winding(self.eval(self.grid(n)), z)


def _polygon_winding(pts: np.ndarray, z: complex) -> int:
    a = np.angle(pts - z)
    da = np.diff(np.append(a, a[0]))
    da = (da + np.pi) % TWO_PI - np.pi
    return int(np.rint(da.sum() / TWO_PI))


@dataclass(frozen=True)
class GeometricSummary:
    area: float
    perimeter: float
    component_lengths: tuple[float, ...]
    lambda_min: float

    def as_dict(self) -> dict:
        return {
            "area": self.area,
            "perimeter": self.perimeter,
            "component_lengths": list(self.component_lengths),
            "lambda_min": self.lambda_min,
        }


@dataclass(frozen=True, eq=False)
class Domain:
    """Bounded domain: one outer contour and zero or more inner contours."""

    outer: Contour
    inners: tuple[Contour, ...] = ()
    hole_centers: tuple[complex, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "inners", tuple(self.inners))
        if self.hole_centers is None:
            centers = tuple(_interior_point(c) for c in self.inners)
        else:
            centers = tuple(complex(c) for c in self.hole_centers)
        if len(centers) != len(self.inners):
            raise GeometryError("need exactly one hole center per inner contour")
        object.__setattr__(self, "hole_centers", centers)

    @property
    def contours(self) -> tuple[Contour, ...]:
        return (self.outer, *self.inners)

    @property
    def n_components(self) -> int:
        return 1 + len(self.inners)

    @staticmethod
    def alpha(k: int) -> int:
        """Orientation sign of contour ``k`` (0 = outer)."""
        return -1 if k == 0 else 1

    @property
    def diameter(self) -> float:
        return self.outer.diameter

    def validate(self) -> None:
        for c in self.contours:
            c.validate()
        for i, inner in enumerate(self.inners):
            if any(self.outer.winding_number(z) != 1 for z in inner.samples):
                raise GeometryError(f"inner contour {i + 1} is not inside the outer contour")
            for j, other in enumerate(self.inners):
                if i != j and any(other.winding_number(z) != 0 for z in inner.samples):
                    raise GeometryError(f"inner contours {i + 1} and {j + 1} overlap")
            if inner.winding_number(self.hole_centers[i]) != 1:
                raise GeometryError(f"hole center {i + 1} is not inside its inner contour")
        if self.summary().area <= 0:
            raise GeometryError("nonpositive area")

    def contains(self, z: complex, tol: float = 1e-8) -> bool:
        """Membership by winding numbers; raises near the boundary."""
        if self.outer.winding_number(z, tol) != 1:
            return False
        return all(c.winding_number(z, tol) == 0 for c in self.inners)

    def inside(self, z: complex, tol: float = 1e-8) -> bool:
        """Like :meth:`contains` but boundary-proximate points count as outside."""
        try:
            return self.contains(z, tol)
        except BoundaryProximityError:
            return False

    def summary(self, n: int | None = None) -> GeometricSummary:
        return geometric_summary(self, n)

    def bounding_box(self) -> tuple[float, float, float, float]:
        z = self.outer.eval(self.outer.grid(4 * self.outer.n_samples))
        return float(z.real.min()), float(z.real.max()), float(z.imag.min()), float(z.imag.max())

    def with_samples(self, n: int) -> "Domain":
        return Domain(
            Contour(self.outer.coeffs, n),
            tuple(Contour(c.coeffs, n) for c in self.inners),
            self.hole_centers,
        )

    def transformed(self, factor: complex, shift: complex = 0.0) -> "Domain":
        """Image under the similarity ``z -> factor z + shift`` (|factor| rotates/scales)."""
        return Domain(
            self.outer.scaled(factor, shift),
            tuple(c.scaled(factor, shift) for c in self.inners),
            tuple(factor * c + shift for c in self.hole_centers),
        )


def _interior_point(c: Contour) -> complex:
    cand = complex(c.coeffs[c.M])
    try:
        if c.winding_number(cand) == 1:
            return cand
    except BoundaryProximityError:
        pass
    # area centroid via Green: x_c = oint x^2 dy / 2A, y_c = -oint y^2 dx / 2A
    t = c.grid()
    z, z1 = c.eval(t), c.d(t)
    A = c.signed_area()
    xc = np.mean(0.5 * z.real**2 * z1.imag) * TWO_PI / A
    yc = -np.mean(0.5 * z.imag**2 * z1.real) * TWO_PI / A
    cand = complex(xc, yc)
    try:
        if c.winding_number(cand) == 1:
            return cand
    except BoundaryProximityError:
        pass
    # fall back: inward offset from the point of maximal curvature
    k = int(np.argmax(c.curvature(t)))
    n_in = 1j * c.tangent(t[k])
    return complex(z[k] + n_in * 0.5 / max(c.curvature(t[k]), 1e-300))


# -- operations ------------------------------------------------------------

def geometric_summary(domain: Domain, n: int | None = None) -> GeometricSummary:
    """Area, perimeter, component lengths and ``lambda_min = 2A/P``."""
    area = domain.outer.signed_area(n) - sum(c.signed_area(n) for c in domain.inners)
    if area <= 0:
        raise GeometryError("nonpositive area (invalid nesting)")
    lengths = tuple(c.length(n) for c in domain.contours)
    P = float(sum(lengths))
    return GeometricSummary(float(area), P, lengths, 2.0 * area / P)


def curvature_integral(contour: Contour, lam: float, alpha: int, n: int | None = None) -> float:
    """``oint (1 + alpha * lam * kappa) ds`` over the contour."""
    t = contour.grid(n)
    sp = contour.speed(t)
    return float(np.mean(sp * (1.0 + alpha * lam * contour.curvature(t))) * TWO_PI)


def isoperimetric_slack(domain: Domain) -> float:
    """``L_1 - 4 pi A / P``; nonnegative for every valid domain."""
    s = geometric_summary(domain)
    return s.component_lengths[0] - 4.0 * np.pi * s.area / s.perimeter


# -- domain files ------------------------------------------------------------

class DomainFileError(ValueError):
    """Malformed domain document."""


def domain_from_dict(doc: Mapping, n_samples: int = DEFAULT_SAMPLES) -> Domain:
    """Build a domain from ``{"contours": [{"coeffs": [[j, re, im], ...]}, ...]}``."""
    try:
        entries = doc["contours"]
        if not isinstance(entries, list) or not entries:
            raise DomainFileError("'contours' must be a non-empty list")
        contours = []
        for e in entries:
            terms: dict[int, complex] = {}
            for row in e["coeffs"]:
                j, re, im = row
                if int(j) != j:
                    raise DomainFileError(f"non-integer mode {j}")
                terms[int(j)] = terms.get(int(j), 0) + complex(float(re), float(im))
            contours.append(Contour.from_terms(terms, n_samples))
        centers = doc.get("hole_centers")
        if centers is not None:
            centers = tuple(complex(float(a), float(b)) for a, b in centers)
    except DomainFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainFileError(f"malformed domain document: {exc}") from exc
    return Domain(contours[0], tuple(contours[1:]), centers)


def domain_to_dict(domain: Domain) -> dict:
    def contour_rows(c: Contour):
        return [[int(j), float(v.real), float(v.imag)] for j, v in zip(c._modes, c.coeffs) if v != 0]

    return {
        "contours": [{"coeffs": contour_rows(c)} for c in domain.contours],
        "hole_centers": [[z.real, z.imag] for z in domain.hole_centers],
    }


def load_domain(path, n_samples: int = DEFAULT_SAMPLES) -> Domain:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainFileError(f"{path}: {exc}") from exc
    return domain_from_dict(doc, n_samples)


def annulus(R1: float, R2: float, center: complex = 0.0, n_samples: int = DEFAULT_SAMPLES) -> Domain:
    """Round annulus ``R2 < |z - center| < R1``."""
    if not R1 > R2 > 0:
        raise GeometryError("need R1 > R2 > 0")
    return Domain(
        Contour.circle(R1, center, n_samples),
        (Contour.circle(R2, center, n_samples),),
        (complex(center),),
    )


def perturbed_annulus(
    R1: float,
    R2: float,
    outer_terms: Mapping[int, complex] | None = None,
    inner_terms: Mapping[int, complex] | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> Domain:
    """Annulus with extra Fourier modes added to the outer and/or inner circle."""
    o = {0: 0.0, 1: R1}
    for j, v in (outer_terms or {}).items():
        o[j] = o.get(j, 0) + v
    i = {0: 0.0, 1: R2}
    for j, v in (inner_terms or {}).items():
        i[j] = i.get(j, 0) + v
    return Domain(Contour.from_terms(o, n_samples), (Contour.from_terms(i, n_samples),), (0j,))


def sample_points(domain: Domain, count: int, rng: np.random.Generator, margin: float = 0.05) -> list[complex]:
    """Rejection-sample ``count`` interior points away from the boundary."""
    x0, x1, y0, y1 = domain.bounding_box()
    out: list[complex] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 10000 * count:
            raise GeometryError("could not sample interior points")
        z = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
        if domain.inside(z) and min(c.distance(z) for c in domain.contours) > margin * domain.diameter:
            out.append(z)
    return out


__all__: Sequence[str] = [
    "Contour",
    "Domain",
    "GeometricSummary",
    "GeometryError",
    "BoundaryProximityError",
    "DomainFileError",
    "geometric_summary",
    "curvature_integral",
    "isoperimetric_slack",
    "domain_from_dict",
    "domain_to_dict",
    "load_domain",
    "annulus",
    "perturbed_annulus",
    "sample_points",
]

