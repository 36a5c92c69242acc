"""Analytic functions on multiply-connected domains.

``RationalFunction`` is the trial space for the best analytic approximation:
a polynomial plus principal parts at one center per hole.  Black-box
holomorphic functions are differentiated with the Cauchy integral on a circle
(trapezoid rule), which is spectrally accurate and has no step-size dilemma.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Sequence

import numpy as np

Holomorphic = Callable[[np.ndarray], np.ndarray]


class PoleError(ZeroDivisionError):
    """Evaluation at (or numerically at) a pole."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PolePart:
    """``sum_j coeffs[j-1] * (z - center)^(-j)``."""

    center: complex
    coeffs: tuple[complex, ...]

    @property
    def order(self) -> int:
        nz = [j for j, b in enumerate(self.coeffs, 1) if b != 0]
        return max(nz) if nz else 0


@dataclass(frozen=True)
class RationalFunction:
    """Polynomial part about ``poly_center`` plus pole parts.

    ``f(z) = sum_k poly[k] (z - poly_center)^k + sum_poles sum_j b_j (z - c)^(-j)``.
    """

    poly: tuple[complex, ...] = (0j,)
    poles: tuple[PolePart, ...] = ()
    poly_center: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(complex(a) for a in self.poly) or (0j,))
        object.__setattr__(
            self,
            "poles",
            tuple(PolePart(complex(p.center), tuple(complex(b) for b in p.coeffs)) for p in self.poles),
        )
        object.__setattr__(self, "poly_center", complex(self.poly_center))

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex], center: complex = 0j) -> "RationalFunction":
        return cls(tuple(coeffs), (), center)

    @classmethod
    def pole(cls, center: complex, coeffs: Sequence[complex]) -> "RationalFunction":
        return cls((0j,), (PolePart(center, tuple(coeffs)),))

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        x = z - self.poly_center
        for a in reversed(self.poly):
            out = out * x + a
        for p in self.poles:
            d = z - p.center
            if np.any(d == 0):
                raise PoleError(f"evaluation at pole {p.center}")
            inv = 1.0 / d
            acc = np.zeros_like(z)
            for b in reversed(p.coeffs):
                acc = (acc + b) * inv
            out = out + acc
        return out[()] if out.ndim == 0 else out

    def derivative(self, order: int = 1) -> "RationalFunction":
        f = self
        for _ in range(order):
            poly = tuple(k * a for k, a in enumerate(f.poly))[1:] or (0j,)
            poles = []
            for p in f.poles:
                # d/dz b_j (z-c)^-j = -j b_j (z-c)^-(j+1)
                poles.append(PolePart(p.center, (0j,) + tuple(-j * b for j, b in enumerate(p.coeffs, 1))))
            f = RationalFunction(poly, tuple(poles), f.poly_center)
        return f

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        if self.poly_center != other.poly_center:
            raise ValueError("polynomial parts must share a center")
        n = max(len(self.poly), len(other.poly))
        a = [0j] * n
        for k, v in enumerate(self.poly):
            a[k] += v
        for k, v in enumerate(other.poly):
            a[k] += v
        return RationalFunction(tuple(a), self.poles + other.poles, self.poly_center)

    def scale(self, s: complex) -> "RationalFunction":
        return RationalFunction(
            tuple(s * a for a in self.poly),
            tuple(PolePart(p.center, tuple(s * b for b in p.coeffs)) for p in self.poles),
            self.poly_center,
        )

    @property
    def singularities(self) -> tuple[complex, ...]:
        return tuple(p.center for p in self.poles if p.order > 0)

    def to_dict(self) -> dict:
        d = {
            "poly": [[a.real, a.imag] for a in self.poly],
            "poles": [
                {"center": [p.center.real, p.center.imag], "coeffs": [[b.real, b.imag] for b in p.coeffs]}
                for p in self.poles
            ],
        }
        if self.poly_center != 0:
            d["poly_center"] = [self.poly_center.real, self.poly_center.imag]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RationalFunction":
        poly = tuple(complex(re, im) for re, im in d.get("poly", [[0, 0]]))
        poles = tuple(
            PolePart(complex(*p["center"]), tuple(complex(re, im) for re, im in p["coeffs"]))
            for p in d.get("poles", [])
        )
        pc = complex(*d["poly_center"]) if "poly_center" in d else 0j
        return cls(poly, poles, pc)


# -- black-box derivatives ---------------------------------------------------

def _apply(g: Holomorphic, z: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        return np.asarray(g(z), dtype=complex) * np.ones_like(z)
    return np.array([complex(g(complex(w))) for w in z])


def cauchy_derivatives(
    g: Holomorphic,
    z0: complex,
    m: int,
    r: float = 0.25,
    nodes: int = 64,
    rtol: float = 1e-10,
    vectorized: bool = True,
    max_nodes: int = 1024,
) -> list[complex]:
    """Derivatives ``g^(j)(z0)`` for ``j = 0..m`` from the Cauchy integral.

    The circle ``|z - z0| = r`` is discretised with ``nodes`` trapezoid
    points; the result is accepted once doubling the node count changes every
    derivative by less than ``rtol`` (relative) or the roundoff floor.
    """
    if r <= 0:
        raise ValueError("radius must be positive")

    def estimate(n):
        theta = 2 * np.pi * np.arange(n) / n
        vals = _apply(g, z0 + r * np.exp(1j * theta), vectorized)
        # trapezoid Cauchy formula: g^(j)/j! = mean(g e^{-ij theta}) / r^j
        F = np.fft.fft(vals) / n
        return np.array([F[j] * factorial(j) / r**j for j in range(m + 1)]), np.max(np.abs(vals))

    n = nodes
    prev, gmax = estimate(n)
    while n < max_nodes:
        n *= 2
        cur, gmax = estimate(n)
        floor = np.array([1e3 * np.finfo(float).eps * factorial(j) * gmax / r**j for j in range(m + 1)])
        if np.all(np.abs(cur - prev) <= np.maximum(rtol * np.abs(cur), floor)):
            return [complex(v) for v in cur]
        prev = cur
    raise ConvergenceError(f"Cauchy derivatives did not converge with {max_nodes} nodes (radius {r})")


def schwarzian(f: Holomorphic, z: complex, r: float = 0.1, vectorized: bool = True) -> complex:
    """Schwarzian derivative ``f'''/f' - 3/2 (f''/f')^2`` at ``z``.

    ``r`` is the radius of the Cauchy circle; it should stay well inside the
    disk of analyticity (a quarter of the distance to the nearest singularity
    is a good choice).
    """
    d = cauchy_derivatives(f, z, 3, r, vectorized=vectorized)
    scale = max(abs(d[0]), 1e-300) / r
    if abs(d[1]) < 1e-12 * scale:
        raise ZeroDivisionError("f' vanishes: Schwarzian undefined")
    q = d[2] / d[1]
    return d[3] / d[1] - 1.5 * q * q


# -- Moebius maps ------------------------------------------------------------

@dataclass(frozen=True)
class MobiusMap:
    """``z -> a + b / (z - c)``, or the affine variant ``z -> p z + q``."""

    a: complex = 0j
    b: complex = 1 + 0j
    c: complex = 0j
    affine: bool = False
    p: complex = 1 + 0j
    q: complex = 0j

    def __post_init__(self):
        for name in ("a", "b", "c", "p", "q"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.affine and self.p == 0:
            raise ValueError("affine Moebius map needs p != 0")
        if not self.affine and self.b == 0:
            raise ValueError("Moebius map needs b != 0")

    @classmethod
    def linear(cls, p: complex, q: complex = 0j) -> "MobiusMap":
        return cls(affine=True, p=p, q=q)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.affine:
            out = self.p * z + self.q
        else:
            if np.any(z == self.c):
                raise PoleError("Moebius map evaluated at its pole")
            out = self.a + self.b / (z - self.c)
        return out[()] if out.ndim == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.p * np.ones_like(z) if self.affine else -self.b / (z - self.c) ** 2
        return out[()] if out.ndim == 0 else out

    def inverse(self) -> "MobiusMap":
        if self.affine:
            return MobiusMap.linear(1 / self.p, -self.q / self.p)
        # w = a + b/(z-c)  <=>  z = c + b/(w-a)
        return MobiusMap(self.c, self.b, self.a)

    @property
    def pole(self) -> complex | None:
        return None if self.affine else self.c


def mobius_apply(m: MobiusMap, z):
    return m(z)


def cauchy_radius(z: complex, singularities: Sequence[complex], default: float) -> float:
    """A quarter of the distance from ``z`` to the nearest singularity."""
    ds = [abs(z - s) for s in singularities]
    return 0.25 * min(ds) if ds else default


def mobius_compose_schwarzian_check(
    f: Holomorphic,
    m: MobiusMap,
    z: complex,
    r: float = 0.1,
    left: bool = True,
) -> float:
    """Residual of the Schwarzian transformation law.

    ``left=True``: ``|S(m o f)(z) - S(f)(z)|`` (invariance).
    ``left=False``: ``|S(f o m)(z) - S(f)(m(z)) m'(z)^2|`` (quadratic-differential law).
    ``r`` is the Cauchy radius at ``z``; for the right-composition check the
    radius at ``m(z)`` is scaled by ``|m'(z)|``.
    """
    if left:
        return abs(schwarzian(lambda w: m(f(w)), z, r) - schwarzian(f, z, r))
    mz = m(z)
    dm = m.derivative(z)
    lhs = schwarzian(lambda w: f(m(w)), z, r)
    rhs = schwarzian(f, mz, r * abs(dm)) * dm**2
    return abs(lhs - rhs)


__all__ = [
    "RationalFunction",
    "PolePart",
    "PoleError",
    "ConvergenceError",
    "MobiusMap",
    "cauchy_derivatives",
    "cauchy_radius",
    "schwarzian",
    "mobius_apply",
    "mobius_compose_schwarzian_check",
]
