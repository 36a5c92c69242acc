"""Vacuum ODE ``v'' = -(phi'/lam^2) v`` on complex paths and its WKB approximation.

The second-order equation is integrated as the first-order system

    v' = w / lam,    w' = -(phi' / lam) v,

along a polyline, parameterised by arclength on each segment.  The
Liouville-Green (WKB) approximant with small parameter ``eps`` is

    lam^(1/2) phi'^(-1/4) [C1 exp(i Phi / (lam eps)) + C2 exp(-i Phi / (lam eps))],

with ``Phi(z) = int_{z0}^z sqrt(phi')``; it approximates solutions of the
ODE with ``lam`` replaced by ``lam * eps`` to relative order ``eps``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import RationalFunction, cauchy_derivatives
from .quaddiff import StokesGraph, _chord_integral, sqrt_tracked


class ODEError(RuntimeError):
    pass


class TurningPointError(ValueError):
    """The path passes (numerically) through a zero of ``phi'``."""


class SeriesOrderError(RuntimeError):
    pass


def _f(fp):
    return fp.eval if isinstance(fp, RationalFunction) else fp


def _second(fp):
    if isinstance(fp, RationalFunction):
        return fp.derivative()

    def d(z):
        return cauchy_derivatives(fp, complex(z), 1, 1e-3 * max(1.0, abs(z)))[1]

    return d


# -- exact solutions ----------------------------------------------------------

@dataclass
class PathSolution:
    """Samples of ``(v, w = lam v')`` at the points ``z`` of a path."""

    z: np.ndarray
    s: np.ndarray
    v: np.ndarray
    w: np.ndarray
    lam: float

    @property
    def dv(self) -> np.ndarray:
        return self.w / self.lam

    def wronskian(self, other: "PathSolution") -> np.ndarray:
        """``v1 w2 - v2 w1`` along the path; constant for exact solutions."""
        return self.v * other.w - other.v * self.w


def refine_path(path: Sequence[complex], per_segment: int) -> np.ndarray:
    """Polyline with ``per_segment`` equal pieces per original segment."""
    path = np.asarray(path, dtype=complex)
    if per_segment <= 1:
        return path
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        out.extend(a + (b - a) * np.arange(1, per_segment + 1) / per_segment)
    return np.array(out)


def solve_ode(
    fp,
    lam: float,
    path: Sequence[complex],
    initial: tuple[complex, complex],
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> PathSolution:
    """Integrate the vacuum ODE along a polyline from ``initial = (v, w)`` at ``path[0]``.

    Each segment ``a -> b`` is parameterised as ``z = a + s e`` with ``|e| = 1``;
    the solution is reported at every polyline vertex.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    f = _f(fp)
    path = np.asarray(path, dtype=complex)
    v, w = complex(initial[0]), complex(initial[1])
    vs, ws, ss = [v], [w], [0.0]
    scale = max(1.0, abs(v), abs(w))
    for a, b in zip(path[:-1], path[1:]):
        L = abs(b - a)
        if L == 0:
            vs.append(v), ws.append(w), ss.append(ss[-1])
            continue
        e = (b - a) / L

        def rhs(s, y, a=a, e=e):
            return [e * y[1] / lam, -e * complex(f(a + s * e)) / lam * y[0]]

        sol = solve_ivp(rhs, (0.0, L), [v, w], method="DOP853", rtol=rtol, atol=atol * scale)
        if not sol.success:
            raise ODEError(f"integration failed on segment {a} -> {b}: {sol.message}")
        v, w = complex(sol.y[0, -1]), complex(sol.y[1, -1])
        scale = max(scale, abs(v), abs(w))
        vs.append(v), ws.append(w), ss.append(ss[-1] + L)
    return PathSolution(path, np.array(ss), np.array(vs), np.array(ws), float(lam))


# -- WKB ------------------------------------------------------------------------

def _check_turning(f, path: np.ndarray, scale: float | None = None) -> None:
    vals = np.abs(np.asarray(f(path), dtype=complex))
    ref = scale if scale is not None else max(1.0, float(vals.max()))
    if np.any(vals <= 1e-6 * ref):
        k = int(np.argmin(vals))
        raise TurningPointError(f"path passes through a zero of phi' near {path[k]}")


def wkb_phase(fp, path: Sequence[complex], sign: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``Phi(z) = int_{path[0]}^z sqrt(phi')`` at the vertices and the tracked root.

    Chord integrals use 8-point Gauss-Legendre with the branch continued
    from the previous vertex.
    """
    f = _f(fp)
    path = np.asarray(path, dtype=complex)
    root = sqrt_tracked(f, path, sign)
    Phi = np.zeros(path.size, dtype=complex)
    for k in range(1, path.size):
        val, wb = _chord_integral(f, path[k - 1], path[k], root[k - 1])
        if abs(wb - root[k]) > abs(wb + root[k]):
            raise TurningPointError(f"square-root branch inconsistency on segment {k}")
        Phi[k] = Phi[k - 1] + val
    return Phi, root


@dataclass
class WKBApproximant:
    """Liouville-Green approximant anchored at ``z0``."""

    fp: object
    lam: float
    eps: float
    C1: complex
    C2: complex
    z0: complex
    sign: int = 1

    def __call__(self, path: Sequence[complex]) -> np.ndarray:
        path = np.asarray(path, dtype=complex)
        if path[0] != self.z0:
            path = np.concatenate([[self.z0], path])
            return self(path)[1:]
        f = _f(self.fp)
        _check_turning(f, path)
        Phi, root = wkb_phase(self.fp, path, self.sign)
        q = _fourth_root(root)
        k = 1.0 / (self.lam * self.eps)
        return np.sqrt(self.lam) / q * (self.C1 * np.exp(1j * k * Phi) + self.C2 * np.exp(-1j * k * Phi))


def _fourth_root(root: np.ndarray) -> np.ndarray:
    """Continuous square root of an already continuous ``sqrt(phi')`` sequence."""
    out = np.empty_like(root)
    out[0] = np.sqrt(root[0])
    for k in range(1, root.size):
        c = np.sqrt(root[k])
        out[k] = c if abs(c - out[k - 1]) <= abs(c + out[k - 1]) else -c
    return out


def wkb_eval(fp, lam: float, eps: float, C1: complex, C2: complex, path: Sequence[complex], sign: int = 1) -> np.ndarray:
    """Evaluate the WKB approximant at the vertices of ``path`` (anchored at ``path[0]``)."""
    path = np.asarray(path, dtype=complex)
    return WKBApproximant(fp, lam, eps, complex(C1), complex(C2), complex(path[0]), sign)(path)


def fit_wkb_constants(fp, lam: float, eps: float, z0: complex, v0: complex, dv0: complex, sign: int = 1) -> tuple[complex, complex]:
    """``C1, C2`` matching value and derivative of the approximant at ``z0``."""
    f = _f(fp)
    p = complex(f(z0))
    if p == 0:
        raise TurningPointError("anchor is a zero of phi'")
    r = np.sqrt(p) * (1 if sign >= 0 else -1)
    q = np.sqrt(r)
    dlogq = complex(_second(fp)(z0)) / (4 * p)
    k = 1j * r / (lam * eps)
    A = np.sqrt(lam) / q
    M = A * np.array([[1.0, 1.0], [-dlogq + k, -dlogq - k]])
    C = np.linalg.solve(M, np.array([v0, dv0]))
    return complex(C[0]), complex(C[1])


def _segments_cross(p: np.ndarray, q: np.ndarray) -> bool:
    """True if any segment of polyline ``p`` crosses or touches any segment of ``q``."""
    a, b = p[:-1, None], p[1:, None]
    c, d = q[None, :-1], q[None, 1:]

    def cross(u, v):
        return (np.conj(u) * v).imag

    d1 = cross(b - a, c - a)
    d2 = cross(b - a, d - a)
    d3 = cross(d - c, a - c)
    d4 = cross(d - c, b - c)
    hit = (d1 * d2 <= 0) & (d3 * d4 <= 0)
    collinear = (d1 == 0) & (d2 == 0)
    return bool(np.any(hit & ~collinear))


@dataclass
class ErrorScaling:
    eps: list[float]
    errors: list[float]
    ratios: list[float]
    asymptotic: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "sup_relative_error", "ratio_to_previous"])
        for i, (e, err) in enumerate(zip(self.eps, self.errors)):
            w.writerow([repr(e), repr(err), repr(self.ratios[i - 1]) if i else ""])
        return buf.getvalue()


def wkb_error_scaling(
    fp,
    lam: float,
    path: Sequence[complex],
    eps_list: Sequence[float],
    initial: tuple[complex, complex] = (1.0, 0.5j),
    per_segment: int = 400,
    graph: StokesGraph | None = None,
) -> ErrorScaling:
    """Sup-norm relative error of the WKB approximant against the exact ODE.

    For each ``eps`` the exact ODE is solved with ``lam * eps`` in place of
    ``lam`` from ``initial = (v, lam*eps*v')``; ``C1, C2`` are fitted to
    value and derivative at the path start.  ``asymptotic`` is False when any
    successive ratio falls outside ``[0.1, 0.9]``.
    """
    f = _f(fp)
    fine = refine_path(path, per_segment)
    _check_turning(f, fine)
    if graph is not None:
        for arc in graph.arcs:
            if arc.kind == "plus" and _segments_cross(fine, np.asarray(arc.points)):
                raise TurningPointError("path crosses a Stokes arc; WKB continuation is not valid")
    errors = []
    for eps in eps_list:
        hbar = lam * eps
        exact = solve_ode(fp, hbar, fine, initial)
        C1, C2 = fit_wkb_constants(fp, lam, eps, fine[0], exact.v[0], exact.dv[0])
        approx = wkb_eval(fp, lam, eps, C1, C2, fine)
        errors.append(float(np.max(np.abs(approx - exact.v)) / np.max(np.abs(exact.v))))
    ratios = [errors[i + 1] / errors[i] if errors[i] > 0 else 0.0 for i in range(len(errors) - 1)]
    asym = all(0.1 <= r <= 0.9 for r in ratios)
    return ErrorScaling(list(map(float, eps_list)), errors, ratios, asym)


# -- local structure at a zero ------------------------------------------------------

def local_series(
    fp,
    z0: complex,
    m: int,
    lam: float,
    initial: tuple[complex, complex] = (1.0, 0.5 + 0.25j),
    r: float = 0.5,
    tol: float = 1e-8,
) -> tuple[complex, complex, complex]:
    """Taylor data of an ODE solution at a zero ``z0`` of order ``m``.

    The solution with ``initial = (v, w)`` at ``z0`` is continued radially to
    a Cauchy circle of radius ``r``; its Taylor coefficients of orders
    ``2..m+1`` must vanish (to ``tol`` relative to the largest scaled
    coefficient).  Returns ``(v(z0), v'(z0), c_{m+2})``.
    """

    def v_at(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([solve_ode(fp, lam, [z0, zz], initial).v[-1] for zz in z])

    d = cauchy_derivatives(v_at, z0, m + 2, r, nodes=32, rtol=1e-9, max_nodes=256)
    c = [d[j] / factorial(j) for j in range(m + 3)]
    size = max(abs(c[j]) * r**j for j in range(m + 3))
    for j in range(2, m + 2):
        if abs(c[j]) * r**j > tol * size:
            raise SeriesOrderError(f"Taylor coefficient of order {j} is {abs(c[j]):.3e}, expected 0")
    return c[0], c[1], c[m + 2]


def comparison_csv(sol: PathSolution, exact: np.ndarray) -> str:
    """CSV of ``s, Re v, Im v, Re v_exact, Im v_exact, error``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["s", "re_v", "im_v", "re_v_exact", "im_v_exact", "error"])
    for s, v, e in zip(sol.s, sol.v, exact):
        wr.writerow([f"{s:.12e}", f"{v.real:.12e}", f"{v.imag:.12e}", f"{e.real:.12e}", f"{e.imag:.12e}", f"{abs(v - e):.6e}"])
    return buf.getvalue()
