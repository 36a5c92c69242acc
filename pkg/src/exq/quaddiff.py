"""Quadratic differential ``phi'(z) dz^2``: zeros, trajectories, Stokes graph.

Horizontal trajectories (the plus family) are the curves along which
``sqrt(phi') dz`` is real; vertical ones (the minus family) are those along
which it is imaginary.  Arcs of either family issuing from a zero of
``phi'`` form the Stokes / anti-Stokes graph.  At a zero of order ``m`` with
``phi' ~ a (z - z0)^m`` the plus-arcs leave in the ``m + 2`` directions

    theta_j = (2 pi j - arg a) / (m + 2),

and the minus-arcs bisect them.
"""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq, minimize_scalar

from .analytic import RationalFunction, cauchy_derivatives
from .geometry import TWO_PI, Domain

log = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class ZeroSearchError(RuntimeError):
    pass


class BranchError(RuntimeError):
    pass


class StokesGraphError(RuntimeError):
    pass


# -- regions -------------------------------------------------------------------

class Region(Protocol):
    def inside(self, z: complex) -> bool: ...

    def bounding_box(self) -> tuple[float, float, float, float]: ...


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    def inside(self, z: complex) -> bool:
        return self.x0 < z.real < self.x1 and self.y0 < z.imag < self.y1

    def bounding_box(self):
        return self.x0, self.x1, self.y0, self.y1

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    def outline(self) -> list[np.ndarray]:
        return [np.array([self.x0 + 1j * self.y0, self.x1 + 1j * self.y0, self.x1 + 1j * self.y1, self.x0 + 1j * self.y1, self.x0 + 1j * self.y0])]


def region_scale(region) -> float:
    if hasattr(region, "diameter"):
        return float(region.diameter)
    x0, x1, y0, y1 = region.bounding_box()
    return float(np.hypot(x1 - x0, y1 - y0))


def region_outline(region) -> list[np.ndarray]:
    if isinstance(region, Domain):
        out = []
        for c in region.contours:
            z = c.eval(c.grid(max(c.n_samples, 256)))
            out.append(np.append(z, z[0]))
        return out
    return region.outline()


def _callables(fp) -> tuple[Callable, Callable]:
    """(phi', phi'') for a RationalFunction or a black-box callable."""
    if isinstance(fp, RationalFunction):
        return fp, fp.derivative()

    def dfp(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.array([cauchy_derivatives(fp, w, 1, 1e-3 * max(1.0, abs(w)))[1] for w in z])
        return out if out.size > 1 else out[0]

    return fp, dfp


def _pole_orders(fp) -> list[tuple[complex, int]]:
    if isinstance(fp, RationalFunction):
        return [(p.center, p.order) for p in fp.poles if p.order > 0]
    return []


# -- zeros ------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroOfPhiPrime:
    location: complex
    order: int


class _EdgeHit(Exception):
    pass


def _edge_winding(f, a: complex, b: complex, floor: float, depth: int = 0) -> float:
    """Change of arg f along the segment a -> b, refined until each increment < pi/4."""
    s = np.linspace(0.0, 1.0, 17)
    z = a + (b - a) * s
    v = np.asarray(f(z), dtype=complex)
    av = np.abs(v)
    if np.any(av <= floor) or np.any(av < 1e-9 * av.max()):
        raise _EdgeHit
    da = np.angle(v[1:] / v[:-1])
    if np.all(np.abs(da) < np.pi / 4):
        return float(da.sum())
    if depth > 30:
        raise _EdgeHit
    total = 0.0
    for i in range(16):
        if abs(da[i]) < np.pi / 4:
            total += da[i]
        else:
            total += _edge_winding(f, z[i], z[i + 1], floor, depth + 1)
    return total


def argument_count(fp, box: tuple[float, float, float, float], floor: float = 0.0) -> int:
    """Number of zeros (with multiplicity) of ``fp`` inside ``box``.

    Argument principle on the box boundary, corrected by the known pole
    orders of a RationalFunction.  Raises ``_EdgeHit`` if ``|fp|`` is below
    ``floor`` on an edge or a pole lies on an edge.
    """
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    f = fp if not isinstance(fp, RationalFunction) else fp.eval
    w = sum(_edge_winding(f, corners[i], corners[(i + 1) % 4], floor) for i in range(4))
    poles = 0
    eps = 1e-12 * max(x1 - x0, y1 - y0)
    for c, order in _pole_orders(fp):
        if x0 - eps <= c.real <= x1 + eps and y0 - eps <= c.imag <= y1 + eps:
            if min(abs(c.real - x0), abs(c.real - x1), abs(c.imag - y0), abs(c.imag - y1)) <= eps:
                raise _EdgeHit
            poles += order
    return int(np.rint(w / TWO_PI)) + poles


def _polish(f, df, z: complex, m: int, iters: int = 60) -> complex:
    for _ in range(iters):
        fz, dz = complex(f(z)), complex(df(z))
        if fz == 0 or dz == 0:
            return z
        step = m * fz / dz
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return z


def find_zeros(
    fp,
    region: tuple[float, float, float, float] | Rect,
    domain: Domain | None = None,
    max_depth: int = 40,
) -> list[ZeroOfPhiPrime]:
    """All zeros of ``fp`` in a rectangle, with multiplicities.

    Recursive argument-principle bisection followed by (multiplicity-aware)
    Newton polishing.  With ``domain`` given, zeros outside it are dropped.
    """
    box = region.bounding_box() if hasattr(region, "bounding_box") else tuple(region)
    f, df = _callables(fp)
    scale = max(box[1] - box[0], box[3] - box[2])
    zs = np.linspace(box[0], box[1], 9)[:, None] + 1j * np.linspace(box[2], box[3], 9)[None, :]
    try:
        fscale = float(np.max(np.abs(f(zs.ravel()))))
    except ZeroDivisionError:
        fscale = 1.0
    floor = 1e-300 * max(fscale, 1.0)

    def count(b):
        return argument_count(fp, b, floor)

    # nudge the outer box if a zero or pole sits on its boundary
    for k in range(20):
        try:
            total = count(box)
            break
        except _EdgeHit:
            d = (1e-3 * (k + 1) * 0.618) * scale
            box = (box[0] - d, box[1] + d * 0.7, box[2] - d * 0.9, box[3] + d * 1.1)
    else:
        raise ZeroSearchError("could not place region edges away from zeros")

    found: list[ZeroOfPhiPrime] = []

    def verify(z, m, size):
        h = max(size, 1e-9 * scale)
        for frac in (1.0, 0.73, 1.37):
            b = (z.real - h * frac, z.real + h * frac * 1.1, z.imag - h * frac * 0.9, z.imag + h * frac)
            try:
                return count(b) == m
            except _EdgeHit:
                continue
        return False

    def search(b, n, depth):
        if n == 0:
            return
        size = max(b[1] - b[0], b[3] - b[2])
        c = complex((b[0] + b[1]) / 2, (b[2] + b[3]) / 2)
        if n == 1 or size < 1e-3 * scale:
            try:
                z = _polish(f, df, c, n)
            except ZeroDivisionError:
                z = None
            if z is not None and b[0] - 0.05 * size <= z.real <= b[1] + 0.05 * size and b[2] - 0.05 * size <= z.imag <= b[3] + 0.05 * size:
                if verify(z, n, max(1e-6 * scale, 1e-3 * size)):
                    found.append(ZeroOfPhiPrime(complex(z), n))
                    return
        if depth > max_depth:
            raise ZeroSearchError(f"bisection did not converge (depth {max_depth})")
        for frac in (0.5 + 0.0173, 0.5 - 0.0291, 0.5 + 0.0413, 0.41, 0.59):
            xm = b[0] + frac * (b[1] - b[0])
            ym = b[2] + (1 - frac) * (b[3] - b[2])
            kids = [(b[0], xm, b[2], ym), (xm, b[1], b[2], ym), (b[0], xm, ym, b[3]), (xm, b[1], ym, b[3])]
            try:
                counts = [count(k) for k in kids]
            except _EdgeHit:
                continue
            if sum(counts) == n:
                break
        else:
            raise ZeroSearchError("could not split box away from zeros")
        for k, nk in zip(kids, counts):
            search(k, nk, depth + 1)

    search(box, total, 0)
    # merge duplicates found from adjacent boxes
    merged: list[ZeroOfPhiPrime] = []
    for zr in sorted(found, key=lambda q: (q.location.real, q.location.imag)):
        if merged and abs(merged[-1].location - zr.location) < 1e-8 * scale:
            continue
        merged.append(zr)
    if domain is not None:
        merged = [zr for zr in merged if domain.inside(zr.location)]
    return merged


# -- branch tracking -----------------------------------------------------------------

def sqrt_tracked(fp, path: Sequence[complex], sign: int = 1, max_depth: int = 40) -> np.ndarray:
    """Continuous branch of ``sqrt(fp)`` along a polyline.

    The branch at each sample is the square root nearest the previous one.
    A step over which ``arg fp`` changes by more than ``pi/2`` (so the root
    turns by more than ``pi/4``) is halved recursively; ``BranchError`` is
    raised when halving ``max_depth`` times does not resolve it, or on an
    exact zero.
    """
    f = fp.eval if isinstance(fp, RationalFunction) else fp
    path = np.asarray(path, dtype=complex)
    w0 = np.sqrt(complex(f(path[0])))
    if w0 == 0:
        raise BranchError(f"path starts at a zero ({path[0]})")
    out = np.empty(path.size, dtype=complex)
    out[0] = w0 if sign >= 0 else -w0

    def step(a, b, wa, depth):
        wb = np.sqrt(complex(f(b)))
        if wb == 0:
            raise BranchError(f"path passes through a zero at {b}")
        if abs(wb + wa) < abs(wb - wa):
            wb = -wb
        if abs(np.angle(wb / wa)) > np.pi / 4:
            if depth >= max_depth:
                raise BranchError(f"branch ambiguity near {b}")
            m = 0.5 * (a + b)
            wm = step(a, m, wa, depth + 1)
            return step(m, b, wm, depth + 1)
        return wb

    for k in range(1, path.size):
        out[k] = step(path[k - 1], path[k], out[k - 1], 0)
    return out


def _chord_integral(f, a: complex, b: complex, wa: complex) -> tuple[complex, complex]:
    """``int_a^b sqrt(f) dz`` on the straight chord, branch continued from ``wa``."""
    nodes = a + (b - a) * (0.5 * (_GL_X + 1.0))
    end_is_zero = complex(f(b)) == 0
    pts = np.concatenate([[a], nodes] + ([] if end_is_zero else [[b]]))
    w = sqrt_tracked(f, pts, 1)
    if abs(w[0] - wa) > abs(w[0] + wa):
        w = -w
    val = 0.5 * (b - a) * np.dot(_GL_W, w[1 : 1 + nodes.size])
    return complex(val), (0j if end_is_zero else complex(w[-1]))


# -- trajectories -------------------------------------------------------------------

@dataclass
class Arc:
    kind: str  # "plus" | "minus"
    points: np.ndarray
    start_zero: int | None
    end: dict
    length: float
    drift: float
    drift_bound: float
    departure_angle: float | None = None
    closure_gap: float | None = None

    @property
    def end_type(self) -> str:
        return self.end["type"]


@dataclass
class _Tracer:
    fp: object
    kind: str
    region: object | None
    zeros: Sequence[ZeroOfPhiPrime]
    scale: float
    rtol: float = 1e-10

    def __post_init__(self):
        self.f = self.fp.eval if isinstance(self.fp, RationalFunction) else self.fp
        self.rot = 1.0 if self.kind == "plus" else 1j

    def direction(self, z: complex, ref: complex) -> complex:
        w = np.sqrt(complex(self.f(z)))
        a = abs(w)
        if a == 0:
            return ref
        d = self.rot * np.conj(w) / a
        return d if (d * np.conj(ref)).real >= 0 else -d

    def run(self, start: complex, ref: complex, max_length: float, start_zero: int | None, closure: bool):
        scale = self.scale
        base_step = 1e-2 * scale
        state = {"ref": complex(ref)}

        def fun(s, y):
            return np.array([self.direction(complex(y[0]), state["ref"])])

        solver = DOP853(fun, 0.0, np.array([complex(start)]), max_length, max_step=base_step,
                        rtol=self.rtol, atol=self.rtol * scale)
        pts = [complex(start)]
        end = {"type": "max_length"}
        closure_gap = None
        start_dir = complex(ref)
        zlocs = np.array([zr.location for zr in self.zeros], dtype=complex)
        while solver.status == "running":
            if zlocs.size:
                dz = np.abs(zlocs - solver.y[0])
                if start_zero is not None and solver.t < 100 * 1e-4 * scale:
                    dz[start_zero] = np.inf
                dmin = float(dz.min()) if dz.size else np.inf
                solver.max_step = max(min(base_step, 0.5 * dmin), 1e-8 * scale)
            msg = solver.step()
            if solver.status == "failed":
                raise StokesGraphError(f"trajectory step-size collapse near {pts[-1]}: {msg}")
            znew = complex(solver.y[0])
            state["ref"] = self.direction(znew, state["ref"])
            dense = solver.dense_output()
            s0, s1 = solver.t_old, solver.t
            # region exit
            if self.region is not None and not self.region.inside(znew):
                lo, hi = s0, s1
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if self.region.inside(complex(dense(mid)[0])):
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-13 * scale:
                        break
                zb = complex(dense(lo)[0])
                pts.append(zb)
                end = {"type": "boundary", "point": zb}
                break
            # zero approach
            if zlocs.size:
                ss = np.linspace(s0, s1, 17)
                zz = dense(ss)[0]
                for i, zl in enumerate(zlocs):
                    if i == start_zero and s1 < 100 * 1e-4 * scale:
                        continue
                    dd = np.abs(zz - zl)
                    j = int(np.argmin(dd))
                    if dd[j] < 1e-4 * scale:
                        pts.extend(complex(v) for v in zz[1 : j + 1])
                        pts.append(complex(zl))
                        end = {"type": "zero", "zero": i, "point": complex(zl)}
                        break
                if end["type"] == "zero":
                    break
            # closure
            if closure and s1 > 1e-2 * scale:
                ss = np.linspace(s0, s1, 33)
                dd = np.abs(dense(ss)[0] - start)
                j = int(np.argmin(dd))
                if dd[j] < 1e-3 * scale:
                    lo, hi = ss[max(j - 1, 0)], ss[min(j + 1, 32)]
                    r = minimize_scalar(lambda s: abs(complex(dense(s)[0]) - start), bounds=(lo, hi),
                                        method="bounded", options={"xatol": 1e-14 * scale})
                    zc = complex(dense(r.x)[0])
                    dirc = self.direction(zc, state["ref"])
                    if r.fun < 1e-6 * scale and (dirc * np.conj(start_dir)).real > 0.999:
                        pts.append(zc)
                        closure_gap = float(r.fun)
                        end = {"type": "closed", "point": zc}
                        break
            pts.append(znew)
        return np.array(pts), end, closure_gap


def _drift(f, pts: np.ndarray, kind: str, w_start: complex, phi_start: complex = 0j) -> tuple[float, float, np.ndarray]:
    """Max |Im Phi| (plus) or |Re Phi| (minus) along the arc, via chord quadrature."""
    Phi = [phi_start]
    wa = w_start
    absw = [abs(w_start)]
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            Phi.append(Phi[-1])
            continue
        val, wa = _chord_integral(f, a, b, wa)
        Phi.append(Phi[-1] + val)
        absw.append(abs(wa))
    Phi = np.array(Phi)
    part = Phi.imag if kind == "plus" else Phi.real
    return float(np.max(np.abs(part))), float(np.median(absw)), Phi


def trace_trajectory(
    fp,
    start: complex,
    kind: str = "plus",
    max_length: float = 50.0,
    region=None,
    zeros: Sequence[ZeroOfPhiPrime] = (),
    sign: int = 1,
    scale: float | None = None,
) -> Arc:
    """Trace a horizontal (``plus``) or vertical (``minus``) trajectory from ``start``.

    Integrates ``dz/ds = conj(sqrt(phi'))/|sqrt(phi')|`` (times ``i`` for the
    minus family) with an adaptive 8th-order Runge-Kutta stepper and nearest
    branch continuation.  Stops on region exit, closure, approach to a zero
    or ``max_length``.
    """
    if kind not in ("plus", "minus"):
        raise ValueError("kind must be 'plus' or 'minus'")
    scale = scale or (region_scale(region) if region is not None else 1.0)
    f = fp.eval if isinstance(fp, RationalFunction) else fp
    w0 = np.sqrt(complex(f(start)))
    if w0 == 0:
        raise ValueError("start is a zero of phi'; use stokes_graph for departures from zeros")
    w0 = w0 if sign >= 0 else -w0
    rot = 1.0 if kind == "plus" else 1j
    d0 = rot * np.conj(w0) / abs(w0)
    tr = _Tracer(fp, kind, region, zeros, scale)
    pts, end, gap = tr.run(complex(start), d0, max_length, None, closure=True)
    drift, med, _ = _drift(f, pts, kind, w0)
    length = float(np.sum(np.abs(np.diff(pts))))
    return Arc(kind, pts, None, end, length, drift, 1e-8 * max(length, 1e-300) * med, None, gap)


def _departures(fp, z0: ZeroOfPhiPrime, others: Sequence[complex], scale: float) -> tuple[complex, list[float], list[float]]:
    f = fp.eval if isinstance(fp, RationalFunction) else fp
    ds = [abs(z0.location - o) for o in others if o != z0.location]
    r = min([0.25 * d for d in ds] + [0.1 * scale])
    m = z0.order
    a = cauchy_derivatives(f, z0.location, m, r)[m] / float(np.prod(np.arange(1, m + 1)))
    arg_a = float(np.angle(a))
    plus = [(TWO_PI * j - arg_a) / (m + 2) for j in range(m + 2)]
    minus = [(TWO_PI * j + np.pi - arg_a) / (m + 2) for j in range(m + 2)]
    return a, plus, minus


def _ray_phi(f, z0: complex, theta: float, delta: float, n: int = 24) -> tuple[complex, complex]:
    """``int_0^delta sqrt(f(z0 + rho e^{i theta})) e^{i theta} d rho`` with rho = delta u^2.

    Returns (Phi, sqrt f at the far end) on a branch continued from the far end.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    e = np.exp(1j * theta)
    pts = z0 + delta * u[::-1] ** 2 * e  # far end first
    pts = np.concatenate([[z0 + delta * e], pts])
    sq = sqrt_tracked(f, pts, 1)
    vals = sq[1:][::-1]
    # d rho = 2 delta u du, u in [0,1] -> factor 0.5 from Gauss interval
    Phi = np.sum(0.5 * w * vals * 2 * delta * u) * e
    return complex(Phi), complex(sq[0])


@dataclass
class StokesGraph:
    zeros: list[ZeroOfPhiPrime]
    arcs: list[Arc] = field(default_factory=list)
    region_scale: float = 1.0

    def arcs_from(self, i: int, kind: str | None = None) -> list[Arc]:
        return [a for a in self.arcs if a.start_zero == i and (kind is None or a.kind == kind)]

    def check_invariants(self, angle_tol: float = 1e-3) -> list[str]:
        problems = []
        for i, zr in enumerate(self.zeros):
            m = zr.order
            for kind in ("plus", "minus"):
                arcs = self.arcs_from(i, kind)
                if len(arcs) != m + 2:
                    problems.append(f"zero {i}: {len(arcs)} {kind}-arcs, expected {m + 2}")
            plus = sorted(a.departure_angle % TWO_PI for a in self.arcs_from(i, "plus"))
            gaps = np.diff(plus + [plus[0] + TWO_PI]) if plus else []
            for g in gaps:
                if abs(g - TWO_PI / (m + 2)) > angle_tol:
                    problems.append(f"zero {i}: adjacent plus-arc angle {g:.6f} != 2pi/{m + 2}")
            for a in self.arcs_from(i, "minus"):
                th = a.departure_angle
                off = min(abs(_wrap(th - (p + np.pi / (m + 2)))) for p in plus) if plus else np.inf
                if off > angle_tol:
                    problems.append(f"zero {i}: minus-arc at {th:.6f} does not bisect plus-arcs")
        for k, a in enumerate(self.arcs):
            if a.drift > a.drift_bound:
                problems.append(f"arc {k}: level-set drift {a.drift:.3e} exceeds {a.drift_bound:.3e}")
        return problems

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arc", "kind", "start_zero", "end_type", "index", "re", "im"])
        for k, a in enumerate(self.arcs):
            for i, z in enumerate(a.points):
                w.writerow([k, a.kind, a.start_zero, a.end_type, i, f"{z.real:.12e}", f"{z.imag:.12e}"])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "zeros": [{"location": [z.location.real, z.location.imag], "order": z.order} for z in self.zeros],
            "arcs": [
                {
                    "kind": a.kind,
                    "start_zero": a.start_zero,
                    "end": {k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in a.end.items()},
                    "length": a.length,
                    "drift": a.drift,
                    "drift_bound": a.drift_bound,
                    "departure_angle": a.departure_angle,
                }
                for a in self.arcs
            ],
        }


def _wrap(x: float) -> float:
    return (x + np.pi) % TWO_PI - np.pi


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get("EXQ_THREADS", "1")))
    except ValueError:
        return 1


def _trace_from_zero(fp, zeros, i, theta0, kind, region, scale, max_length):
    f = fp.eval if isinstance(fp, RationalFunction) else fp
    z0 = zeros[i]
    m = z0.order
    others = [zr.location for j, zr in enumerate(zeros) if j != i]
    poles = [c for c, _ in _pole_orders(fp)]
    near = min([abs(z0.location - o) for o in others + poles] + [scale])
    delta = min(1e-4 * scale, 0.01 * near)

    def phi2(th):
        P, _ = _ray_phi(f, z0.location, th, delta)
        return P * P

    half = np.pi / (2 * (m + 2))
    g = lambda th: phi2(th).imag  # noqa: E731
    want_real = kind == "plus"
    lo, hi = theta0 - half, theta0 + half
    try:
        th = brentq(g, lo, hi, xtol=1e-15)
    except ValueError:
        th = theta0
    P2 = phi2(th)
    if (P2.real > 0) != want_real:  # landed on the other family; keep the analytic angle
        th = theta0
    start = z0.location + delta * np.exp(1j * th)
    Phi, w_far = _ray_phi(f, z0.location, th, delta)
    e = np.exp(1j * th)
    rot = 1.0 if kind == "plus" else 1j
    # choose the branch whose trajectory direction points away from the zero
    if (rot * np.conj(w_far) * np.conj(e)).real < 0:
        w_far, Phi = -w_far, -Phi
    d0 = rot * np.conj(w_far) / abs(w_far)
    tr = _Tracer(fp, kind, region, zeros, scale)
    pts, end, gap = tr.run(start, d0, max_length, i, closure=False)
    pts = np.concatenate([[z0.location], pts])
    drift, med, _ = _drift(f, pts[1:], kind, w_far, Phi)
    length = float(np.sum(np.abs(np.diff(pts))))
    return Arc(kind, pts, i, end, length, drift, 1e-8 * length * med, float(th), gap)


def stokes_graph(fp, region, max_length: float | None = None, strict: bool = True,
                 zeros: Sequence[ZeroOfPhiPrime] | None = None) -> StokesGraph:
    """Zeros of ``fp`` in ``region`` and all plus/minus arcs issuing from them."""
    scale = region_scale(region)
    if zeros is None:
        zeros = find_zeros(fp, region.bounding_box(), domain=region if isinstance(region, Domain) else None)
        if not isinstance(region, Domain):
            zeros = [z for z in zeros if region.inside(z.location)]
    zeros = list(zeros)
    max_length = max_length or 20.0 * scale
    jobs = []
    for i, z0 in enumerate(zeros):
        others = [zr.location for zr in zeros]
        _, plus, minus = _departures(fp, z0, others + [c for c, _ in _pole_orders(fp)], scale)
        jobs += [(i, th, "plus") for th in plus] + [(i, th, "minus") for th in minus]
    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        arcs = list(ex.map(lambda j: _trace_from_zero(fp, zeros, j[0], j[1], j[2], region, scale, max_length), jobs))
    graph = StokesGraph(zeros, arcs, scale)
    if strict:
        problems = graph.check_invariants()
        if problems:
            raise StokesGraphError("; ".join(problems))
    return graph


# -- boundary metric and classification ------------------------------------------------

def boundary_metric_check(domain: Domain, phi: RationalFunction, lam: float) -> list[float]:
    """Per-contour max of ``|phi'(z) tau^2 - (1 + lam alpha kappa)|``."""
    dphi = phi.derivative()
    out = []
    for k, c in enumerate(domain.contours):
        t = c.grid()
        tau = c.tangent(t)
        lhs = dphi(c.eval(t)) * tau**2
        rhs = 1.0 + lam * domain.alpha(k) * c.curvature(t)
        out.append(float(np.max(np.abs(lhs - rhs))))
    return out


@dataclass
class Classification:
    graph_arcs: int
    closed_count: int
    boundary_ending_count: int
    indeterminate_count: int
    sampled: int
    sampled_closed: int
    maximal: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classify(graph: StokesGraph, region, fp, n_samples: int = 6, seed: int = 0,
             max_length: float | None = None) -> Classification:
    """Trajectory-topology evidence for maximality (not a proof).

    Maximal means: no plus-arc of the graph ends on the boundary or is left
    undetermined, and every sampled horizontal trajectory closes (or runs
    into a zero).
    """
    from .geometry import sample_points

    rng = np.random.default_rng(seed)
    scale = region_scale(region)
    max_length = max_length or 20.0 * scale
    if isinstance(region, Domain):
        pts = sample_points(region, n_samples, rng)
    else:
        x0, x1, y0, y1 = region.bounding_box()
        pts = [complex(rng.uniform(x0 + 0.05 * (x1 - x0), x1 - 0.05 * (x1 - x0)),
                       rng.uniform(y0 + 0.05 * (y1 - y0), y1 - 0.05 * (y1 - y0))) for _ in range(n_samples)]
    sampled = []
    for z in pts:
        f = fp.eval if isinstance(fp, RationalFunction) else fp
        if abs(complex(f(z))) == 0:
            continue
        sampled.append(trace_trajectory(fp, z, "plus", max_length, region, graph.zeros, scale=scale))
    plus = [a for a in graph.arcs if a.kind == "plus"]
    closed = sum(a.end_type == "closed" for a in plus + sampled)
    boundary = sum(a.end_type == "boundary" for a in plus + sampled)
    indet = sum(a.end_type == "max_length" for a in plus + sampled)
    s_closed = sum(a.end_type in ("closed", "zero") for a in sampled)
    maximal = boundary == 0 and indet == 0 and s_closed == len(sampled)
    return Classification(len(graph.arcs), closed, boundary, indet, len(sampled), s_closed, maximal)


# -- rendering ---------------------------------------------------------------------

_ARC_COLORS = {"plus": "#c0392b", "minus": "#2471a3"}


def render_svg(graph: StokesGraph, region, size: int = 1024, margin: float = 0.05) -> str:
    """Deterministic SVG of the region outline, arcs and zeros."""
    x0, x1, y0, y1 = region.bounding_box()
    span = max(x1 - x0, y1 - y0)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    inner = size * (1 - 2 * margin)

    def xy(z: complex) -> str:
        px = size / 2 + (z.real - cx) / span * inner
        py = size / 2 - (z.imag - cy) / span * inner
        return f"{px:.3f},{py:.3f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    for ring in region_outline(region):
        pts = " ".join(xy(complex(z)) for z in ring)
        lines.append(f'<polyline points="{pts}" fill="none" stroke="#000000" stroke-width="2"/>')
    for a in graph.arcs:
        pts = " ".join(xy(complex(z)) for z in a.points)
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{_ARC_COLORS[a.kind]}" stroke-width="1.5"/>')
    for zr in graph.zeros:
        px, py = xy(zr.location).split(",")
        lines.append(f'<circle cx="{px}" cy="{py}" r="5" fill="#000000"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
