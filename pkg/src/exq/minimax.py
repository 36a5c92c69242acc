"""Discrete complex Chebyshev (minimax) approximation.

Solves ``min_x max_i |f_i - (A x)_i|`` over complex ``x``.  The objective is
the max of moduli of affine functions, so the problem is convex.

Two stages:

1. p-norm homotopy: minimise ``sum |r_i|^(2p)`` by damped Newton for
   ``p = 1, 2, 4, ..., 64``, warm-starting each stage.
2. polish: log-barrier interior-point method on the epigraph form
   ``min t  s.t.  |r_i|^2 <= t^2`` started from the homotopy point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


class MinimaxError(RuntimeError):
    pass


@dataclass
class MinimaxResult:
    x: np.ndarray
    norm: float
    stages: list[tuple[int, float]]
    barrier_gap: float
    iterations: int


def _real_system(A: np.ndarray, f: np.ndarray):
    """Residual ``R(y) = R0 - J y`` with ``y = (Re x, Im x)``; J has shape (m, 2, 2K)."""
    Ar, Ai = A.real, A.imag
    J = np.empty((A.shape[0], 2, 2 * A.shape[1]))
    J[:, 0, : A.shape[1]] = Ar
    J[:, 0, A.shape[1] :] = -Ai
    J[:, 1, : A.shape[1]] = Ai
    J[:, 1, A.shape[1] :] = Ar
    R0 = np.stack([f.real, f.imag], axis=1)
    return R0, J


def _residual(R0, J, y):
    return R0 - np.einsum("mik,k->mi", J, y)


def _pnorm_stage(R0, J, y, p, max_iter=100):
    """Damped Newton on F(y) = sum (|r|/rho)^(2p)."""
    for it in range(max_iter):
        R = _residual(R0, J, y)
        a2 = np.sum(R * R, axis=1)
        rho2 = a2.max()
        if rho2 == 0:
            return y, it
        s = a2 / rho2
        JR = np.einsum("mik,mi->mk", J, R)  # J_i^T R_i
        w1 = s ** (p - 1)
        grad = -2 * p * (w1[:, None] * JR).sum(0) / rho2
        Jf = J.reshape(-1, J.shape[2])
        H = 2 * p * (Jf.T * np.repeat(w1, 2)) @ Jf / rho2
        if p > 1:
            w2 = 4 * p * (p - 1) * s ** (p - 2) / rho2**2
            H += (JR.T * w2) @ JR
        H += 1e-14 * np.trace(H) / H.shape[0] * np.eye(H.shape[0])
        step = -np.linalg.solve(H, grad)
        dec = -grad @ step
        F0 = np.sum(s**p)
        if dec < 1e-13 * F0:
            return y, it
        lam = 1.0
        while lam > 1e-12:
            Rn = _residual(R0, J, y + lam * step)
            with np.errstate(over="ignore"):
                Fn = np.sum((np.sum(Rn * Rn, axis=1) / rho2) ** p)
            if Fn <= F0 - 0.25 * lam * dec:
                break
            lam *= 0.5
        else:
            return y, it
        y = y + lam * step
    return y, max_iter


def _barrier(R0, J, y, t, gap_tol=1e-12, mu=10.0, max_newton=200, newton_tol=1e-8):
    """Log-barrier method for min t s.t. t^2 - |R_i(y)|^2 > 0."""
    m = R0.shape[0]
    n = J.shape[2]
    Jf = J.reshape(-1, n)

    def parts(y, t):
        R = _residual(R0, J, y)
        g = t * t - np.sum(R * R, axis=1)
        return R, g

    R, g = parts(y, t)
    if np.any(g <= 0):
        raise MinimaxError("barrier start is not strictly feasible")
    s = 2.0 * m / max(0.01 * t, 1e-300)
    total = 0
    while True:
        for _ in range(max_newton):
            total += 1
            R, g = parts(y, t)
            JR = np.einsum("mik,mi->mk", J, R)
            # grad of g: x-part 2 J^T R, t-part 2t
            Gx = 2 * JR
            Gt = 2 * t * np.ones(m)
            ig = 1.0 / g
            grad = np.concatenate([-(Gx * ig[:, None]).sum(0), [s - (Gt * ig).sum()]])
            ig2 = ig * ig
            Hxx = (Gx.T * ig2) @ Gx + 2 * (Jf.T * np.repeat(ig, 2)) @ Jf
            Hxt = (Gx.T * ig2) @ Gt
            Htt = (Gt * Gt * ig2).sum() - 2 * ig.sum()
            H = np.empty((n + 1, n + 1))
            H[:n, :n] = Hxx
            H[:n, n] = Hxt
            H[n, :n] = Hxt
            H[n, n] = Htt
            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = -grad @ step
            if dec / 2 < newton_tol:
                break
            F0 = s * t - np.log(g).sum()
            lam = 1.0
            while lam > 1e-14:
                yn, tn = y + lam * step[:n], t + lam * step[n]
                _, gn = parts(yn, tn)
                if np.all(gn > 0) and s * tn - np.log(gn).sum() <= F0 - 0.25 * lam * dec:
                    break
                lam *= 0.5
            else:
                break
            y, t = yn, tn
        gap = 2.0 * m / s
        if gap < gap_tol * max(t, 1e-300):
            return y, t, gap, total
        s *= mu
        if s > 1e300:  # pragma: no cover
            return y, t, gap, total


def solve_minimax(
    A: np.ndarray,
    f: np.ndarray,
    p_max: int = 64,
    stage_tol: float = 1e-9,
    gap_tol: float = 1e-11,
) -> MinimaxResult:
    """Minimise ``max_i |f_i - (A x)_i|`` over complex ``x``.

    ``A`` should have columns of comparable scale; the caller is responsible
    for basis scaling.
    """
    A = np.asarray(A, dtype=complex)
    f = np.asarray(f, dtype=complex)
    R0, J = _real_system(A, f)
    y = np.linalg.lstsq(A, f, rcond=None)[0]
    y = np.concatenate([y.real, y.imag])
    stages: list[tuple[int, float]] = []
    prev = np.inf
    p = 2
    iters = 0
    while p <= p_max:
        y, it = _pnorm_stage(R0, J, y, p)
        iters += it
        nrm = float(np.sqrt(np.max(np.sum(_residual(R0, J, y) ** 2, axis=1))))
        stages.append((p, nrm))
        log.debug("p=%d norm=%.12g (%d Newton steps)", p, nrm, it)
        if abs(prev - nrm) < stage_tol * max(nrm, 1e-300):
            break
        prev = nrm
        p *= 2
    nrm = stages[-1][1]
    gap = 0.0
    # a residual at roundoff level needs no polish (and would break the barrier)
    if nrm > 1e-12 * max(float(np.max(np.abs(f))), 1e-300):
        yb, t, gap, it = _barrier(R0, J, y, nrm * (1 + 1e-3), gap_tol=gap_tol)
        iters += it
        R = _residual(R0, J, yb)
        nb = float(np.sqrt(np.max(np.sum(R * R, axis=1))))
        if nb <= nrm:
            y, nrm = yb, nb
    K = A.shape[1]
    return MinimaxResult(y[:K] + 1j * y[K:], nrm, stages, float(gap), iters)
