"""Bracketing root search on the half line ``[0, hi]`` for scalar callables."""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def sinh_grid(scale: float, hi: float, n: int) -> np.ndarray:
    """``n`` points from 0 to ``hi``: linear near 0, geometric beyond ``scale``."""
    t = np.linspace(0.0, math.asinh(hi / scale), n)
    return scale * np.sinh(t)


def bisect(f, lo, hi, flo, xtol=1e-14, maxiter=200):
    """Plain bisection on a sign-changing bracket; returns the midpoint."""
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_extremum(f, lo, hi, sign, iters=60):
    """Locate the minimum of ``sign * f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = sign * f(x1), sign * f(x2)
    for _ in range(iters):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = sign * f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = sign * f(x2)
    x = x1 if f1 < f2 else x2
    return x, f(x)


def roots_from_samples(f, xs, fs, xtol=1e-14, zero_tol=0.0):
    """Refine every root bracketed by the samples ``(xs, fs)``.

    Sign changes go straight to bisection. A local extremum of ``f`` that
    approaches zero without a sampled sign change is refined by golden-section
    search, so close root pairs inside one cell are not lost.
    """
    out = []
    finite = np.isfinite(fs)
    n = len(xs)
    for i in range(n):
        if finite[i] and fs[i] == 0.0:
            out.append(float(xs[i]))
    for i in range(n - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if fs[i] * fs[i + 1] < 0:
            out.append(bisect(f, xs[i], xs[i + 1], fs[i], xtol))
    for i in range(1, n - 1):
        if not (finite[i - 1] and finite[i] and finite[i + 1]):
            continue
        g0, g1, g2 = fs[i - 1], fs[i], fs[i + 1]
        if g0 == 0 or g1 == 0 or g2 == 0:
            continue
        if not ((g0 > 0) == (g1 > 0) == (g2 > 0)):
            continue
        if not (abs(g1) < abs(g0) and abs(g1) <= abs(g2)):
            continue
        sign = 1.0 if g1 > 0 else -1.0
        xm, fm = golden_extremum(f, xs[i - 1], xs[i + 1], sign)
        if not math.isfinite(fm):
            continue
        if (fm > 0) != (g1 > 0) and fm != 0.0:
            out.append(bisect(f, xs[i - 1], xm, g0, xtol))
            out.append(bisect(f, xm, xs[i + 1], fm, xtol))
        elif abs(fm) <= zero_tol:
            out.append(float(xm))
    return sorted(out)


def scan_roots(f, scale, hi, n_grid=600, xtol=1e-14, zero_tol=0.0):
    """All roots of ``f`` on ``[0, hi]`` visible on a ``sinh`` grid of ``n_grid`` points."""
    xs = sinh_grid(scale, hi, n_grid)
    with np.errstate(invalid="ignore", divide="ignore"):
        fs = np.array([f(x) for x in xs], dtype=float)
    return roots_from_samples(f, xs, fs, xtol, zero_tol)
