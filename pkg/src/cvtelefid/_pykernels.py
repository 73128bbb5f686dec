"""Pure-Python implementation of the hot numerical kernels.

Mirrors ``_kernels.pyx`` function for function; :mod:`cvtelefid.kernels`
picks the compiled module when it imports and falls back to this one.

The ``V_eta`` family is parametrized by the channel invariants ``a, b``,
``c2s = -det C`` and ``v = det V``::

    n(lam)      = -lam/2        + sqrt(a^2 + lam^2/4)
    m(lam, eta) = -lam/(2 eta^2) + sqrt(b^2 + lam^2/(4 eta^4))
    d(lam, eta) = -lam/(2 eta)   + sqrt(c2s + lam^2/(4 eta^2))
"""

from __future__ import annotations

import math

import numpy as np

from .roots import bisect, golden_extremum

N_LAMBDA_GRID = 600
N_ETA_GRID = 512
LAMBDA_RANGE = 1e4
SCAN_XTOL = 1e-11
FINAL_XTOL = 1e-14
MATCH_RTOL = 0.25


def eta_form(lam, eta, a, b, c2s):
    """``(n, m, d)`` of ``V_eta``; ``d`` is NaN where undefined (``det C > 0``)."""
    h = 0.5 * lam
    n = -h + math.sqrt(a * a + h * h)
    he2 = h / (eta * eta)
    m = -he2 + math.sqrt(b * b + he2 * he2)
    he = h / eta
    rad = c2s + he * he
    d = -he + math.sqrt(rad) if rad >= 0 else math.nan
    return n, m, d


def det_residual(lam, eta, a, b, c2s, v):
    """``det V_eta(lam, eta) - v``; NaN outside the physical region of the family."""
    n, m, d = eta_form(lam, eta, a, b, c2s)
    if math.isnan(d):
        return math.nan
    pdet = n * m - d * d
    if pdet <= 0:
        return math.nan
    d1 = d + lam / eta
    xdet = (n + lam) * (m + lam / (eta * eta)) - d1 * d1
    return xdet * pdet - v


def _det_residual_vec(lams, eta, a, b, c2s, v):
    h = 0.5 * lams
    n = -h + np.sqrt(a * a + h * h)
    he2 = h / (eta * eta)
    m = -he2 + np.sqrt(b * b + he2 * he2)
    he = h / eta
    with np.errstate(invalid="ignore"):
        d = -he + np.sqrt(c2s + he * he)
    pdet = n * m - d * d
    d1 = d + lams / eta
    xdet = (n + lams) * (m + lams / (eta * eta)) - d1 * d1
    out = xdet * pdet - v
    out[~(pdet > 0)] = np.nan
    return out


def stationarity_residual(lam, eta, a, b, c2s):
    """``eta (m - 1) - d``: zero where attenuation ``eta`` is stationary."""
    _, m, d = eta_form(lam, eta, a, b, c2s)
    return eta * (m - 1.0) - d


def candidate_fidelity(lam, eta, a, b, c2s):
    """Fidelity after reducing to ``V_eta`` and attenuating by ``eta``."""
    q = 0.25 * lam * lam
    rad = c2s * eta * eta + q
    if rad < 0:
        return math.nan
    denom = (
        2.0
        + math.sqrt(a * a + q)
        + math.sqrt(b * b * eta**4 + q)
        - 2.0 * math.sqrt(rad)
        + 1.0
        - eta * eta
    )
    return 2.0 / denom


def _lambda_scale(a, b, c2s):
    return a + b + math.sqrt(abs(c2s))


def lambda_roots(eta, a, b, c2s, v, n_grid=N_LAMBDA_GRID, xtol=FINAL_XTOL):
    """Roots ``lam >= 0`` of ``det V_eta = v`` inside the physical region."""
    scale = _lambda_scale(a, b, c2s)
    hi = LAMBDA_RANGE * scale / (eta * eta)
    t = np.linspace(0.0, math.asinh(hi / scale), n_grid)
    xs = scale * np.sinh(t)
    fs = _det_residual_vec(xs, eta, a, b, c2s, v)
    f = lambda x: det_residual(x, eta, a, b, c2s, v)  # noqa: E731
    zero_tol = 1e-13 * max(1.0, v)

    out = []
    fin = np.isfinite(fs)
    if fin[0] and abs(fs[0]) <= zero_tol:
        out.append(0.0)
    both = fin[:-1] & fin[1:]
    with np.errstate(invalid="ignore"):
        idx = np.nonzero(both & (fs[:-1] * fs[1:] < 0))[0]
    for i in idx:
        out.append(bisect(f, xs[i], xs[i + 1], fs[i], xtol))

    # extrema approaching zero without a sampled sign change
    g0, g1, g2 = fs[:-2], fs[1:-1], fs[2:]
    with np.errstate(invalid="ignore"):
        same = (np.sign(g0) == np.sign(g1)) & (np.sign(g1) == np.sign(g2)) & (g1 != 0)
        dip = (np.abs(g1) < np.abs(g0)) & (np.abs(g1) <= np.abs(g2))
    cand = np.nonzero(same & dip & fin[:-2] & fin[1:-1] & fin[2:])[0] + 1
    for i in cand:
        if i == 1 and fin[0] and abs(fs[0]) <= zero_tol:
            continue
        sign = 1.0 if fs[i] > 0 else -1.0
        xm, fm = golden_extremum(f, xs[i - 1], xs[i + 1], sign)
        if not math.isfinite(fm):
            continue
        if fm != 0.0 and (fm > 0) != (fs[i] > 0):
            out.append(bisect(f, xs[i - 1], xm, fs[i - 1], xtol))
            out.append(bisect(f, xm, xs[i + 1], fm, xtol))
        elif abs(fm) <= zero_tol:
            out.append(float(xm))
    out.sort()
    return np.array(out, dtype=float)


def _nearest(values, target):
    k = int(np.argmin(np.abs(values - target)))
    return k, float(values[k])


def _refine_interior(eta0, eta1, l0, l1, h0, a, b, c2s, v, n_grid, eta_tol):
    lo, hi, l_lo, l_hi, h_lo = eta0, eta1, l0, l1, h0
    while hi - lo > eta_tol:
        mid = 0.5 * (lo + hi)
        rs = lambda_roots(mid, a, b, c2s, v, n_grid, SCAN_XTOL)
        if rs.size == 0:
            return None
        _, lm = _nearest(rs, 0.5 * (l_lo + l_hi))
        hm = stationarity_residual(lm, mid, a, b, c2s)
        if hm == 0.0:
            lo = hi = mid
            l_lo = l_hi = lm
            break
        if (hm > 0) == (h_lo > 0):
            lo, l_lo, h_lo = mid, lm, hm
        else:
            hi, l_hi = mid, lm
    eta = 0.5 * (lo + hi)
    rs = lambda_roots(eta, a, b, c2s, v, n_grid, FINAL_XTOL)
    if rs.size == 0:
        return None
    _, lam = _nearest(rs, 0.5 * (l_lo + l_hi))
    return lam, eta


def interior_candidates(a, b, c2s, v, n_eta=N_ETA_GRID, n_grid=N_LAMBDA_GRID, eta_tol=1e-10):
    """Solutions ``(lam, eta)``, ``0 < eta < 1``, of ``det V_eta = v`` and ``eta (m-1) = d``.

    Scans ``eta = k/(n_eta+1)``, follows each ``lam`` branch between
    neighbouring grid points by nearest-root matching and bisects every sign
    change of the stationarity residual.
    """
    out = []
    scale = _lambda_scale(a, b, c2s)
    prev = None
    for k in range(1, n_eta + 2):
        eta = k / (n_eta + 1.0)
        rs = lambda_roots(eta, a, b, c2s, v, n_grid, SCAN_XTOL)
        hs = np.array([stationarity_residual(l, eta, a, b, c2s) for l in rs])
        if prev is not None and rs.size and prev[1].size:
            peta, prs, phs = prev
            for j in range(rs.size):
                i, pl = _nearest(prs, rs[j])
                if abs(rs[j] - pl) > MATCH_RTOL * (abs(rs[j]) + abs(pl)) + 1e-9 * scale:
                    continue
                if phs[i] * hs[j] < 0:
                    sol = _refine_interior(peta, eta, pl, rs[j], phs[i], a, b, c2s, v, n_grid, eta_tol)
                    if sol is not None and sol[1] < 1.0 - 10 * eta_tol:
                        out.append(sol)
        prev = (eta, rs, hs)
    out.sort(key=lambda s: (s[1], s[0]))
    dedup = []
    for lam, eta in out:
        if dedup and abs(eta - dedup[-1][1]) < 1e-8 and abs(lam - dedup[-1][0]) < 1e-6 * (1.0 + abs(lam)):
            continue
        dedup.append((lam, eta))
    return np.array(dedup, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

OracleParams = 8
LOG_SQUEEZE_MAX = 3.0
TAU_MIN = 0.02


def decode_params(x):
    """Unconstrained search vector -> ``(phi, s, psi, tau)`` for modes a and b."""
    out = []
    for k in (0, 4):
        phi, u, psi, w = x[k : k + 4]
        s = math.exp(LOG_SQUEEZE_MAX * math.tanh(u))
        cw = math.cos(w)
        tau = TAU_MIN + (1.0 - TAU_MIN) * cw * cw
        out.append((phi, s, psi, tau))
    return out


def _euler(phi, s, psi):
    c1, s1 = math.cos(phi), math.sin(phi)
    c2, s2 = math.cos(psi), math.sin(psi)
    # rotation(phi) @ diag(s, 1/s) @ rotation(psi)
    r00, r01 = c1 * s, s1 / s
    r10, r11 = -s1 * s, c1 / s
    return (
        r00 * c2 - r01 * s2,
        r00 * s2 + r01 * c2,
        r10 * c2 - r11 * s2,
        r10 * s2 + r11 * c2,
    )


def _sandwich(S, M00, M01, M10, M11, T):
    """``S M T^T`` for 2x2 matrices stored as 4-tuples."""
    s00, s01, s10, s11 = S
    t00, t01, t10, t11 = T
    a00 = s00 * M00 + s01 * M10
    a01 = s00 * M01 + s01 * M11
    a10 = s10 * M00 + s11 * M10
    a11 = s10 * M01 + s11 * M11
    return (
        a00 * t00 + a01 * t01,
        a00 * t10 + a01 * t11,
        a10 * t00 + a11 * t01,
        a10 * t10 + a11 * t11,
    )


def oracle_fidelity(V, x):
    """Coherent-state fidelity after local symplectic-then-attenuation maps."""
    (pa, sa, qa, ta), (pb, sb, qb, tb) = decode_params(x)
    Sa = _euler(pa, sa, qa)
    Sb = _euler(pb, sb, qb)
    A = _sandwich(Sa, V[0][0], V[0][1], V[1][0], V[1][1], Sa)
    B = _sandwich(Sb, V[2][2], V[2][3], V[3][2], V[3][3], Sb)
    C = _sandwich(Sa, V[0][2], V[0][3], V[1][2], V[1][3], Sb)
    ta2, tb2, tab = ta * ta, tb * tb, ta * tb
    # N = Z A' Z + Z C' + C'^T Z + B'
    n00 = ta2 * A[0] + (1 - ta2) + 2 * tab * C[0] + tb2 * B[0] + (1 - tb2)
    n11 = ta2 * A[3] + (1 - ta2) - 2 * tab * C[3] + tb2 * B[3] + (1 - tb2)
    n01 = -ta2 * A[1] + tab * (C[1] - C[2]) + tb2 * B[1]
    det = (2.0 + n00) * (2.0 + n11) - n01 * n01
    return 2.0 / math.sqrt(det)


def nelder_mead(f, x0, step, maxfev, xtol, ftol):
    """Adaptive Nelder-Mead minimisation; returns ``(fbest, xbest, nfev)``."""
    n = len(x0)
    rho, chi, psi, sigma = 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n
    sim = [list(x0)]
    for i in range(n):
        y = list(x0)
        y[i] += step
        sim.append(y)
    fs = [f(x) for x in sim]
    nfev = n + 1
    while nfev < maxfev:
        order = sorted(range(n + 1), key=fs.__getitem__)
        sim = [sim[i] for i in order]
        fs = [fs[i] for i in order]
        if max(abs(fi - fs[0]) for fi in fs[1:]) <= ftol and max(
            max(abs(xi[j] - sim[0][j]) for j in range(n)) for xi in sim[1:]
        ) <= xtol:
            break
        xbar = [sum(sim[i][j] for i in range(n)) / n for j in range(n)]
        xw = sim[n]
        xr = [(1 + rho) * xbar[j] - rho * xw[j] for j in range(n)]
        fr = f(xr)
        nfev += 1
        shrink = False
        if fr < fs[0]:
            xe = [(1 + rho * chi) * xbar[j] - rho * chi * xw[j] for j in range(n)]
            fe = f(xe)
            nfev += 1
            if fe < fr:
                sim[n], fs[n] = xe, fe
            else:
                sim[n], fs[n] = xr, fr
        elif fr < fs[n - 1]:
            sim[n], fs[n] = xr, fr
        elif fr < fs[n]:
            xc = [(1 + psi * rho) * xbar[j] - psi * rho * xw[j] for j in range(n)]
            fc = f(xc)
            nfev += 1
            if fc <= fr:
                sim[n], fs[n] = xc, fc
            else:
                shrink = True
        else:
            xcc = [(1 - psi) * xbar[j] + psi * xw[j] for j in range(n)]
            fcc = f(xcc)
            nfev += 1
            if fcc < fs[n]:
                sim[n], fs[n] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for i in range(1, n + 1):
                sim[i] = [sim[0][j] + sigma * (sim[i][j] - sim[0][j]) for j in range(n)]
                fs[i] = f(sim[i])
            nfev += n
    k = min(range(n + 1), key=fs.__getitem__)
    return fs[k], sim[k], nfev


def oracle_search(V, starts, maxfev=3000, polish_fev=1500, xtol=1e-9, ftol=1e-14):
    """Multistart Nelder-Mead over the oracle parametrization.

    Each start runs once with a coarse simplex and is then restarted from
    its best vertex with a small simplex.

    Returns:
        tuple: ``(fidelities, params, nfev)`` arrays, one row per start.
    """
    Vl = [[float(x) for x in row] for row in np.asarray(V)]
    obj = lambda x: -oracle_fidelity(Vl, x)  # noqa: E731
    starts = np.asarray(starts, dtype=float)
    fid = np.empty(len(starts))
    xs = np.empty_like(starts)
    nfev = np.empty(len(starts), dtype=np.int64)
    for k, x0 in enumerate(starts):
        fb, xb, n1 = nelder_mead(obj, list(x0), 0.3, maxfev, xtol, ftol)
        fb, xb, n2 = nelder_mead(obj, xb, 0.02, polish_fev, xtol, ftol)
        fid[k] = -fb
        xs[k] = xb
        nfev[k] = n1 + n2
    return fid, xs, nfev
