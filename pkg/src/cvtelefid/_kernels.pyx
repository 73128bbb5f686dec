# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mirror of :mod:`cvtelefid._pykernels`.

Same algorithms, same grids and same tie-breaking; only the inner loops run
in C.
"""

from libc.math cimport sqrt, sinh, asinh, fabs, exp, tanh, cos, sin, NAN, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

cdef enum:
    MAXROOTS = 128

N_LAMBDA_GRID = 600
N_ETA_GRID = 512
cdef double LAMBDA_RANGE = 1e4
cdef double SCAN_XTOL = 1e-11
cdef double FINAL_XTOL = 1e-14
cdef double MATCH_RTOL = 0.25
cdef double GOLDEN = 0.6180339887498949
cdef double LOG_SQUEEZE_MAX = 3.0
cdef double TAU_MIN = 0.02


cdef struct EtaArgs:
    double eta
    double a
    double b
    double c2s
    double v


cdef inline double c_det_residual(double lam, EtaArgs* p) noexcept nogil:
    cdef double h = 0.5 * lam
    cdef double n = -h + sqrt(p.a * p.a + h * h)
    cdef double he2 = h / (p.eta * p.eta)
    cdef double m = -he2 + sqrt(p.b * p.b + he2 * he2)
    cdef double he = h / p.eta
    cdef double rad = p.c2s + he * he
    cdef double d, pdet, d1, xdet
    if rad < 0:
        return NAN
    d = -he + sqrt(rad)
    pdet = n * m - d * d
    if not pdet > 0:
        return NAN
    d1 = d + lam / p.eta
    xdet = (n + lam) * (m + lam / (p.eta * p.eta)) - d1 * d1
    return xdet * pdet - p.v


cdef inline double c_stationarity(double lam, double eta, double a, double b, double c2s) noexcept nogil:
    cdef double h = 0.5 * lam
    cdef double he2 = h / (eta * eta)
    cdef double m = -he2 + sqrt(b * b + he2 * he2)
    cdef double he = h / eta
    cdef double rad = c2s + he * he
    cdef double d = -he + sqrt(rad) if rad >= 0 else NAN
    return eta * (m - 1.0) - d


cdef inline double c_candidate(double lam, double eta, double a, double b, double c2s) noexcept nogil:
    cdef double q = 0.25 * lam * lam
    cdef double rad = c2s * eta * eta + q
    if rad < 0:
        return NAN
    return 2.0 / (2.0 + sqrt(a * a + q) + sqrt(b * b * eta * eta * eta * eta + q)
                  - 2.0 * sqrt(rad) + 1.0 - eta * eta)


cdef double c_bisect(EtaArgs* p, double lo, double hi, double flo, double xtol) noexcept nogil:
    cdef int it
    cdef double mid, fm
    for it in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * (fabs(mid) if fabs(mid) > 1.0 else 1.0):
            break
        fm = c_det_residual(mid, p)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


cdef void c_golden(EtaArgs* p, double lo, double hi, double sign, double* xout, double* fout) noexcept nogil:
    cdef double x1 = hi - GOLDEN * (hi - lo)
    cdef double x2 = lo + GOLDEN * (hi - lo)
    cdef double f1 = sign * c_det_residual(x1, p)
    cdef double f2 = sign * c_det_residual(x2, p)
    cdef int it
    for it in range(60):
        if f1 < f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = sign * c_det_residual(x1, p)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = sign * c_det_residual(x2, p)
    xout[0] = x1 if f1 < f2 else x2
    fout[0] = c_det_residual(xout[0], p)


cdef inline int _sgn(double x) noexcept nogil:
    return (x > 0) - (x < 0)


cdef int c_lambda_roots(double eta, double a, double b, double c2s, double v,
                        int n_grid, double xtol, double* out) noexcept nogil:
    """Fill ``out`` with sorted roots; returns the count (at most MAXROOTS)."""
    cdef EtaArgs p
    p.eta = eta; p.a = a; p.b = b; p.c2s = c2s; p.v = v
    cdef double scale = a + b + sqrt(fabs(c2s))
    cdef double hi = LAMBDA_RANGE * scale / (eta * eta)
    cdef double T = asinh(hi / scale)
    cdef double step = T / (n_grid - 1)
    cdef double* xs = <double*> malloc(n_grid * sizeof(double))
    cdef double* fs = <double*> malloc(n_grid * sizeof(double))
    cdef int i, k, cnt = 0
    cdef double zero_tol = 1e-13 * (v if v > 1.0 else 1.0)
    cdef double g0, g1, g2, sign, xm, fm, tmp
    cdef bint zero_first
    for i in range(n_grid):
        xs[i] = scale * sinh(i * step)
        fs[i] = c_det_residual(xs[i], &p)
    zero_first = isfinite(fs[0]) and fabs(fs[0]) <= zero_tol
    if zero_first:
        out[cnt] = 0.0
        cnt += 1
    for i in range(n_grid - 1):
        if cnt >= MAXROOTS:
            break
        if isfinite(fs[i]) and isfinite(fs[i + 1]) and fs[i] * fs[i + 1] < 0:
            out[cnt] = c_bisect(&p, xs[i], xs[i + 1], fs[i], xtol)
            cnt += 1
    for i in range(1, n_grid - 1):
        if cnt >= MAXROOTS - 1:
            break
        g0 = fs[i - 1]; g1 = fs[i]; g2 = fs[i + 1]
        if not (isfinite(g0) and isfinite(g1) and isfinite(g2)):
            continue
        if g1 == 0 or _sgn(g0) != _sgn(g1) or _sgn(g1) != _sgn(g2):
            continue
        if not (fabs(g1) < fabs(g0) and fabs(g1) <= fabs(g2)):
            continue
        if i == 1 and zero_first:
            continue
        sign = 1.0 if g1 > 0 else -1.0
        c_golden(&p, xs[i - 1], xs[i + 1], sign, &xm, &fm)
        if not isfinite(fm):
            continue
        if fm != 0.0 and (fm > 0) != (g1 > 0):
            out[cnt] = c_bisect(&p, xs[i - 1], xm, g0, xtol)
            out[cnt + 1] = c_bisect(&p, xm, xs[i + 1], fm, xtol)
            cnt += 2
        elif fabs(fm) <= zero_tol:
            out[cnt] = xm
            cnt += 1
    free(xs)
    free(fs)
    # insertion sort
    for i in range(1, cnt):
        tmp = out[i]
        k = i - 1
        while k >= 0 and out[k] > tmp:
            out[k + 1] = out[k]
            k -= 1
        out[k + 1] = tmp
    return cnt


def eta_form(double lam, double eta, double a, double b, double c2s):
    cdef double h = 0.5 * lam
    cdef double n = -h + sqrt(a * a + h * h)
    cdef double he2 = h / (eta * eta)
    cdef double m = -he2 + sqrt(b * b + he2 * he2)
    cdef double he = h / eta
    cdef double rad = c2s + he * he
    cdef double d = -he + sqrt(rad) if rad >= 0 else NAN
    return n, m, d


def det_residual(double lam, double eta, double a, double b, double c2s, double v):
    cdef EtaArgs p
    p.eta = eta; p.a = a; p.b = b; p.c2s = c2s; p.v = v
    return c_det_residual(lam, &p)


def stationarity_residual(double lam, double eta, double a, double b, double c2s):
    return c_stationarity(lam, eta, a, b, c2s)


def candidate_fidelity(double lam, double eta, double a, double b, double c2s):
    return c_candidate(lam, eta, a, b, c2s)


def lambda_roots(double eta, double a, double b, double c2s, double v,
                 int n_grid=N_LAMBDA_GRID, double xtol=1e-14):
    cdef double buf[MAXROOTS]
    cdef int cnt = c_lambda_roots(eta, a, b, c2s, v, n_grid, xtol, buf)
    return np.array([buf[i] for i in range(cnt)], dtype=float)


cdef int c_nearest(double* vals, int cnt, double target) noexcept nogil:
    cdef int k, best = 0
    cdef double dbest = fabs(vals[0] - target)
    for k in range(1, cnt):
        if fabs(vals[k] - target) < dbest:
            dbest = fabs(vals[k] - target)
            best = k
    return best


cdef bint c_refine(double eta0, double eta1, double l0, double l1, double h0,
                   double a, double b, double c2s, double v, int n_grid, double eta_tol,
                   double* lam_out, double* eta_out) noexcept nogil:
    cdef double lo = eta0, hi = eta1, l_lo = l0, l_hi = l1, h_lo = h0
    cdef double mid, lm, hm, eta
    cdef double rs[MAXROOTS]
    cdef int cnt
    while hi - lo > eta_tol:
        mid = 0.5 * (lo + hi)
        cnt = c_lambda_roots(mid, a, b, c2s, v, n_grid, SCAN_XTOL, rs)
        if cnt == 0:
            return False
        lm = rs[c_nearest(rs, cnt, 0.5 * (l_lo + l_hi))]
        hm = c_stationarity(lm, mid, a, b, c2s)
        if hm == 0.0:
            lo = mid
            hi = mid
            l_lo = lm
            l_hi = lm
            break
        if (hm > 0) == (h_lo > 0):
            lo = mid
            l_lo = lm
            h_lo = hm
        else:
            hi = mid
            l_hi = lm
    eta = 0.5 * (lo + hi)
    cnt = c_lambda_roots(eta, a, b, c2s, v, n_grid, FINAL_XTOL, rs)
    if cnt == 0:
        return False
    lam_out[0] = rs[c_nearest(rs, cnt, 0.5 * (l_lo + l_hi))]
    eta_out[0] = eta
    return True


def interior_candidates(double a, double b, double c2s, double v,
                        int n_eta=N_ETA_GRID, int n_grid=N_LAMBDA_GRID, double eta_tol=1e-10):
    cdef double prs[MAXROOTS]
    cdef double phs[MAXROOTS]
    cdef double rs[MAXROOTS]
    cdef double hs[MAXROOTS]
    cdef int pcnt = 0, cnt, k, j, i
    cdef double eta, peta = 0.0, pl, lam_s, eta_s
    cdef double scale = a + b + sqrt(fabs(c2s))
    cdef bint have_prev = False
    out = []
    for k in range(1, n_eta + 2):
        eta = k / (n_eta + 1.0)
        cnt = c_lambda_roots(eta, a, b, c2s, v, n_grid, SCAN_XTOL, rs)
        for j in range(cnt):
            hs[j] = c_stationarity(rs[j], eta, a, b, c2s)
        if have_prev and cnt > 0 and pcnt > 0:
            for j in range(cnt):
                i = c_nearest(prs, pcnt, rs[j])
                pl = prs[i]
                if fabs(rs[j] - pl) > MATCH_RTOL * (fabs(rs[j]) + fabs(pl)) + 1e-9 * scale:
                    continue
                if phs[i] * hs[j] < 0:
                    if c_refine(peta, eta, pl, rs[j], phs[i], a, b, c2s, v, n_grid, eta_tol,
                                &lam_s, &eta_s):
                        if eta_s < 1.0 - 10 * eta_tol:
                            out.append((lam_s, eta_s))
        for j in range(cnt):
            prs[j] = rs[j]
            phs[j] = hs[j]
        pcnt = cnt
        peta = eta
        have_prev = True
    out.sort(key=lambda s: (s[1], s[0]))
    dedup = []
    cdef double last_lam = 0.0, last_eta = 0.0
    for lam_s, eta_s in out:
        if dedup and fabs(eta_s - last_eta) < 1e-8 and fabs(lam_s - last_lam) < 1e-6 * (1.0 + fabs(lam_s)):
            continue
        dedup.append((lam_s, eta_s))
        last_lam = lam_s
        last_eta = eta_s
    return np.array(dedup, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


cdef inline void c_euler(double phi, double s, double psi, double* S) noexcept nogil:
    cdef double c1 = cos(phi), s1 = sin(phi), c2 = cos(psi), s2 = sin(psi)
    cdef double r00 = c1 * s, r01 = s1 / s, r10 = -s1 * s, r11 = c1 / s
    S[0] = r00 * c2 - r01 * s2
    S[1] = r00 * s2 + r01 * c2
    S[2] = r10 * c2 - r11 * s2
    S[3] = r10 * s2 + r11 * c2


cdef inline void c_sandwich(double* S, double M00, double M01, double M10, double M11,
                            double* T, double* out) noexcept nogil:
    cdef double a00 = S[0] * M00 + S[1] * M10
    cdef double a01 = S[0] * M01 + S[1] * M11
    cdef double a10 = S[2] * M00 + S[3] * M10
    cdef double a11 = S[2] * M01 + S[3] * M11
    out[0] = a00 * T[0] + a01 * T[1]
    out[1] = a00 * T[2] + a01 * T[3]
    out[2] = a10 * T[0] + a11 * T[1]
    out[3] = a10 * T[2] + a11 * T[3]


cdef double c_oracle(double* V, double* x) noexcept nogil:
    cdef double Sa[4]
    cdef double Sb[4]
    cdef double A[4]
    cdef double B[4]
    cdef double C[4]
    cdef double cw, ta, tb
    c_euler(x[0], exp(LOG_SQUEEZE_MAX * tanh(x[1])), x[2], Sa)
    cw = cos(x[3])
    ta = TAU_MIN + (1.0 - TAU_MIN) * cw * cw
    c_euler(x[4], exp(LOG_SQUEEZE_MAX * tanh(x[5])), x[6], Sb)
    cw = cos(x[7])
    tb = TAU_MIN + (1.0 - TAU_MIN) * cw * cw
    c_sandwich(Sa, V[0], V[1], V[4], V[5], Sa, A)
    c_sandwich(Sb, V[10], V[11], V[14], V[15], Sb, B)
    c_sandwich(Sa, V[2], V[3], V[6], V[7], Sb, C)
    cdef double ta2 = ta * ta, tb2 = tb * tb, tab = ta * tb
    cdef double n00 = ta2 * A[0] + (1 - ta2) + 2 * tab * C[0] + tb2 * B[0] + (1 - tb2)
    cdef double n11 = ta2 * A[3] + (1 - ta2) - 2 * tab * C[3] + tb2 * B[3] + (1 - tb2)
    cdef double n01 = -ta2 * A[1] + tab * (C[1] - C[2]) + tb2 * B[1]
    cdef double det = (2.0 + n00) * (2.0 + n11) - n01 * n01
    return 2.0 / sqrt(det)


def oracle_fidelity(V, x):
    cdef double Vb[16]
    cdef double xb[8]
    cdef int i
    Va = np.asarray(V, dtype=float).ravel()
    for i in range(16):
        Vb[i] = Va[i]
    for i in range(8):
        xb[i] = x[i]
    return c_oracle(Vb, xb)


cdef int c_nelder_mead(double* V, double* x0, double step, int maxfev, double xtol, double ftol,
                       double* xbest, double* fbest) noexcept nogil:
    cdef int n = 8
    cdef double sim[9][8]
    cdef double fs[9]
    cdef double tmpx[8]
    cdef double xbar[8]
    cdef double xr[8]
    cdef double xe[8]
    cdef double xc[8]
    cdef double rho = 1.0, chi = 1.0 + 2.0 / n, psi = 0.75 - 1.0 / (2.0 * n), sigma = 1.0 - 1.0 / n
    cdef int i, j, k, nfev, kbest
    cdef double fr, fe, fc, tmpf, dmax, dx
    cdef bint shrink
    for j in range(n):
        sim[0][j] = x0[j]
    for i in range(n):
        for j in range(n):
            sim[i + 1][j] = x0[j]
        sim[i + 1][i] += step
    for i in range(n + 1):
        fs[i] = -c_oracle(V, sim[i])
    nfev = n + 1
    while nfev < maxfev:
        # stable insertion sort by f
        for i in range(1, n + 1):
            tmpf = fs[i]
            for j in range(n):
                tmpx[j] = sim[i][j]
            k = i - 1
            while k >= 0 and fs[k] > tmpf:
                fs[k + 1] = fs[k]
                for j in range(n):
                    sim[k + 1][j] = sim[k][j]
                k -= 1
            fs[k + 1] = tmpf
            for j in range(n):
                sim[k + 1][j] = tmpx[j]
        dmax = 0.0
        for i in range(1, n + 1):
            if fabs(fs[i] - fs[0]) > dmax:
                dmax = fabs(fs[i] - fs[0])
        if dmax <= ftol:
            dmax = 0.0
            for i in range(1, n + 1):
                for j in range(n):
                    dx = fabs(sim[i][j] - sim[0][j])
                    if dx > dmax:
                        dmax = dx
            if dmax <= xtol:
                break
        for j in range(n):
            xbar[j] = 0.0
            for i in range(n):
                xbar[j] += sim[i][j]
            xbar[j] /= n
        for j in range(n):
            xr[j] = (1 + rho) * xbar[j] - rho * sim[n][j]
        fr = -c_oracle(V, xr)
        nfev += 1
        shrink = False
        if fr < fs[0]:
            for j in range(n):
                xe[j] = (1 + rho * chi) * xbar[j] - rho * chi * sim[n][j]
            fe = -c_oracle(V, xe)
            nfev += 1
            if fe < fr:
                for j in range(n):
                    sim[n][j] = xe[j]
                fs[n] = fe
            else:
                for j in range(n):
                    sim[n][j] = xr[j]
                fs[n] = fr
        elif fr < fs[n - 1]:
            for j in range(n):
                sim[n][j] = xr[j]
            fs[n] = fr
        elif fr < fs[n]:
            for j in range(n):
                xc[j] = (1 + psi * rho) * xbar[j] - psi * rho * sim[n][j]
            fc = -c_oracle(V, xc)
            nfev += 1
            if fc <= fr:
                for j in range(n):
                    sim[n][j] = xc[j]
                fs[n] = fc
            else:
                shrink = True
        else:
            for j in range(n):
                xc[j] = (1 - psi) * xbar[j] + psi * sim[n][j]
            fc = -c_oracle(V, xc)
            nfev += 1
            if fc < fs[n]:
                for j in range(n):
                    sim[n][j] = xc[j]
                fs[n] = fc
            else:
                shrink = True
        if shrink:
            for i in range(1, n + 1):
                for j in range(n):
                    sim[i][j] = sim[0][j] + sigma * (sim[i][j] - sim[0][j])
                fs[i] = -c_oracle(V, sim[i])
            nfev += n
    kbest = 0
    for i in range(1, n + 1):
        if fs[i] < fs[kbest]:
            kbest = i
    for j in range(n):
        xbest[j] = sim[kbest][j]
    fbest[0] = fs[kbest]
    return nfev


def oracle_search(V, starts, int maxfev=3000, int polish_fev=1500, double xtol=1e-9, double ftol=1e-14):
    cdef double Vb[16]
    cdef double x0[8]
    cdef double x1[8]
    cdef double x2[8]
    cdef double f1, f2
    cdef int i, k, n1, n2, ns
    Va = np.asarray(V, dtype=float).ravel()
    for i in range(16):
        Vb[i] = Va[i]
    S0 = np.ascontiguousarray(starts, dtype=float)
    ns = S0.shape[0]
    fid = np.empty(ns)
    xs = np.empty((ns, 8))
    nfev = np.empty(ns, dtype=np.int64)
    cdef double[:, ::1] S0v = S0
    cdef double[:, ::1] xsv = xs
    for k in range(ns):
        for i in range(8):
            x0[i] = S0v[k, i]
        with nogil:
            n1 = c_nelder_mead(Vb, x0, 0.3, maxfev, xtol, ftol, x1, &f1)
            n2 = c_nelder_mead(Vb, x1, 0.02, polish_fev, xtol, ftol, x2, &f2)
        fid[k] = -f2
        for i in range(8):
            xsv[k, i] = x2[i]
        nfev[k] = n1 + n2
    return fid, xs, nfev
