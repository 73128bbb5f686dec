"""Optimal local Gaussian preprocessing of a shared teleportation resource.

The optimum over local trace-preserving Gaussian maps is found by reducing
the state to the ``V_eta`` normal form, attenuating one mode by ``eta`` and
maximizing over the finite set of stationary points. Both modes are tried
as the attenuated side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidInputError, NumericalFailureError, OutOfDomainError
from .state import (
    ENTANGLEMENT_TOL,
    TwoModeCM,
    form_III_residual,
    invariants,
    pt_spectrum,
    to_normal_form_eta,
    to_standard_form_III,
)
from .symplectic import LAMBDA, Z2, williamson_two_mode
from .teleport import (
    TgcpMap,
    apply_local_tgcp,
    attenuation_map,
    decompose_minimal_noise,
    fidelity_coherent,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FidelityBounds:
    nu: float
    lower: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def fidelity_bounds(nu: float) -> FidelityBounds:
    """``((1+nu)/(1+3nu), 1/(1+nu))``: the range of the optimized fidelity."""
    if not nu > 0 or not math.isfinite(nu):
        raise InvalidInputError(f"nu must be positive, got {nu}")
    return FidelityBounds(nu, (1.0 + nu) / (1.0 + 3.0 * nu), 1.0 / (1.0 + nu))


def bound_gap(nu: float) -> float:
    b = fidelity_bounds(nu)
    return b.upper - b.lower


@dataclass(frozen=True)
class GapMaximum:
    nu_star: float
    gap: float
    iterations: int


def max_bound_gap(tol: float = 1e-12, max_iter: int = 200) -> GapMaximum:
    """Golden-section maximization of the bound gap over ``nu`` in ``(0, 1]``."""
    lo, hi = 0.0, 1.0
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = bound_gap(x1), bound_gap(x2)
    it = 0
    while hi - lo > tol and it < max_iter:
        it += 1
        if f1 > f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = bound_gap(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = bound_gap(x2)
    nu = 0.5 * (lo + hi)
    return GapMaximum(nu, bound_gap(nu), it)


# ---------------------------------------------------------------------------
# constructive lower-bound map
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OmegaThetaResult:
    """Map built from the partially transposed Williamson frame.

    Attributes:
        theta: angle with ``sin^2 = det W_a`` and ``cos^2 = det W_b``.
        epsilon: ``det W_b - det W_a``.
        map: the local channel; symplectic on one mode, attenuating the other.
        fidelity: ``(1+|eps|)/(1+nu+2|eps|)``.
        W_a, W_b: first block row of the Williamson symplectic.
    """

    theta: float
    epsilon: float
    map: TgcpMap
    fidelity: float
    W_a: np.ndarray
    W_b: np.ndarray
    nu: float


def omega_theta(V: TwoModeCM) -> OmegaThetaResult:
    """Local map whose output noise is isotropic with ``n = (nu+|eps|)/(1+|eps|)``.

    Raises:
        OutOfDomainError: the state is separable (``nu >= 1``).
        NumericalFailureError: ``|eps| > nu`` beyond rounding.
    """
    nu = pt_spectrum(V).nu
    if nu >= 1.0 - ENTANGLEMENT_TOL:
        raise OutOfDomainError(f"state is not entangled (nu = {nu})")
    S, nu_w, _ = williamson_two_mode(LAMBDA @ V.V @ LAMBDA)
    W_a, W_b = S[:2, :2], S[:2, 2:]
    da, db = float(np.linalg.det(W_a)), float(np.linalg.det(W_b))
    eps = db - da
    if abs(eps) > nu + 1e-9:
        raise NumericalFailureError(f"|epsilon| = {abs(eps)} exceeds nu = {nu}")
    theta = math.atan(math.sqrt((1.0 - eps) / (1.0 + eps)))
    zero = np.zeros((2, 2))
    if eps >= 0:
        c = math.cos(theta)
        S_a = Z2 @ W_a @ Z2 / c
        S_b = W_b / c
        tgcp = TgcpMap(S_a, S_b, max(0.0, 1.0 - math.tan(theta) ** 2) * np.eye(2), zero)
    else:
        s = math.sin(theta)
        S_a = Z2 @ W_a @ Z2 / s
        S_b = W_b / s
        tgcp = TgcpMap(S_a, S_b, zero, max(0.0, 1.0 - 1.0 / math.tan(theta) ** 2) * np.eye(2))
    e = abs(eps)
    fid = (1.0 + e) / (1.0 + nu + 2.0 * e)
    return OmegaThetaResult(theta, eps, tgcp, fid, W_a, W_b, nu)


# ---------------------------------------------------------------------------
# optimal map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of :func:`optimal_tgcp`.

    Attributes:
        n_eta: interior grid points in ``eta``.
        n_lambda: grid points of each ``lam`` root scan.
        eta_tol: bisection tolerance in ``eta``.
        tie_tol: candidates within this of the best are tied; the largest
            ``eta`` wins.
        symmetric_tol: ``|a - b|`` below this skips the interior scan.
        check_tol: tolerance of the final self-consistency checks.
    """

    n_eta: int = kernels.N_ETA_GRID
    n_lambda: int = kernels.N_LAMBDA_GRID
    eta_tol: float = 1e-10
    tie_tol: float = 1e-12
    symmetric_tol: float = 1e-12
    check_tol: float = 1e-7


@dataclass(frozen=True)
class Candidate:
    lam: float
    eta: float
    fidelity: float
    side: str  # attenuated mode: "a", "b" or "none" at eta = 1


@dataclass(frozen=True, eq=False)
class OptimizationReport:
    bounds: FidelityBounds
    nu: float
    f_unoptimized: float
    f_opt: float
    optimal_map: TgcpMap
    decomposition: dict
    attenuation_side: str
    tau_star: float
    lam_star: float
    candidates: list
    output: TwoModeCM
    entangled: bool
    oracle_f: float | None = None
    notes: list = field(default_factory=list)


def _scale_symplectic_sign(S_a, S_b):
    # (-S_a) + (-S_b) acts identically on every covariance matrix
    if np.trace(S_a) + np.trace(S_b) < 0:
        return -S_a, -S_b
    return S_a, S_b


def _collect_candidates(inv, opts: SolverOptions, symmetric: bool):
    c2s, v = inv.c2_signed, inv.v
    cands = []
    for lam in kernels.lambda_roots(1.0, inv.a, inv.b, c2s, v, opts.n_lambda):
        F = kernels.candidate_fidelity(lam, 1.0, inv.a, inv.b, c2s)
        if math.isfinite(F):
            cands.append(Candidate(float(lam), 1.0, F, "none"))
    if not symmetric:
        for side, (a, b) in (("b", (inv.a, inv.b)), ("a", (inv.b, inv.a))):
            sol = kernels.interior_candidates(a, b, c2s, v, opts.n_eta, opts.n_lambda, opts.eta_tol)
            for lam, eta in sol:
                F = kernels.candidate_fidelity(lam, eta, a, b, c2s)
                if math.isfinite(F) and eta > 0:
                    cands.append(Candidate(float(lam), float(eta), F, side))
    return cands


def _pick(cands, tie_tol):
    best = max(c.fidelity for c in cands)
    tied = [c for c in cands if c.fidelity >= best - tie_tol]
    # deterministic: larger eta, then boundary/b/a, then smaller lam
    order = {"none": 0, "b": 1, "a": 2}
    return min(tied, key=lambda c: (-c.eta, order[c.side], c.lam))


def _build_map(V: TwoModeCM, cand: Candidate, opts: SolverOptions):
    if cand.side == "a":
        nf = to_normal_form_eta(V.swapped(), cand.eta, target_lambda=cand.lam)
        S_a, S_b = nf.S_b, nf.S_a
    else:
        nf = to_normal_form_eta(V, cand.eta, target_lambda=cand.lam)
        S_a, S_b = nf.S_a, nf.S_b
    S_a, S_b = _scale_symplectic_sign(S_a, S_b)
    tgcp = TgcpMap.symplectic(S_a, S_b)
    if cand.eta < 1.0:
        tgcp = tgcp.then(attenuation_map(cand.eta, cand.side))
    return tgcp, nf


def optimal_tgcp(V: TwoModeCM, opts: SolverOptions | None = None) -> OptimizationReport:
    """Best coherent-state teleportation fidelity over local Gaussian channels.

    Raises:
        NumericalFailureError: no boundary solution, or the rebuilt map does
            not reproduce the winning candidate.
    """
    opts = opts or SolverOptions()
    inv = invariants(V)
    nu = pt_spectrum(V).nu
    entangled = nu < 1.0 - ENTANGLEMENT_TOL
    f0 = fidelity_coherent(V)
    symmetric = abs(inv.a - inv.b) <= opts.symmetric_tol * max(1.0, inv.a, inv.b)

    cands = _collect_candidates(inv, opts, symmetric)
    if not any(c.eta == 1.0 for c in cands) and entangled:
        raise NumericalFailureError("no solution of the boundary equation at eta = 1")
    if not cands:
        raise NumericalFailureError("no stationary candidate found")
    best = _pick(cands, opts.tie_tol)
    if best.eta > 1.0 - 1e-9:
        best = Candidate(best.lam, 1.0, best.fidelity, "none")

    tgcp, nf = _build_map(V, best, opts)
    out = apply_local_tgcp(V, tgcp)
    f_opt = fidelity_coherent(out)
    if abs(f_opt - best.fidelity) > opts.check_tol:
        raise NumericalFailureError(
            f"rebuilt map reaches {f_opt!r}, candidate predicted {best.fidelity!r}"
        )

    notes = []
    if best.eta < 1.0:
        tau_stat = nf.d / (nf.m - 1.0)
        if abs(tau_stat - best.eta) > 1e-6:
            raise NumericalFailureError(f"stationarity violated: d/(m-1) = {tau_stat}, eta = {best.eta}")
    else:
        res = form_III_residual(out)
        if res > opts.check_tol * max(1.0, float(np.max(np.abs(out.V)))):
            raise NumericalFailureError(f"output violates the standard-form constraints ({res:.3e})")
    if not entangled:
        notes.append("separable input: fidelity bounds are not guaranteed")
    if nf.flagged:
        notes.append("normal form has a non-positive coefficient")

    decomposition = {
        "a": decompose_minimal_noise(tgcp.S_a, tgcp.G_a),
        "b": decompose_minimal_noise(tgcp.S_b, tgcp.G_b),
    }
    return OptimizationReport(
        bounds=fidelity_bounds(nu),
        nu=nu,
        f_unoptimized=f0,
        f_opt=f_opt,
        optimal_map=tgcp,
        decomposition=decomposition,
        attenuation_side=best.side,
        tau_star=best.eta,
        lam_star=best.lam,
        candidates=cands,
        output=out,
        entangled=entangled,
        notes=notes,
    )


def upper_bound_achievable(V: TwoModeCM, tol: float = 1e-9) -> bool:
    """True iff the state is locally equivalent to one with ``n = m`` in standard form III."""
    f3 = to_standard_form_III(V)
    return abs(f3.n - f3.m) <= tol * max(1.0, f3.n, f3.m)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OracleResult:
    fidelity: float
    params: np.ndarray
    per_start: np.ndarray
    nfev: int
    starts: int
    seed: int

    def map(self) -> TgcpMap:
        return oracle_map(self.params)


def oracle_map(x) -> TgcpMap:
    """Local channel encoded by an oracle search vector."""
    from .symplectic import rotation, squeeze

    mats = []
    for phi, s, psi, tau in kernels._pykernels.decode_params(x):
        S = rotation(phi) @ squeeze(s) @ rotation(psi)
        mats.append((tau * S, (1.0 - tau * tau) * np.eye(2)))
    (Sa, Ga), (Sb, Gb) = mats
    return TgcpMap(Sa, Sb, Ga, Gb)


def oracle_starts(seed: int, starts: int) -> np.ndarray:
    """Seeded start vectors; the first one encodes the identity channel."""
    rng = np.random.default_rng(seed)
    X = np.empty((starts, 8))
    for k in (0, 4):
        X[:, k] = rng.uniform(0.0, 2.0 * math.pi, starts)
        X[:, k + 1] = rng.uniform(-1.0, 1.0, starts)
        X[:, k + 2] = rng.uniform(0.0, 2.0 * math.pi, starts)
        X[:, k + 3] = rng.uniform(0.0, 0.5 * math.pi, starts)
    X[0] = 0.0
    return X


def brute_force_optimal(V: TwoModeCM, starts: int = 32, seed: int = 0) -> OracleResult:
    """Multistart Nelder-Mead over symplectic-then-attenuation maps on each mode.

    Independent of the normal-form machinery: it only evaluates the fidelity
    of the transformed state.
    """
    if starts < 1:
        raise InvalidInputError("starts must be positive")
    X0 = oracle_starts(seed, starts)
    fid, xs, nfev = kernels.oracle_search(V.V, X0)
    k = int(np.argmax(fid))  # first maximal start wins ties
    return OracleResult(float(fid[k]), xs[k], fid, int(nfev.sum()), starts, seed)
