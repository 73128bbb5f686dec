"""Two-mode Gaussian covariance matrices and their local normal forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, UnphysicalStateError
from .roots import scan_roots
from .symplectic import (
    Z2,
    blocks,
    direct_sum,
    rotation,
    squeeze,
    symplectic_spectrum,
)

PHYSICAL_TOL = 1e-9
#: nu within this of 1 counts as separable (product states land one ulp below 1)
ENTANGLEMENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TwoModeCM:
    """Validated two-mode covariance matrix (vacuum variance 1).

    Build it with :func:`make_cm`; the constructor does no validation.
    """

    V: np.ndarray

    @property
    def A(self) -> np.ndarray:
        return self.V[:2, :2]

    @property
    def B(self) -> np.ndarray:
        return self.V[2:, 2:]

    @property
    def C(self) -> np.ndarray:
        return self.V[:2, 2:]

    def swapped(self) -> "TwoModeCM":
        """The same state with the two modes relabelled."""
        P = np.zeros((4, 4))
        P[:2, 2:] = np.eye(2)
        P[2:, :2] = np.eye(2)
        return TwoModeCM(P @ self.V @ P)

    def transformed(self, S) -> "TwoModeCM":
        return TwoModeCM(_sym(S @ self.V @ S.T))

    def entries(self) -> list:
        return [float(x) for x in self.V.ravel()]


@dataclass(frozen=True)
class ChannelInvariants:
    a: float
    b: float
    c: float
    sign_detC: int
    v: float

    @property
    def c2_signed(self) -> float:
        """``-det C``; equals ``c**2`` for entangled states."""
        return -self.sign_detC * self.c * self.c


@dataclass(frozen=True)
class PtSpectrum:
    nu: float
    mu: float
    sigma_pt: float


@dataclass(frozen=True, eq=False)
class StandardFormIII:
    """``V1`` with blocks ``diag(n+lam, n)``, ``diag(m+lam, m)``, ``diag(-d-lam, d)``."""

    n: float
    m: float
    d: float
    lam: float
    S_a: np.ndarray
    S_b: np.ndarray
    V1: TwoModeCM
    roots: tuple = ()
    flagged: bool = False


@dataclass(frozen=True, eq=False)
class NormalFormEta:
    """Member of the ``V_eta`` family reached by local symplectics.

    Coefficients follow ``n1 - n2 = eta (d1 - d2) = eta**2 (m1 - m2) = lam``.
    """

    eta: float
    n: float
    m: float
    d: float
    lam: float
    S_a: np.ndarray
    S_b: np.ndarray
    Veta: TwoModeCM
    roots: tuple = ()
    flagged: bool = False


@dataclass(frozen=True, eq=False)
class StandardFormI:
    V_N: TwoModeCM
    S_a: np.ndarray
    S_b: np.ndarray
    aI: float
    bI: float
    c1: float
    c2: float
    source: TwoModeCM | None = None


def _sym(M):
    return 0.5 * (M + M.T)


def williamson_eigenvalues(V) -> tuple:
    """Ordinary (not partially transposed) symplectic eigenvalues of ``V``."""
    return symplectic_spectrum(V)


def make_cm(entries, tol: float = 1e-9) -> TwoModeCM:
    """Validate 16 row-major entries (or a 4x4 array) as a physical state.

    Raises:
        InvalidInputError: wrong size, non-finite, or asymmetric beyond ``tol``.
        UnphysicalStateError: not positive definite or a Williamson eigenvalue
            is below ``1 - PHYSICAL_TOL``.
    """
    V = np.asarray(entries, dtype=float)
    if V.size != 16:
        raise InvalidInputError(f"expected 16 entries, got {V.size}")
    V = V.reshape(4, 4)
    if not np.all(np.isfinite(V)):
        raise InvalidInputError("covariance matrix has non-finite entries")
    asym = float(np.max(np.abs(V - V.T)))
    if asym >= tol:
        raise InvalidInputError(f"covariance matrix is not symmetric (max asymmetry {asym:.3e})")
    V = _sym(V)
    w = np.linalg.eigvalsh(V)
    if w[0] <= 0:
        raise UnphysicalStateError(
            f"covariance matrix is not positive definite (eigenvalue {w[0]:.6g})",
            eigenvalue=float(w[0]),
        )
    nu_minus, _ = symplectic_spectrum(V)
    if nu_minus < 1.0 - PHYSICAL_TOL:
        raise UnphysicalStateError(
            f"uncertainty principle violated: Williamson eigenvalue {nu_minus:.12g} < 1",
            eigenvalue=nu_minus,
        )
    return TwoModeCM(V)


def is_physical(V, tol: float = PHYSICAL_TOL) -> bool:
    V = np.asarray(V.V if isinstance(V, TwoModeCM) else V, dtype=float)
    if np.linalg.eigvalsh(_sym(V))[0] <= 0:
        return False
    return symplectic_spectrum(V)[0] >= 1.0 - tol


def from_blocks(A, B, C) -> TwoModeCM:
    A, B, C = (np.asarray(M, dtype=float) for M in (A, B, C))
    return make_cm(np.block([[A, C], [C.T, B]]))


def two_mode_squeezed(r: float) -> TwoModeCM:
    if r < 0:
        raise InvalidInputError("squeezing parameter must be non-negative")
    ch, sh = math.cosh(r), math.sinh(r)
    return TwoModeCM(np.block([[ch * np.eye(2), -sh * Z2], [-sh * Z2, ch * np.eye(2)]]))


def thermal_product(na: float, nb: float | None = None) -> TwoModeCM:
    nb = na if nb is None else nb
    return make_cm(np.diag([na, na, nb, nb]))


def invariants(V: TwoModeCM) -> ChannelInvariants:
    A, B, C = blocks(V.V)
    detC = float(np.linalg.det(C))
    sign = 0 if detC == 0 else (1 if detC > 0 else -1)
    return ChannelInvariants(
        a=math.sqrt(max(np.linalg.det(A), 0.0)),
        b=math.sqrt(max(np.linalg.det(B), 0.0)),
        c=math.sqrt(abs(detC)),
        sign_detC=sign,
        v=float(np.linalg.det(V.V)),
    )


def pt_spectrum(V: TwoModeCM) -> PtSpectrum:
    """Partially transposed symplectic eigenvalues from local invariants."""
    A, B, C = blocks(V.V)
    sig = float(np.linalg.det(A) + np.linalg.det(B) - 2.0 * np.linalg.det(C))
    detv = float(np.linalg.det(V.V))
    rad = sig * sig - 4.0 * detv
    if rad < 0:
        if rad < -1e-12 * max(1.0, sig * sig):
            raise NumericalFailureError(f"negative radicand {rad:.3e} in PT spectrum")
        rad = 0.0
    root = math.sqrt(rad)
    # (sig - root) loses digits for strongly entangled states; use nu*mu = sqrt(det V)
    mu = math.sqrt((sig + root) / 2.0)
    nu = math.sqrt(max(detv, 0.0)) / mu
    return PtSpectrum(nu=nu, mu=mu, sigma_pt=sig)


def is_entangled(V: TwoModeCM, tol: float = ENTANGLEMENT_TOL) -> bool:
    return pt_spectrum(V).nu < 1.0 - tol


def log_negativity(V: TwoModeCM) -> float:
    return max(0.0, -math.log(pt_spectrum(V).nu))


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------


def _isotropize_block(M, tol=1e-13):
    """Symplectic ``S`` with ``S M S^T = sqrt(det M) I`` for symmetric ``M > 0``."""
    scale = math.sqrt(np.linalg.det(M))
    if abs(M[0, 1]) <= tol * scale:
        if abs(M[0, 0] - M[1, 1]) <= tol * scale:
            return np.eye(2)
        return np.diag([(scale / M[0, 0]) ** 0.5, (scale / M[1, 1]) ** 0.5])
    w, R = np.linalg.eigh(M)
    if np.linalg.det(R) < 0:
        R = R @ Z2
    return np.diag(np.sqrt(scale / w)) @ R.T


def _diagonal_gauge(x, y):
    """Local symplectic pair taking ``C = diag(x, y)`` to ``diag(-c1, c2)``, ``c1 >= |c2|``."""
    Sa, Sb = np.eye(2), np.eye(2)
    if abs(y) > abs(x):
        # quarter turn on both modes swaps the x and p correlations
        Sa, Sb = rotation(math.pi / 2), rotation(math.pi / 2)
        x, y = y, x
    if x > 0:
        Sa = -Sa
        x, y = -x, -y
    return Sa, Sb, -x, y


def to_standard_form_I(V: TwoModeCM) -> StandardFormI:
    """Local symplectics bringing ``V`` to ``[[a I, diag(-c1, c2)], [., b I]]``.

    ``c1 >= |c2|``; ``c2 < 0`` only when ``det C > 0`` (a separable state).
    """
    A, B, _ = blocks(V.V)
    Sa = _isotropize_block(A)
    Sb = _isotropize_block(B)
    C = Sa @ V.C @ Sb.T
    scale = max(1.0, float(np.max(np.abs(C))))
    if abs(C[0, 1]) > 1e-14 * scale or abs(C[1, 0]) > 1e-14 * scale:
        U, sv, Wt = np.linalg.svd(C)
        if np.linalg.det(U) < 0:
            U = U @ Z2
            sv = sv * np.array([1.0, -1.0])
        if np.linalg.det(Wt) < 0:
            Wt = Z2 @ Wt
            sv = sv * np.array([1.0, -1.0])
        Sa = U.T @ Sa
        Sb = Wt @ Sb
        x, y = sv
    else:
        x, y = C[0, 0], C[1, 1]
    Ga, Gb, c1, c2 = _diagonal_gauge(x, y)
    Sa, Sb = Ga @ Sa, Gb @ Sb
    VN = V.transformed(direct_sum(Sa, Sb))
    aI = math.sqrt(np.linalg.det(VN.A))
    bI = math.sqrt(np.linalg.det(VN.B))
    return StandardFormI(VN, Sa, Sb, aI, bI, float(c1), float(c2), V)


def _squeeze_ratio(lam, a):
    """Positive root ``r`` of ``a (r - 1/r) = lam``."""
    t = lam / (2.0 * a)
    if t >= 0:
        return t + math.sqrt(1.0 + t * t)
    return 1.0 / (-t + math.sqrt(1.0 + t * t))


def squeeze_match_residual(lam, eta, a, b, c1, c2):
    """``c1 sqrt(ra rb) - c2 / sqrt(ra rb) - lam / eta`` for the ``V_eta`` reduction."""
    ra = _squeeze_ratio(lam, a)
    rb = _squeeze_ratio(lam / (eta * eta), b)
    q = math.sqrt(ra * rb)
    return c1 * q - c2 / q - lam / eta


def squeeze_match_roots(eta, a, b, c1, c2, n_grid=600, xtol=1e-14):
    """All roots ``lam >= 0`` of :func:`squeeze_match_residual` found by bracketing."""
    f = lambda lam: squeeze_match_residual(lam, eta, a, b, c1, c2)  # noqa: E731
    scale = a + b + abs(c1) + abs(c2)
    lam_max = 1e4 * scale / (eta * eta)
    return scan_roots(f, scale, lam_max, n_grid, xtol)


def _reduce(form1: StandardFormI, eta, tol, target_lambda=None):
    a, b, c1, c2 = form1.aI, form1.bI, form1.c1, form1.c2
    options = []
    for swapped in (False, True):
        x1, x2 = (c2, c1) if swapped else (c1, c2)
        if abs(c1 - c2) <= 1e-15 * max(1.0, abs(c1)) and not swapped:
            options.append((0.0, swapped))
        for lam in squeeze_match_roots(eta, a, b, x1, x2):
            options.append((float(lam), swapped))
    if not options:
        raise NumericalFailureError(f"no root of the normal-form equation at eta={eta}")
    if target_lambda is None:
        # root on the side of c1 - c2 closest to the origin
        canon = [o for o in options if not o[1]] or options
        lam, swapped = min(canon, key=lambda o: o[0])
    else:
        lam, swapped = min(options, key=lambda o: abs(o[0] - target_lambda))
    roots = tuple(sorted({o[0] for o in options}))

    Sa, Sb = form1.S_a, form1.S_b
    if swapped:
        # exchange c1 and c2: quarter turns, then a half turn on Bob
        Sa = rotation(math.pi / 2) @ Sa
        Sb = -rotation(math.pi / 2) @ Sb
    ra = _squeeze_ratio(lam, a)
    rb = _squeeze_ratio(lam / (eta * eta), b)
    Sa = squeeze(math.sqrt(ra)) @ Sa
    Sb = squeeze(math.sqrt(rb)) @ Sb
    V = form1.source.transformed(direct_sum(Sa, Sb))
    n = a / ra
    m = b / rb
    x1, x2 = (c2, c1) if swapped else (c1, c2)
    q = math.sqrt(ra * rb)
    d = x2 / q
    resid = max(
        abs((V.V[0, 0] - V.V[1, 1]) - lam),
        abs(eta * eta * (V.V[2, 2] - V.V[3, 3]) - lam),
        abs(eta * (-V.V[0, 2] - V.V[1, 3]) - lam),
    )
    if resid > tol * max(1.0, abs(lam), a, b):
        raise NumericalFailureError(f"normal-form constraint residual {resid:.3e}")
    flagged = not (n > 0 and m > 0 and d > 0)
    return lam, n, m, d, Sa, Sb, V, roots, flagged


def to_standard_form_III(V: TwoModeCM, tol: float = 1e-9, target_lambda=None) -> StandardFormIII:
    """Local symplectic reduction with ``n1-n2 = m1-m2 = d1-d2 = lam``.

    With several roots, the one nearest the origin on the side of
    ``c1 - c2`` is used unless ``target_lambda`` selects another;
    every root found is listed in ``roots``.
    """
    f1 = to_standard_form_I(V)
    lam, n, m, d, Sa, Sb, V1, roots, flagged = _reduce(f1, 1.0, tol, target_lambda)
    return StandardFormIII(n, m, d, lam, Sa, Sb, V1, roots, flagged)


def to_normal_form_eta(V: TwoModeCM, eta: float, tol: float = 1e-9, target_lambda=None) -> NormalFormEta:
    if not 0 < eta <= 1:
        raise InvalidInputError(f"eta must lie in (0, 1], got {eta}")
    f1 = to_standard_form_I(V)
    lam, n, m, d, Sa, Sb, Veta, roots, flagged = _reduce(f1, eta, tol, target_lambda)
    return NormalFormEta(eta, n, m, d, lam, Sa, Sb, Veta, roots, flagged)


def form_III_residual(V: TwoModeCM) -> float:
    """Largest violation of the standard-form-III pattern and constraints."""
    M = V.V
    off = max(abs(M[0, 1]), abs(M[2, 3]), abs(M[0, 3]), abs(M[1, 2]))
    n1, n2, m1, m2 = M[0, 0], M[1, 1], M[2, 2], M[3, 3]
    d1, d2 = -M[0, 2], M[1, 3]
    lam = n1 - n2
    return float(max(off, abs(m1 - m2 - lam), abs(d1 - d2 - lam)))


# ---------------------------------------------------------------------------
# random states
# ---------------------------------------------------------------------------


def _random_local(rng, max_squeeze):
    phi, psi = rng.uniform(0.0, 2.0 * math.pi, size=2)
    s = math.exp(rng.uniform(-max_squeeze, max_squeeze) / 2.0)
    return rotation(phi) @ squeeze(s) @ rotation(psi)


def _tms(r):
    ch, sh = math.cosh(r), math.sinh(r)
    return np.block([[ch * np.eye(2), sh * Z2], [sh * Z2, ch * np.eye(2)]])


def random_physical_cm(seed: int, purity_mix: float = 0.5, max_squeeze: float = 1.5) -> TwoModeCM:
    """Seeded random state ``S diag(nu1, nu1, nu2, nu2) S^T``.

    ``S`` is local Euler symplectics around a two-mode squeezer of strength
    up to ``max_squeeze``; ``purity_mix`` scales the thermal excess
    ``nu_i - 1`` (0 gives pure states).
    """
    if max_squeeze <= 0:
        raise InvalidInputError("max_squeeze must be positive")
    if not 0 <= purity_mix <= 1:
        raise InvalidInputError("purity_mix must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    nu1, nu2 = 1.0 + purity_mix * rng.exponential(1.0, size=2)
    r = rng.uniform(0.0, max_squeeze)
    S = (
        direct_sum(_random_local(rng, max_squeeze), _random_local(rng, max_squeeze))
        @ _tms(r)
        @ direct_sum(_random_local(rng, max_squeeze), _random_local(rng, max_squeeze))
    )
    return TwoModeCM(_sym(S @ np.diag([nu1, nu1, nu2, nu2]) @ S.T))


def random_entangled_cm(seed: int, purity_mix: float = 1.0, max_squeeze: float = 2.0, nu_max: float = 0.99) -> TwoModeCM:
    """First entangled state (``nu <= nu_max``) in the seed's substream."""
    for attempt in range(10_000):
        V = random_physical_cm(_subseed(seed, attempt), purity_mix, max_squeeze)
        if pt_spectrum(V).nu <= nu_max:
            return V
    raise NumericalFailureError(f"no entangled state drawn for seed {seed}")


def random_asymmetric_cm(seed: int, min_asymmetry: float = 0.1, nu_max: float = 0.99) -> TwoModeCM:
    """First entangled state in the seed's substream with ``|a - b| >= min_asymmetry * max(a, b)``.

    ``a = sqrt(det A)`` and ``b = sqrt(det B)`` are local invariants, so the
    state stays non-symmetric under every local symplectic reduction.
    """
    if not 0 < min_asymmetry < 1:
        raise InvalidInputError("min_asymmetry must lie in (0, 1)")
    for attempt in range(10_000):
        V = random_physical_cm(np.random.SeedSequence([int(seed), 1, attempt]), 1.0, 2.0)
        inv = invariants(V)
        if pt_spectrum(V).nu <= nu_max and abs(inv.a - inv.b) >= min_asymmetry * max(inv.a, inv.b):
            return V
    raise NumericalFailureError(f"no asymmetric state drawn for seed {seed}")


def random_symmetric_cm(seed: int, nu_range=(0.05, 0.95), max_squeeze: float = 1.5) -> TwoModeCM:
    """Seeded entangled state locally equivalent to a form-III state with ``n = m``.

    The PT eigenvalue ``nu = n - d`` is drawn from ``nu_range``.
    """
    rng = np.random.default_rng(seed)
    nu = rng.uniform(*nu_range)
    # symplectic eigenvalues sqrt(nu * (n+d)) and sqrt(nu * (n+d+2 lam)) must be >= 1
    s_plus = (1.0 + rng.exponential(0.5)) / nu
    s_lam = (1.0 + rng.exponential(0.5)) / nu
    n = (s_plus + nu) / 2.0
    d = (s_plus - nu) / 2.0
    lam = (s_lam - s_plus) / 2.0
    V1 = np.diag([n + lam, n, n + lam, n])
    V1[0, 2] = V1[2, 0] = -(d + lam)
    V1[1, 3] = V1[3, 1] = d
    L = direct_sum(_random_local(rng, max_squeeze), _random_local(rng, max_squeeze))
    return TwoModeCM(_sym(L @ V1 @ L.T))


def random_local_symplectic(seed: int, max_squeeze: float = 1.5) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return direct_sum(_random_local(rng, max_squeeze), _random_local(rng, max_squeeze))


def _subseed(seed, k):
    return np.random.SeedSequence([int(seed), int(k)])


def cm_is_symmetric_shape(V) -> bool:
    """Blocks are symmetric-looking: det A == det B (local-symplectic symmetric)."""
    A, B, _ = blocks(np.asarray(V))
    return bool(abs(np.linalg.det(A) - np.linalg.det(B)) < 1e-9)


__all__ = [
    "ChannelInvariants",
    "NormalFormEta",
    "PtSpectrum",
    "StandardFormI",
    "StandardFormIII",
    "TwoModeCM",
    "from_blocks",
    "invariants",
    "is_entangled",
    "is_physical",
    "squeeze_match_residual",
    "squeeze_match_roots",
    "log_negativity",
    "make_cm",
    "pt_spectrum",
    "random_asymmetric_cm",
    "random_entangled_cm",
    "random_local_symplectic",
    "random_physical_cm",
    "random_symmetric_cm",
    "thermal_product",
    "to_normal_form_eta",
    "to_standard_form_I",
    "to_standard_form_III",
    "two_mode_squeezed",
    "williamson_eigenvalues",
]
