"""Coherent-state teleportation fidelity and local Gaussian channels.

A local trace-preserving Gaussian map acts on covariance matrices as
``V -> (S_a + S_b) V (S_a + S_b)^T + (G_a + G_b)`` (direct sums).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, OutOfDomainError
from .state import TwoModeCM, make_cm
from .symplectic import Z2, _as_finite, direct_sum, is_symplectic

CP_TOL = 1e-9
FIDELITY_SLACK = 1e-9


def _matrix(V) -> np.ndarray:
    if isinstance(V, TwoModeCM):
        return V.V
    return _as_finite(V, (4, 4), "V")


def noise_matrix(V) -> np.ndarray:
    """Excess noise ``N = Z A Z + Z C + C^T Z + B`` added to the teleported state."""
    M = _matrix(V)
    A, B, C = M[:2, :2], M[2:, 2:], M[:2, 2:]
    N = Z2 @ A @ Z2 + Z2 @ C + C.T @ Z2 + B
    return 0.5 * (N + N.T)


def _clamp_fidelity(F: float) -> float:
    if not math.isfinite(F) or F > 1.0 + FIDELITY_SLACK:
        raise NumericalFailureError(f"fidelity {F!r} outside [0, 1]")
    return min(max(F, 0.0), 1.0)


def fidelity_gaussian_input(V, V_in) -> float:
    """Fidelity ``2 / sqrt(det(2 V_in + N))`` for a Gaussian input of covariance ``V_in``.

    Raises:
        InvalidInputError: ``V_in`` is not a symmetric physical one-mode CM.
    """
    V_in = _as_finite(V_in, (2, 2), "V_in")
    if abs(V_in[0, 1] - V_in[1, 0]) > 1e-12 * max(1.0, np.max(np.abs(V_in))):
        raise InvalidInputError("V_in must be symmetric")
    if V_in[0, 0] <= 0 or np.linalg.det(V_in) < 1.0 - CP_TOL:
        raise InvalidInputError("V_in violates the uncertainty principle")
    M = 2.0 * V_in + noise_matrix(V)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if det <= 0:
        raise NumericalFailureError(f"non-positive determinant {det!r} in fidelity")
    return _clamp_fidelity(2.0 / math.sqrt(det))


def fidelity_coherent(V) -> float:
    """Fidelity ``2 / sqrt(4 + 2 Tr N + det N)`` for coherent-state inputs."""
    N = noise_matrix(V)
    det = (2.0 + N[0, 0]) * (2.0 + N[1, 1]) - N[0, 1] * N[1, 0]
    if det <= 0:
        raise NumericalFailureError(f"non-positive determinant {det!r} in fidelity")
    return _clamp_fidelity(2.0 / math.sqrt(det))


def fidelity_from_isotropic_noise(n: float) -> float:
    """``1/(1+n)`` for noise ``N = 2 n I``."""
    return 1.0 / (1.0 + n)


# ---------------------------------------------------------------------------
# local maps
# ---------------------------------------------------------------------------


def mode_is_cp(S, G, tol: float = CP_TOL) -> bool:
    """Complete positivity of one mode: ``G >= 0`` and ``det G >= (1 - det S)^2``."""
    S = np.asarray(S, dtype=float)
    G = np.asarray(G, dtype=float)
    if abs(G[0, 1] - G[1, 0]) > tol:
        return False
    if np.linalg.eigvalsh(0.5 * (G + G.T))[0] < -tol:
        return False
    return bool(np.linalg.det(G) - (1.0 - np.linalg.det(S)) ** 2 >= -tol)


@dataclass(frozen=True, eq=False)
class TgcpMap:
    """Product of one-mode Gaussian channels ``(S_a, G_a)`` and ``(S_b, G_b)``."""

    S_a: np.ndarray
    S_b: np.ndarray
    G_a: np.ndarray
    G_b: np.ndarray

    @classmethod
    def identity(cls) -> "TgcpMap":
        return cls(np.eye(2), np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))

    @classmethod
    def symplectic(cls, S_a, S_b) -> "TgcpMap":
        return cls(np.asarray(S_a, float), np.asarray(S_b, float), np.zeros((2, 2)), np.zeros((2, 2)))

    def is_cp(self, tol: float = CP_TOL) -> bool:
        return mode_is_cp(self.S_a, self.G_a, tol) and mode_is_cp(self.S_b, self.G_b, tol)

    @property
    def S(self) -> np.ndarray:
        return direct_sum(self.S_a, self.S_b)

    @property
    def G(self) -> np.ndarray:
        return direct_sum(self.G_a, self.G_b)

    def then(self, other: "TgcpMap") -> "TgcpMap":
        """Composite map: ``self`` first, then ``other``."""
        return TgcpMap(
            other.S_a @ self.S_a,
            other.S_b @ self.S_b,
            other.S_a @ self.G_a @ other.S_a.T + other.G_a,
            other.S_b @ self.G_b @ other.S_b.T + other.G_b,
        )

    def as_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("S_a", "G_a", "S_b", "G_b")}


def apply_local_tgcp(V, tgcp: TgcpMap, tol: float = CP_TOL) -> TwoModeCM:
    """Covariance matrix after the local map.

    Raises:
        InvalidInputError: the map is not completely positive.
    """
    if not tgcp.is_cp(tol):
        raise InvalidInputError("map violates the complete-positivity condition")
    S = tgcp.S
    out = S @ _matrix(V) @ S.T + tgcp.G
    return make_cm(0.5 * (out + out.T))


def attenuation_map(tau: float, mode: str = "b") -> TgcpMap:
    """Beam-splitter loss of amplitude transmissivity ``tau`` on one mode."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidInputError(f"tau must lie in [0, 1], got {tau}")
    if mode not in ("a", "b"):
        raise InvalidInputError(f"mode must be 'a' or 'b', got {mode!r}")
    S = tau * np.eye(2)
    G = (1.0 - tau * tau) * np.eye(2)
    if mode == "a":
        return TgcpMap(S, np.eye(2), G, np.zeros((2, 2)))
    return TgcpMap(np.eye(2), S, np.zeros((2, 2)), G)


def is_minimal_noise(tgcp: TgcpMap, tol: float = 1e-9) -> bool:
    return all(
        abs(np.linalg.det(G) - (1.0 - np.linalg.det(S)) ** 2) <= tol
        for S, G in ((tgcp.S_a, tgcp.G_a), (tgcp.S_b, tgcp.G_b))
    )


@dataclass(frozen=True, eq=False)
class MinimalNoiseDecomposition:
    """One-mode channel written as ``sigma1``, then attenuation ``tau``, then ``sigma2``."""

    sigma1: np.ndarray
    tau: float
    sigma2: np.ndarray

    def recompose(self):
        """Return ``(S, G)`` of the composite channel."""
        S = self.tau * self.sigma2 @ self.sigma1
        G = (1.0 - self.tau**2) * self.sigma2 @ self.sigma2.T
        return S, G

    def as_dict(self) -> dict:
        return {"sigma1": self.sigma1.tolist(), "tau": self.tau, "sigma2": self.sigma2.tolist()}


def _sym_sqrt(M):
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    return (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.T


def decompose_minimal_noise(S, G, tol: float = 1e-9) -> MinimalNoiseDecomposition:
    """Split a minimal-noise one-mode channel into symplectic, attenuation, symplectic.

    ``sigma2`` is the symmetric square root of ``G / (1 - det S)``, so it is the
    identity whenever ``G`` is proportional to ``I``.

    Raises:
        OutOfDomainError: ``det S`` is not in ``(0, 1]``.
        InvalidInputError: ``(S, G)`` is not completely positive or not minimal noise.
    """
    S = _as_finite(S, (2, 2), "S")
    G = _as_finite(G, (2, 2), "G")
    s = float(np.linalg.det(S))
    if not 0.0 < s <= 1.0 + tol:
        raise OutOfDomainError(f"det S must lie in (0, 1], got {s}")
    if not mode_is_cp(S, G, tol):
        raise InvalidInputError("channel violates the complete-positivity condition")
    scale = max(1.0, float(np.max(np.abs(G))))
    if abs(np.linalg.det(G) - (1.0 - s) ** 2) > tol * scale * scale:
        raise InvalidInputError("channel is not minimal noise: det G != (1 - det S)^2")
    if 1.0 - s <= tol:
        if np.max(np.abs(G)) > math.sqrt(tol) * scale:
            raise InvalidInputError("symplectic S with non-zero added noise is not minimal")
        return MinimalNoiseDecomposition(S / math.sqrt(s), 1.0, np.eye(2))
    T2 = _sym_sqrt(G / (1.0 - s))
    dt = np.linalg.det(T2)
    if dt <= 0:
        raise NumericalFailureError("degenerate noise matrix in decomposition")
    T2 = T2 / math.sqrt(dt)
    if np.max(np.abs(T2 - np.eye(2))) < 1e-12:
        T2 = np.eye(2)
    tau = math.sqrt(s)
    T1 = np.linalg.solve(T2, S) / tau
    if not (is_symplectic(T1, 1e-8) and is_symplectic(T2, 1e-8)):
        raise NumericalFailureError("decomposition factors are not symplectic")
    return MinimalNoiseDecomposition(T1, tau, T2)


def isotropize_noise(V):
    """Local symplectic pair with ``S_a = Z S_b Z`` making the noise matrix isotropic.

    The pair acts on ``N`` by congruence with ``S_b``; choosing
    ``S_b = det(N)^{1/4} N^{-1/2}`` gives ``N' = sqrt(det N) I``.

    Returns:
        tuple: ``(tgcp, V_out)``.

    Raises:
        OutOfDomainError: ``N`` is singular.
    """
    N = noise_matrix(V)
    w, Q = np.linalg.eigh(N)
    if w[0] <= 0:
        raise OutOfDomainError("noise matrix is singular; no isotropizing symplectic")
    root4 = (w[0] * w[1]) ** 0.25
    S_b = (Q * (root4 / np.sqrt(w))) @ Q.T
    S_a = Z2 @ S_b @ Z2
    tgcp = TgcpMap.symplectic(S_a, S_b)
    return tgcp, apply_local_tgcp(V, tgcp)


def swap_cm(n_opt: float, r: float) -> TwoModeCM:
    """State after teleporting one arm of ``two_mode_squeezed(r)`` through noise ``2 n_opt I``."""
    if n_opt < 0 or r < 0:
        raise InvalidInputError("n_opt and r must be non-negative")
    ch, sh = math.cosh(r), math.sinh(r)
    V = np.block(
        [
            [ch * np.eye(2), -sh * Z2],
            [-sh * Z2, (2.0 * n_opt + ch) * np.eye(2)],
        ]
    )
    return TwoModeCM(V)


def swap_nu(n_opt: float, r: float) -> float:
    """Lowest PT symplectic eigenvalue of :func:`swap_cm`, free of cancellation.

    After partial transposition the x and p quadratures both carry
    ``M = [[c, -s], [-s, c + 2n]]``, so ``nu`` is the smaller eigenvalue of
    ``M``: ``det M / lambda_max`` with ``det M = 1 + 2 n c``.
    """
    if n_opt < 0 or r < 0:
        raise InvalidInputError("n_opt and r must be non-negative")
    c, s = math.cosh(r), math.sinh(r)
    lam_max = c + n_opt + math.hypot(n_opt, s)
    return (1.0 + 2.0 * n_opt * c) / lam_max
