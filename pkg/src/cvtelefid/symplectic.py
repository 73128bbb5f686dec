"""Fixed-size symplectic algebra for one- and two-mode phase space.

Quadratures are ordered ``(x_a, p_a, x_b, p_b)`` and the vacuum has unit
variance, so a coherent state has covariance matrix ``I``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

#: single-mode symplectic form
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
#: two-mode symplectic form ``J (+) J``
J4 = np.block([[J2, np.zeros((2, 2))], [np.zeros((2, 2)), J2]])
#: reflection ``diag(1, -1)``
Z2 = np.diag([1.0, -1.0])
#: partial-transpose conjugator ``Z (+) I``
LAMBDA = np.diag([1.0, -1.0, 1.0, 1.0])

CONSTRUCTION_TOL = 1e-10
CHECK_TOL = 1e-9


def _as_finite(M, shape=None, name="matrix"):
    M = np.asarray(M, dtype=float)
    if shape is not None and M.shape != shape:
        raise InvalidInputError(f"{name} must have shape {shape}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def direct_sum(Ma, Mb):
    """Block-diagonal ``Ma (+) Mb`` of two 2x2 matrices."""
    out = np.zeros((4, 4))
    out[:2, :2] = Ma
    out[2:, 2:] = Mb
    return out


def symplectic_form(dim: int) -> np.ndarray:
    if dim == 2:
        return J2
    if dim == 4:
        return J4
    raise InvalidInputError(f"only 2x2 and 4x4 matrices are supported, got dim {dim}")


def is_symplectic(S, tol: float = CHECK_TOL) -> bool:
    """True iff ``max|S J S^T - J| <= tol`` for the matching symplectic form."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    S = _as_finite(S, name="S")
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"S must be square, got shape {S.shape}")
    J = symplectic_form(S.shape[0])
    return bool(np.max(np.abs(S @ J @ S.T - J)) <= tol)


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def squeeze(s: float) -> np.ndarray:
    """Single-mode squeezer ``diag(s, 1/s)``."""
    if not s > 0:
        raise InvalidInputError(f"squeeze factor must be positive, got {s}")
    return np.diag([s, 1.0 / s])


class EulerParams(NamedTuple):
    """Bloch-Messiah angles of a single-mode symplectic.

    ``rotation(phi) @ squeeze(s) @ rotation(psi)``.
    """

    phi: float
    s: float
    psi: float

    def compose(self) -> np.ndarray:
        return rotation(self.phi) @ squeeze(self.s) @ rotation(self.psi)


def _rotation_angle(R) -> float:
    return math.atan2(R[0, 1], R[0, 0])


def euler_decompose(S, tol: float = CHECK_TOL) -> EulerParams:
    """Split a 2x2 symplectic into rotation, squeeze (s >= 1), rotation.

    For ``s == 1`` the split between ``phi`` and ``psi`` is a gauge; all of the
    angle is put into ``phi``.
    """
    S = _as_finite(S, (2, 2), "S")
    if not is_symplectic(S, tol):
        raise InvalidInputError("matrix is not symplectic")
    U, sv, Vt = np.linalg.svd(S)
    if np.linalg.det(U) < 0:
        # det U = det Vt for det S = 1; flip the second singular pair on both sides
        U = U @ Z2
        Vt = Z2 @ Vt
    s = float(math.sqrt(sv[0] / sv[1]))
    if abs(s - 1.0) < 1e-12:
        return EulerParams(_rotation_angle(U @ Vt), 1.0, 0.0)
    return EulerParams(_rotation_angle(U), s, _rotation_angle(Vt))


def partial_transpose_cm(V) -> np.ndarray:
    """Covariance matrix of the partial transpose, ``Lambda V Lambda``."""
    V = _as_finite(V, (4, 4), "V")
    return LAMBDA @ V @ LAMBDA


def blocks(V):
    """Return the 2x2 blocks ``(A, B, C)`` of ``V = [[A, C], [C^T, B]]``."""
    return V[:2, :2], V[2:, 2:], V[:2, 2:]


def symplectic_spectrum(V):
    """Two-mode symplectic eigenvalues ``(nu_minus, nu_plus)`` of ``V > 0``.

    Taken from the eigenvalues ``nu_k^2`` of the symmetric matrix
    ``-(V^{1/2} J V^{1/2})^2``, which stays accurate when the spectrum is
    degenerate (pure states), unlike the closed-form invariant expression.
    Pass ``Lambda V Lambda`` for the partial transpose.

    Raises:
        InvalidInputError: ``V`` is not positive definite.
    """
    V = _as_finite(V, (4, 4), "V")
    w, Q = np.linalg.eigh(0.5 * (V + V.T))
    if w[0] <= 0:
        raise InvalidInputError(f"V is not positive definite (eigenvalue {w[0]:.3e})")
    half = (Q * np.sqrt(w)) @ Q.T
    K = half @ J4 @ half
    ev = np.linalg.eigvalsh(K.T @ K)
    ev = np.clip(ev, 0.0, None)
    return math.sqrt(0.5 * (ev[0] + ev[1])), math.sqrt(0.5 * (ev[2] + ev[3]))


def williamson_two_mode(V, tol: float = CONSTRUCTION_TOL):
    """Symplectic ``S`` with ``S V S^T = diag(nu_-, nu_-, nu_+, nu_+)``.

    Works for any symmetric positive-definite 4x4 matrix, physical or not, so
    it also diagonalizes partially transposed covariance matrices.

    Returns:
        tuple: ``(S, nu_minus, nu_plus)`` with ``nu_minus <= nu_plus``.

    Raises:
        InvalidInputError: ``V`` is not symmetric positive definite.
        NumericalFailureError: the reconstruction residual exceeds ``tol``
            (relative to the scale of ``V``).
    """
    V = _as_finite(V, (4, 4), "V")
    if np.max(np.abs(V - V.T)) > 1e-12 * max(1.0, np.max(np.abs(V))):
        raise InvalidInputError("V must be symmetric")
    V = 0.5 * (V + V.T)
    w, Q = np.linalg.eigh(V)
    if w[0] <= 0:
        raise InvalidInputError(f"V is not positive definite (eigenvalue {w[0]:.3e})")
    v_isqrt = (Q / np.sqrt(w)) @ Q.T
    K = v_isqrt @ J4 @ v_isqrt
    K = 0.5 * (K - K.T)
    # iK is Hermitian with eigenvalues +-1/nu_k; an eigenvector x + iy of
    # +omega spans one rotation block (K x = omega y, K y = -omega x)
    om, Zc = np.linalg.eigh(1j * K)
    if om[2] <= 0:
        raise NumericalFailureError("degenerate antisymmetric form in Williamson step")
    cols = []
    nus = []
    for k in (3, 2):  # largest omega first -> smallest symplectic eigenvalue first
        x = math.sqrt(2.0) * Zc[:, k].real
        y = math.sqrt(2.0) * Zc[:, k].imag
        cols.extend([-x, y])
        nus.extend([1.0 / om[k]] * 2)
    O = np.column_stack(cols)
    nus = np.array(nus)
    S = (np.sqrt(nus)[:, None] * O.T) @ v_isqrt

    scale = max(1.0, float(np.max(np.abs(V))))
    D = np.diag(nus)
    res = max(
        float(np.max(np.abs(S @ V @ S.T - D))) / scale,
        float(np.max(np.abs(S @ J4 @ S.T - J4))),
    )
    if res > tol * max(1.0, float(np.max(np.abs(S))) ** 2):
        raise NumericalFailureError(f"Williamson residual {res:.3e} exceeds {tol:.1e}")
    return S, float(nus[0]), float(nus[2])
