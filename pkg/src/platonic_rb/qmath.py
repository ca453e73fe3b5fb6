"""Qubit linear algebra: axis rotations, Bloch-sphere maps, phase-insensitive
comparison, and validity checks for the small dense matrices used everywhere
else in the package.

Conventions
-----------
* ``rotation_unitary(axis, angle)`` returns ``exp(-i * angle * sigma_axis / 2)``,
  so positive angles rotate the Bloch vector right-handedly about the axis.
* Operators compose right to left: in a product ``U @ V`` the factor ``V``
  acts first.
* Group elements are physical rotations, defined only up to a global phase;
  use `equal_up_to_phase` or compare `bloch_rotation` images when identity
  up to phase is what matters.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY2",
    "axis_vector",
    "rotation_unitary",
    "golden_angle",
    "equal_up_to_phase",
    "bloch_rotation",
    "rotation_angle",
    "rotation_axis",
    "is_unitary",
    "is_bloch_rotation",
    "is_density_matrix",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

_PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
_AXIS_VECTORS = {"X": (1.0, 0.0, 0.0), "Y": (0.0, 1.0, 0.0), "Z": (0.0, 0.0, 1.0)}


def axis_vector(axis) -> np.ndarray:
    """Resolve an axis label ("X", "Y", "Z") or 3-vector to a unit 3-vector.

    Raises
    ------
    ValueError
        If the label is unknown or a vector argument is not unit norm
        (tolerance 1e-12).
    """
    if isinstance(axis, str):
        try:
            return np.array(_AXIS_VECTORS[axis.upper()])
        except KeyError:
            raise ValueError(f"unknown axis label {axis!r}") from None
    vec = np.asarray(axis, dtype=float)
    if vec.shape != (3,):
        raise ValueError(f"axis vector must have shape (3,), got {vec.shape}")
    if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
        raise ValueError(f"axis vector must be unit norm, got |v| = {np.linalg.norm(vec)}")
    return vec


def rotation_unitary(axis, angle: float) -> np.ndarray:
    """Rotation by `angle` (radians) about `axis`: exp(-i*angle*sigma_axis/2).

    Parameters
    ----------
    axis : str or array_like
        "X", "Y", "Z" or a unit 3-vector.
    angle : float
        Rotation angle in radians; finite.

    Returns
    -------
    ndarray
        2x2 complex unitary with determinant 1.
    """
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle}")
    n = axis_vector(axis)
    sigma_n = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    half = 0.5 * angle
    return math.cos(half) * IDENTITY2 - 1j * math.sin(half) * sigma_n


def golden_angle() -> float:
    """The angle phi with tan(phi) = (1 + sqrt(5))/2, about 1.017221968 rad."""
    return math.atan((1.0 + math.sqrt(5.0)) / 2.0)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether ``u == exp(i*theta) * v`` elementwise within `tol` for some theta.

    The candidate phase is read off the entry where `v` has the largest
    magnitude, which for a unitary is bounded away from zero.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        return False
    flat = np.argmax(np.abs(v))
    ref = v.flat[flat]
    if abs(ref) == 0.0:
        return bool(np.max(np.abs(u - v)) <= tol)
    phase = u.flat[flat] / ref
    mag = abs(phase)
    if mag == 0.0:
        return bool(np.max(np.abs(u)) <= tol)
    phase /= mag
    return bool(np.max(np.abs(u - phase * v)) <= tol)


def bloch_rotation(u: np.ndarray) -> np.ndarray:
    """SO(3) action of a qubit unitary on the Bloch vector.

    Parameters
    ----------
    u : ndarray
        2x2 unitary.

    Returns
    -------
    ndarray
        3x3 real matrix M with M[a, b] = Tr(sigma_a u sigma_b u^dag) / 2,
        invariant under the global phase of `u`.
    """
    u = np.asarray(u, dtype=complex)
    udag = u.conj().T
    m = np.empty((3, 3))
    for b, sb in enumerate(_PAULIS):
        conj = u @ sb @ udag
        for a, sa in enumerate(_PAULIS):
            m[a, b] = np.trace(sa @ conj).real / 2.0
    return m


def rotation_angle(m: np.ndarray) -> float:
    """Rotation angle in [0, pi] of an SO(3) matrix, from its trace."""
    c = (np.trace(np.asarray(m, dtype=float)) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


def rotation_axis(m: np.ndarray) -> np.ndarray:
    """Oriented unit rotation axis of an SO(3) matrix with angle in (0, pi].

    For angles strictly inside (0, pi) the axis direction follows the
    right-hand rule via the antisymmetric part. At angle pi the antisymmetric
    part vanishes and the axis is recovered from (M + I)/2 up to sign; the
    sign is then fixed to the lexicographically positive choice.

    Raises
    ------
    ValueError
        For the identity rotation, which has no axis.
    """
    m = np.asarray(m, dtype=float)
    theta = rotation_angle(m)
    if theta < 1e-9:
        raise ValueError("identity rotation has no axis")
    anti = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    if np.linalg.norm(anti) > 1e-6:
        return anti / np.linalg.norm(anti)
    # angle == pi: columns of (M + I)/2 are n_a * n, pick the largest
    outer = (m + np.eye(3)) / 2.0
    col = outer[:, int(np.argmax(np.diag(outer)))]
    n = col / np.linalg.norm(col)
    for component in n:
        if abs(component) > 1e-9:
            return n if component > 0 else -n
    return n


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    """Whether U^dag U = I and |det U| = 1 within `tol`."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        return False
    return abs(abs(np.linalg.det(u)) - 1.0) <= tol


def is_bloch_rotation(m: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether `m` is orthogonal with determinant +1 within `tol`."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        return False
    if np.max(np.abs(m.T @ m - np.eye(3))) > tol:
        return False
    return abs(np.linalg.det(m) - 1.0) <= tol


def is_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether `rho` is Hermitian, unit trace, and PSD (eigenvalues >= -tol)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        return False
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -tol)
