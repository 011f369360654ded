"""Spin-j operators and spin coherent states.

Basis ordering is ``m = j, j-1, ..., -j`` so that ``sz`` is diagonal and
descending; index 0 is the highest-weight state ``|j, j>``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _as_spin(j):
    try:
        twice = 2 * float(j)
    except (TypeError, ValueError):
        raise ValueError(f"spin must be a number, got {j!r}") from None
    if not np.isfinite(twice) or twice < 1 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {j!r}")
    return round(twice) / 2


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """Dense matrices of one spin-j representation."""

    j: float
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self):
        return int(round(2 * self.j)) + 1

    @property
    def m(self):
        """Eigenvalues of ``sz`` in basis order."""
        return np.real(np.diag(self.sz)).copy()

    @cached_property
    def _sx_eig(self):
        # sx is real symmetric in this basis, so the eigenvectors are real
        w, V = np.linalg.eigh(self.sx.real)
        return w, V

    @cached_property
    def _sy_eig(self):
        return np.linalg.eigh(self.sy)

    def casimir(self):
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz


def build_spin_operators(j):
    """Return ``SpinOperators`` for spin ``j`` (1/2, 1, 3/2, ...)."""
    j = _as_spin(j)
    m = np.arange(j, -j - 1, -1.0)
    # <m+1| S+ |m> = sqrt(j(j+1) - m(m+1)), placed on the superdiagonal
    raise_ = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1)
    sx = (0.5 * (raise_ + raise_.T)).astype(complex)
    sy = (-0.5j) * (raise_ - raise_.T)
    sz = np.diag(m).astype(complex)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return SpinOperators(j, sx, sy, sz)


def spin_coherent_state(ops, theta, phi):
    """``exp(i theta Sz) exp(i phi Sy) |j, j>`` evaluated by exact eigendecomposition.

    ``theta`` and ``phi`` are the literal rotation angles; the resulting state is
    centred on :func:`rotation_bloch_vector` ``(theta, phi)``. Use
    :func:`coherent_state_at` to place a state at given polar/azimuthal angles.
    """
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("angles must be finite")
    w, V = ops._sy_eig
    psi = V @ (np.exp(1j * phi * w) * V[0].conj())
    return np.exp(1j * theta * ops.m) * psi


def rotation_bloch_vector(theta, phi):
    """Unit vector ``<S>/j`` of ``spin_coherent_state(ops, theta, phi)``.

    ``exp(i phi Sy)`` turns the north pole by ``-phi`` about y and
    ``exp(i theta Sz)`` then turns it by ``-theta`` about z.
    """
    return np.array([-np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)])


def chart_to_rotation_angles(theta, phi):
    """Rotation angles that centre a coherent state at polar ``theta``, azimuth ``phi``.

    This is the single conversion shared by the quantum and classical sides:
    ``rotation_bloch_vector(*chart_to_rotation_angles(t, p)) == bloch_vector(t, p)``.
    """
    return np.pi - phi, theta


def coherent_state_at(ops, theta, phi):
    """Spin coherent state centred at the Bloch point with polar ``theta``, azimuth ``phi``."""
    return spin_coherent_state(ops, *chart_to_rotation_angles(theta, phi))


@dataclass(frozen=True, eq=False)
class PureState:
    """Pure state of two spin-j tops.

    ``amplitudes`` has length ``(2j+1)**2`` with index ``idx1 * (2j+1) + idx2``.
    """

    amplitudes: np.ndarray
    j: float

    def __post_init__(self):
        d = self.dim
        if self.amplitudes.shape != (d * d,):
            raise ValueError(f"expected {d * d} amplitudes for j={self.j}, got {self.amplitudes.shape}")

    @property
    def dim(self):
        return int(round(2 * self.j)) + 1

    @property
    def matrix(self):
        """Amplitudes as a ``(2j+1, 2j+1)`` array, rows indexing system 1."""
        return self.amplitudes.reshape(self.dim, self.dim)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def product_coherent_state(ops, angles):
    """``|theta1, phi1> (x) |theta2, phi2>`` with angles in rotation form (see above)."""
    t1, p1, t2, p2 = angles
    psi = np.outer(spin_coherent_state(ops, t1, p1), spin_coherent_state(ops, t2, p2))
    return PureState(psi.ravel(), ops.j)


def product_coherent_state_at(ops, center):
    """Product coherent state centred at Bloch angles ``(theta1, phi1, theta2, phi2)``."""
    t1, p1, t2, p2 = center
    return product_coherent_state(ops, (*chart_to_rotation_angles(t1, p1), *chart_to_rotation_angles(t2, p2)))


def embed(op, system, dim):
    """Dense ``op (x) 1`` (system 1) or ``1 (x) op`` (system 2); small dims only."""
    eye = np.eye(dim)
    if system == 1:
        return np.kron(op, eye)
    if system == 2:
        return np.kron(eye, op)
    raise ValueError("system must be 1 or 2")
