"""Tangent dynamics of the kicked-tops map in the canonical chart ``(q1, p1, q2, p2)``.

Orbits are iterated on the spheres; one-step Jacobians are the Cartesian
Jacobian conjugated by the chart derivatives, ``(q, p) = (azimuth, z)`` on
each sphere. The chart is area preserving, so every Jacobian is symplectic.
"""

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._backend import kernels
from .classical import ClassicalState, kick_map

POLE_GUARD = 1e-6
# Largest |M_ij| kept in direct mode; beyond this M^T J M = J cannot hold to 1e-8.
DIRECT_LIMIT = 1e8
TYPICAL_CASE_THRESHOLD = 1e-6

SYMPLECTIC_J = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)


class PoleError(ValueError):
    """Orbit point too close to a pole for the canonical chart."""


def cartesian_jacobian(x, a, c):
    """6x6 Jacobian of one kick at the pre-kick state ``x = (S, L)``."""
    x = np.asarray(x, dtype=float)
    al, be = c * x[3], c * x[0]
    cal, sal, cbe, sbe = math.cos(al), math.sin(al), math.cos(be), math.sin(be)
    sy, sz = x[1] * cal - x[2] * sal, x[1] * sal + x[2] * cal
    ly, lz = x[4] * cbe - x[5] * sbe, x[4] * sbe + x[5] * cbe
    K = np.zeros((6, 6))
    K[0, 0] = K[3, 3] = 1.0
    K[1, 1:4] = cal, -sal, -c * sz
    K[2, 1:4] = sal, cal, c * sy
    K[4, 4:6] = cbe, -sbe
    K[5, 4:6] = sbe, cbe
    K[4, 0], K[5, 0] = -c * lz, c * ly
    ca, sa = math.cos(a), math.sin(a)
    Rz = np.zeros((6, 6))
    Rz[0, :2] = Rz[3, 3:5] = ca, -sa
    Rz[1, :2] = Rz[4, 3:5] = sa, ca
    Rz[2, 2] = Rz[5, 5] = 1.0
    return Rz @ K


def _check_pole(x):
    if abs(x[2]) > 1.0 - POLE_GUARD or abs(x[5]) > 1.0 - POLE_GUARD:
        raise PoleError(f"state {x} is within {POLE_GUARD} of a pole; re-seed the orbit")


def chart_inverse_derivative(x):
    """6x4 derivative of ``(q, p) -> (S, L)`` at ``x``."""
    E = np.zeros((6, 4))
    for k in (0, 1):
        vx, vy, vz = x[3 * k:3 * k + 3]
        s2 = vx * vx + vy * vy
        E[3 * k:3 * k + 3, 2 * k] = -vy, vx, 0.0
        E[3 * k:3 * k + 3, 2 * k + 1] = -vz * vx / s2, -vz * vy / s2, 1.0
    return E


def chart_derivative(x):
    """4x6 derivative of ``(S, L) -> (q, p)`` at ``x``."""
    D = np.zeros((4, 6))
    for k in (0, 1):
        vx, vy, _ = x[3 * k:3 * k + 3]
        s2 = vx * vx + vy * vy
        D[2 * k, 3 * k:3 * k + 3] = -vy / s2, vx / s2, 0.0
        D[2 * k + 1, 3 * k + 2] = 1.0
    return D


def jacobian_one_step(state, a, c):
    """4x4 Jacobian of one period in ``(q1, p1, q2, p2)`` at ``state``."""
    x0 = state.as_array()
    _check_pole(x0)
    x1 = kick_map(state, a, c).as_array()
    _check_pole(x1)
    return chart_derivative(x1) @ cartesian_jacobian(x0, a, c) @ chart_inverse_derivative(x0)


def symplectic_defect(M):
    return float(np.max(np.abs(M.T @ SYMPLECTIC_J @ M - SYMPLECTIC_J)))


@dataclass
class TangentFrame:
    """Accumulated stability matrix along an orbit.

    ``mode="direct"`` stores ``M``. ``mode="qr"`` stores ``M = Q diag(exp(log_r)) U``
    with ``Q`` orthogonal and ``U`` unit upper triangular, which never overflows.
    """

    mode: str
    base: ClassicalState
    t: int
    M: np.ndarray | None = None
    Q: np.ndarray | None = None
    log_r: np.ndarray | None = None
    U: np.ndarray | None = None

    def matrix(self):
        if self.mode == "direct":
            return self.M
        return self.Q @ (np.exp(self.log_r)[:, None] * self.U)

    def log_abs_det(self):
        if self.mode == "direct":
            return float(np.linalg.slogdet(self.M)[1])
        return float(np.sum(self.log_r))


def _qr_update(J, Q, log_r, U):
    Qn, R = np.linalg.qr(J @ Q)
    sign = np.sign(np.diag(R))
    sign[sign == 0] = 1.0
    Qn = Qn * sign
    R = sign[:, None] * R
    d = np.diag(R)
    scaled = (R / d[:, None]) * np.exp(log_r[None, :] - log_r[:, None])
    return Qn, log_r + np.log(d), np.triu(scaled @ U)


def _qr_start(initial_matrix):
    if initial_matrix is None:
        return np.eye(4), np.zeros(4), np.eye(4)
    Q, R = np.linalg.qr(np.asarray(initial_matrix, dtype=float))
    sign = np.sign(np.diag(R))
    sign[sign == 0] = 1.0
    Q, R = Q * sign, sign[:, None] * R
    d = np.diag(R)
    return Q, np.log(d), np.triu(R / d[:, None])


def iter_stability(initial, a, c, t_max, initial_matrix=None):
    """Yield QR-mode frames for ``t = 0 .. t_max`` along one orbit.

    ``initial_matrix`` (default identity) is the ``M_0`` the products start from.
    """
    state = initial
    Q, log_r, U = _qr_start(initial_matrix)
    for t in range(t_max + 1):
        if t:
            Q, log_r, U = _qr_update(jacobian_one_step(state, a, c), Q, log_r, U)
            state = kick_map(state, a, c)
        yield TangentFrame("qr", state, t, Q=Q.copy(), log_r=log_r.copy(), U=U.copy())


def accumulate_stability(initial, a, c, t, mode="direct", initial_matrix=None):
    """``M_t = J_t ... J_1 M_0`` along the orbit of ``initial`` (``M_0`` defaults to identity).

    Direct mode raises ``OverflowError`` once entries exceed ``DIRECT_LIMIT``
    (around 40 kicks in the chaotic regime); use ``mode="qr"`` then.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if mode not in ("direct", "qr"):
        raise ValueError(f"mode must be 'direct' or 'qr', got {mode!r}")
    if mode == "qr":
        for frame in iter_stability(initial, a, c, t, initial_matrix):
            pass
        return frame
    state = initial
    M = np.eye(4) if initial_matrix is None else np.array(initial_matrix, dtype=float)
    for step in range(t):
        M = jacobian_one_step(state, a, c) @ M
        state = kick_map(state, a, c)
        if not np.all(np.isfinite(M)) or np.max(np.abs(M)) > DIRECT_LIMIT:
            raise OverflowError(f"direct stability product exceeded {DIRECT_LIMIT:g} at t={step + 1}; use mode='qr'")
    return TangentFrame("direct", state, t, M=M)


@dataclass
class LyapunovSpectrum:
    lambdas: np.ndarray
    stderr: np.ndarray
    n_steps: int
    n_transient: int
    block_rates: np.ndarray = field(repr=False, default=None)

    @property
    def ks_entropy(self):
        return float(np.sum(self.lambdas[self.lambdas > 0]))

    def pairing(self):
        """``(lambda1 + lambda4, lambda2 + lambda3)`` with their standard errors."""
        sums = np.column_stack([self.block_rates[:, 0] + self.block_rates[:, 3],
                                self.block_rates[:, 1] + self.block_rates[:, 2]])
        nb = len(sums)
        se = sums.std(axis=0, ddof=1) / np.sqrt(nb) if nb > 1 else np.full(2, np.inf)
        return sums.mean(axis=0), se

    def as_dict(self):
        return dict(lambdas=self.lambdas.tolist(), stderr=self.stderr.tolist(), ks_entropy=self.ks_entropy,
                    n_steps=self.n_steps, n_transient=self.n_transient)


def tangent_basis(x):
    """Orthonormal 6x4 basis of the tangent space of the two spheres at ``x``."""
    Q = np.zeros((6, 4))
    for k in (0, 1):
        v = x[3 * k:3 * k + 3]
        # Gram-Schmidt against the axis least aligned with v
        e = np.zeros(3)
        e[np.argmin(np.abs(v))] = 1.0
        u1 = e - (e @ v) * v
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(v, u1)
        Q[3 * k:3 * k + 3, 2 * k] = u1
        Q[3 * k:3 * k + 3, 2 * k + 1] = u2
    return Q


def lyapunov_spectrum(initial, a, c, n_steps=10**6, n_transient=10**3, n_blocks=20):
    """Lyapunov exponents (nats per kick) by Benettin QR re-orthonormalization.

    The tangent frame lives in the sphere tangent planes embedded in R^6, so
    orbits passing near a pole need no special handling. Exponents are chart
    independent.
    """
    if n_steps < 1 or n_transient < 0:
        raise ValueError("need n_steps >= 1 and n_transient >= 0")
    n_blocks = max(1, min(n_blocks, n_steps))
    state = initial if isinstance(initial, ClassicalState) else ClassicalState.from_angles(initial)
    x0 = state.as_array()
    logs, _, _ = kernels.benettin(x0, np.ascontiguousarray(tangent_basis(x0)), float(a), float(c),
                                  int(n_transient), int(n_steps), int(n_blocks))
    per = n_steps // n_blocks
    counts = np.full(n_blocks, per, dtype=float)
    counts[-1] += n_steps - per * n_blocks
    rates = logs / counts[:, None]
    lam = logs.sum(axis=0) / n_steps
    order = np.argsort(lam)[::-1]
    rates = rates[:, order]
    se = rates.std(axis=0, ddof=1) / np.sqrt(n_blocks) if n_blocks > 1 else np.full(4, np.inf)
    return LyapunovSpectrum(lam[order], se, int(n_steps), int(n_transient), rates)


def ks_growth_prediction(spectrum, t):
    """``(lambda1 + lambda2) t``; negative finite-time estimates count as zero."""
    lam = spectrum.lambdas if isinstance(spectrum, LyapunovSpectrum) else np.asarray(spectrum)
    return (max(lam[0], 0.0) + max(lam[1], 0.0)) * np.asarray(t, dtype=float)


@dataclass
class CovarianceBlocks:
    """``A = (M^-1)^T M^-1`` split into 2x2 blocks ``[[a, b], [b^T, d]]``.

    ``log_det_d`` is always available; the explicit matrices are ``None``
    when ``A`` would overflow (long chaotic times in QR mode).
    """

    log_det_d: float
    A: np.ndarray | None = None
    a_hat: np.ndarray | None = None
    b_hat: np.ndarray | None = None
    d_hat: np.ndarray | None = None
    a_tilde: np.ndarray | None = None
    system2_overlap: float | None = None


def _log_det_top_block(Q, log_r, U):
    """``log det (M M^T)[:2, :2]`` for ``M = Q diag(exp(log_r)) U`` without forming ``M``."""
    top = np.sort(log_r)[-2:].sum()
    Q1 = Q[:2]
    pairs = list(combinations(range(4), 2))
    total = 0.0
    for S in pairs:
        acc = 0.0
        for T in pairs:
            dq = np.linalg.det(Q1[:, T])
            du = np.linalg.det(U[np.ix_(T, S)])
            if dq != 0.0 and du != 0.0:
                acc += dq * du * math.exp(log_r[list(T)].sum() - top)
        total += acc * acc
    return 2.0 * top + math.log(total)


def _split(A):
    a_hat, b_hat, d_hat = A[:2, :2], A[:2, 2:], A[2:, 2:]
    a_tilde = a_hat - b_hat @ np.linalg.solve(d_hat, b_hat.T)
    return a_hat, b_hat, d_hat, a_tilde


def _overlap(A):
    w, V = np.linalg.eigh(A)
    top = V[2:, np.argsort(w)[-2:]]
    return float(np.linalg.svd(top, compute_uv=False).min())


def covariance_blocks(frame):
    """Blocks of ``A_t`` and their Schur complement from a frame or a 4x4 matrix."""
    if not isinstance(frame, TangentFrame):
        frame = TangentFrame("direct", None, None, M=np.asarray(frame, dtype=float))
    if frame.mode == "direct":
        Minv = np.linalg.inv(frame.M)
        A = Minv.T @ Minv
        A = 0.5 * (A + A.T)
        a_hat, b_hat, d_hat, a_tilde = _split(A)
        sign, logdet = np.linalg.slogdet(d_hat)
        if sign <= 0:
            # numerically degenerate d: fall back to the factored route
            Q, R = np.linalg.qr(frame.M)
            s = np.sign(np.diag(R))
            Q, R = Q * s, s[:, None] * R
            lr = np.log(np.diag(R))
            logdet = _log_det_top_block(Q, lr, R / np.diag(R)[:, None]) - 2.0 * lr.sum()
        blocks = CovarianceBlocks(float(logdet), A, a_hat, b_hat, d_hat, a_tilde, _overlap(A))
    else:
        logdet = _log_det_top_block(frame.Q, frame.log_r, frame.U) - 2.0 * frame.log_abs_det()
        blocks = CovarianceBlocks(float(logdet))
        if np.max(np.abs(frame.log_r)) < 150.0:
            Minv = np.linalg.inv(frame.matrix())
            A = Minv.T @ Minv
            A = 0.5 * (A + A.T)
            a_hat, b_hat, d_hat, a_tilde = _split(A)
            blocks = CovarianceBlocks(float(logdet), A, a_hat, b_hat, d_hat, a_tilde, _overlap(A))
    # at t=0 A is whatever M_0 makes it; the typical-case check only means something after kicks
    if frame.t != 0 and blocks.system2_overlap is not None and blocks.system2_overlap < TYPICAL_CASE_THRESHOLD:
        warnings.warn(
            f"leading eigenvectors of A_t barely reach system 2 (overlap {blocks.system2_overlap:.2e}); "
            "det d_hat need not grow at the KS rate",
            RuntimeWarning,
            stacklevel=2,
        )
    return blocks


def gaussian_entropy(blocks, hbar_c):
    """``ln(2 pi hbar_c) + ln(det d_hat) / 2`` for the evolved Gaussian ensemble."""
    if not hbar_c > 0:
        raise ValueError("hbar_c must be positive")
    return math.log(2 * math.pi * hbar_c) + 0.5 * blocks.log_det_d


def random_symplectic(rng, n_factors=3):
    """Product of one-step Jacobians at random states and random ``(a, c)``."""
    M = np.eye(4)
    for _ in range(n_factors):
        while True:
            cos_t = rng.uniform(-0.99, 0.99, size=2)
            phi = rng.uniform(0, 2 * np.pi, size=2)
            state = ClassicalState.from_angles((np.arccos(cos_t[0]), phi[0], np.arccos(cos_t[1]), phi[1]))
            try:
                J = jacobian_one_step(state, rng.uniform(0, 2 * np.pi), rng.uniform(0.0, 3.0))
            except PoleError:
                continue
            break
        M = J @ M
    return M
