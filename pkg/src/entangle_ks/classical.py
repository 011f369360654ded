"""Classical stroboscopic map of two kicked tops on the product of unit spheres.

One period is the coupling kick followed by free precession, the same order
in which the quantum Floquet factors act on a state:

    S' = R_x(c Lx) S,   L' = R_x(c Sx) L      (pre-kick Sx, Lx; both conserved)
    S'' = R_z(a) S',    L'' = R_z(a) L'

``R_n(alpha)`` is the active right-handed rotation by ``alpha`` about ``n``;
this is the sense in which ``<S>/j`` moves under the quantum Floquet operator.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels

POLE_EPS = 1e-9


def bloch_vector(theta, phi):
    """Unit vector at polar angle ``theta`` and azimuth ``phi``."""
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(st)], axis=-1)


@dataclass(frozen=True, eq=False)
class ClassicalState:
    S: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        for name in ("S", "L"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector (|{name}|={np.linalg.norm(v)})")
            object.__setattr__(self, name, v)

    @classmethod
    def from_angles(cls, angles):
        t1, p1, t2, p2 = angles
        return cls(bloch_vector(t1, p1), bloch_vector(t2, p2))

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:])

    def as_array(self):
        return np.concatenate([self.S, self.L])

    def angles(self):
        """``(theta1, phi1, theta2, phi2)`` with azimuths in ``[0, 2 pi)``."""
        out = []
        for v in (self.S, self.L):
            out += [np.arccos(np.clip(v[2], -1.0, 1.0)), np.mod(np.arctan2(v[1], v[0]), 2 * np.pi)]
        return tuple(out)


@dataclass(frozen=True)
class CanonicalPoint:
    """``(q, p) = (azimuth, z)`` for each top."""

    q1: float
    p1: float
    q2: float
    p2: float
    degenerate: bool = False

    def as_array(self):
        return np.array([self.q1, self.p1, self.q2, self.p2])


def _rot_x(v, alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]])


def _rot_z(v, alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]])


def kick_map(state, a, c):
    """One period of the map; returns a new ``ClassicalState``."""
    S, L = state.S, state.L
    S1 = _rot_z(_rot_x(S, c * L[0]), a)
    L1 = _rot_z(_rot_x(L, c * S[0]), a)
    return ClassicalState(S1 / np.linalg.norm(S1), L1 / np.linalg.norm(L1))


def inverse_kick_map(state, a, c):
    """Exact inverse of :func:`kick_map`.

    Undo the precession, then undo the kick; the x-components are unchanged by
    the kick so the post-kick values give the pre-kick rotation angles.
    """
    S, L = _rot_z(state.S, -a), _rot_z(state.L, -a)
    S0 = _rot_x(S, -c * L[0])
    L0 = _rot_x(L, -c * S[0])
    return ClassicalState(S0 / np.linalg.norm(S0), L0 / np.linalg.norm(L0))


def trajectory(state, a, c, n_steps):
    """``(n_steps + 1, 6)`` orbit ``(Sx, Sy, Sz, Lx, Ly, Lz)``."""
    x0 = state.as_array() if isinstance(state, ClassicalState) else np.asarray(state, dtype=float)
    return kernels.trajectory(np.ascontiguousarray(x0, dtype=float), float(a), float(c), int(n_steps))


def to_canonical(state):
    """Canonical coordinates; a pole (``|z| = 1``) is flagged and gets azimuth 0."""
    vals, degenerate = [], False
    for v in (state.S, state.L):
        if abs(v[2]) >= 1.0 - POLE_EPS or np.hypot(v[0], v[1]) == 0.0:
            degenerate = True
            q = 0.0
        else:
            q = float(np.mod(np.arctan2(v[1], v[0]), 2 * np.pi))
        vals += [q, float(np.clip(v[2], -1.0, 1.0))]
    return CanonicalPoint(*vals, degenerate=degenerate)


def from_canonical(point):
    if isinstance(point, CanonicalPoint):
        q1, p1, q2, p2 = point.as_array()
    else:
        q1, p1, q2, p2 = point
    out = []
    for q, p in ((q1, p1), (q2, p2)):
        if abs(p) > 1.0:
            raise ValueError(f"p must lie in [-1, 1], got {p}")
        s = np.sqrt(1.0 - p * p)
        out.append(np.array([s * np.cos(q), s * np.sin(q), p]))
    return ClassicalState(*out)


def random_centers(n, seed, min_sin=1e-3):
    """``n`` independent uniform points on the product of two spheres.

    Center ``p`` comes from its own stream seeded by ``(seed, p)``; draws with
    ``sin(theta) <= min_sin`` on either sphere are redrawn from that stream.
    Returns an ``(n, 4)`` array of ``(theta1, phi1, theta2, phi2)``.
    """
    out = np.empty((n, 4))
    for p in range(n):
        rng = np.random.default_rng([seed, p])
        while True:
            cos_t = rng.uniform(-1.0, 1.0, size=2)
            phi = rng.uniform(0.0, 2 * np.pi, size=2)
            if np.all(np.sqrt(1.0 - cos_t**2) > min_sin):
                break
        th = np.arccos(cos_t)
        out[p] = th[0], phi[0], th[1], phi[1]
    return out


def poincare_section(initial, a, c, n_steps, tol=0.01):
    """Section points ``(theta1, phi1, theta2)`` of one orbit at ``|phi2| < tol``.

    ``initial`` is ``(theta1, phi1, theta2, phi2)`` or a ``ClassicalState``.
    Points are taken at the stroboscopic instants only; an empty ``(0, 3)``
    array means the orbit never came within ``tol`` of the section.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    state = initial if isinstance(initial, ClassicalState) else ClassicalState.from_angles(initial)
    pts, _ = kernels.section(state.as_array(), float(a), float(c), int(n_steps), float(tol))
    theta1 = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
    phi1 = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    theta2 = np.arccos(np.clip(pts[:, 5], -1.0, 1.0))
    return np.column_stack([theta1, phi1, theta2])
