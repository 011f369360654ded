"""Pure numpy implementation of the classical-map inner loops.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or ``ENTANGLE_KS_BACKEND=python`` is set.
"""

import math

import numpy as np

# Jacobians multiplied together before each re-orthonormalization in the
# fallback Benettin loop; keeps growth per chunk far below overflow for c <~ 10.
_CHUNK = 8
_SEGMENT = 1 << 14


def _step_arrays(S, L, ca, sa, c):
    al = c * L[..., 0]
    be = c * S[..., 0]
    cal, sal, cbe, sbe = np.cos(al), np.sin(al), np.cos(be), np.sin(be)
    sy = S[..., 1] * cal - S[..., 2] * sal
    sz = S[..., 1] * sal + S[..., 2] * cal
    ly = L[..., 1] * cbe - L[..., 2] * sbe
    lz = L[..., 1] * sbe + L[..., 2] * cbe
    S2 = np.stack([ca * S[..., 0] - sa * sy, sa * S[..., 0] + ca * sy, sz], axis=-1)
    L2 = np.stack([ca * L[..., 0] - sa * ly, sa * L[..., 0] + ca * ly, lz], axis=-1)
    S2 /= np.linalg.norm(S2, axis=-1, keepdims=True)
    L2 /= np.linalg.norm(L2, axis=-1, keepdims=True)
    return S2, L2


def _step(x, ca, sa, c):
    sx, sy0, sz0, lx, ly0, lz0 = x
    al, be = c * lx, c * sx
    cal, sal, cbe, sbe = math.cos(al), math.sin(al), math.cos(be), math.sin(be)
    sy = sy0 * cal - sz0 * sal
    sz = sy0 * sal + sz0 * cal
    ly = ly0 * cbe - lz0 * sbe
    lz = ly0 * sbe + lz0 * cbe
    nx, ny = ca * sx - sa * sy, sa * sx + ca * sy
    r = 1.0 / math.sqrt(nx * nx + ny * ny + sz * sz)
    mx, my = ca * lx - sa * ly, sa * lx + ca * ly
    s = 1.0 / math.sqrt(mx * mx + my * my + lz * lz)
    return (nx * r, ny * r, sz * r, mx * s, my * s, lz * s)


def evolve_many(S, L, a, c, n_steps):
    if S.shape[0] != L.shape[0]:
        raise ValueError("S and L must have the same number of rows")
    ca, sa = math.cos(a), math.sin(a)
    s, l = S, L
    for _ in range(n_steps):
        s, l = _step_arrays(s, l, ca, sa, c)
    S[...] = s
    L[...] = l


def trajectory(x0, a, c, n_steps):
    ca, sa = math.cos(a), math.sin(a)
    out = np.empty((n_steps + 1, 6))
    x = tuple(float(v) for v in x0)
    out[0] = x
    for t in range(1, n_steps + 1):
        x = _step(x, ca, sa, c)
        out[t] = x
    return out


def section(x0, a, c, n_steps, tol):
    x = np.array(x0, dtype=float)
    hit0 = abs(math.atan2(x[4], x[3])) < tol
    pts = [x[None]] if hit0 else []
    idx = [np.zeros(1, dtype=np.int64)] if hit0 else []
    t0 = 0
    while t0 < n_steps:
        n = min(_SEGMENT, n_steps - t0)
        orbit = trajectory(x, a, c, n)[1:]
        hit = np.abs(np.arctan2(orbit[:, 4], orbit[:, 3])) < tol
        pts.append(orbit[hit])
        idx.append(np.nonzero(hit)[0].astype(np.int64) + t0 + 1)
        x = orbit[-1]
        t0 += n
    if not pts:
        return np.empty((0, 6)), np.empty(0, dtype=np.int64)
    return np.concatenate(pts), np.concatenate(idx)


def _jacobians(xs, a, c):
    """6x6 Cartesian Jacobians of one kick at each pre-kick state in ``xs``."""
    n = xs.shape[0]
    ca, sa = math.cos(a), math.sin(a)
    al, be = c * xs[:, 3], c * xs[:, 0]
    cal, sal, cbe, sbe = np.cos(al), np.sin(al), np.cos(be), np.sin(be)
    sy = xs[:, 1] * cal - xs[:, 2] * sal
    sz = xs[:, 1] * sal + xs[:, 2] * cal
    ly = xs[:, 4] * cbe - xs[:, 5] * sbe
    lz = xs[:, 4] * sbe + xs[:, 5] * cbe
    K = np.zeros((n, 6, 6))
    K[:, 0, 0] = 1.0
    K[:, 1, 1], K[:, 1, 2], K[:, 1, 3] = cal, -sal, -c * sz
    K[:, 2, 1], K[:, 2, 2], K[:, 2, 3] = sal, cal, c * sy
    K[:, 3, 3] = 1.0
    K[:, 4, 4], K[:, 4, 5], K[:, 4, 0] = cbe, -sbe, -c * lz
    K[:, 5, 4], K[:, 5, 5], K[:, 5, 0] = sbe, cbe, c * ly
    Rz = np.zeros((6, 6))
    Rz[0, :2] = Rz[3, 3:5] = (ca, -sa)
    Rz[1, :2] = Rz[4, 3:5] = (sa, ca)
    Rz[2, 2] = Rz[5, 5] = 1.0
    return Rz @ K


def _project(x, Q):
    for k in (0, 3):
        u = x[k:k + 3]
        Q[k:k + 3] -= np.outer(u, u @ Q[k:k + 3])
    return Q


def benettin(x0, Q0, a, c, n_transient, n_steps, n_blocks):
    if n_blocks < 1 or n_steps < n_blocks:
        raise ValueError("need 1 <= n_blocks <= n_steps")
    logs = np.zeros((n_blocks, 4))
    per = n_steps // n_blocks
    x = np.array(x0, dtype=float)
    Q = np.array(Q0, dtype=float)
    total = n_transient + n_steps
    t = 0
    while t < total:
        n = min(_SEGMENT, total - t)
        orbit = trajectory(x, a, c, n)
        jac = _jacobians(orbit[:-1], a, c)
        i = 0
        while i < n:
            # chunks never straddle the transient boundary or a block boundary
            stop = min(i + _CHUNK, n)
            g = t + i
            if g < n_transient:
                stop = min(stop, i + n_transient - g)
            else:
                blk = min((g - n_transient) // per, n_blocks - 1)
                if blk < n_blocks - 1:
                    stop = min(stop, i + n_transient + (blk + 1) * per - g)
            P = jac[i]
            for k in range(i + 1, stop):
                P = jac[k] @ P
            Q, R = np.linalg.qr(_project(orbit[stop], P @ Q))
            d = np.diag(R)
            sign = np.where(d < 0, -1.0, 1.0)
            Q = Q * sign
            if g >= n_transient:
                logs[blk] += np.log(np.abs(d))
            i = stop
        x = orbit[-1]
        t += n
    return logs, x, Q
