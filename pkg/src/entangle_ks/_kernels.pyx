# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the classical kicked-tops map.

State layout everywhere is a 6-vector ``(Sx, Sy, Sz, Lx, Ly, Lz)``.
Signatures mirror :mod:`entangle_ks._pykernels` exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, log, atan2, fabs, M_PI

cnp.import_array()


cdef inline void _step(double* x, double ca, double sa, double c) noexcept nogil:
    cdef double al = c * x[3]
    cdef double be = c * x[0]
    cdef double cal = cos(al), sal = sin(al), cbe = cos(be), sbe = sin(be)
    cdef double sy = x[1] * cal - x[2] * sal
    cdef double sz = x[1] * sal + x[2] * cal
    cdef double ly = x[4] * cbe - x[5] * sbe
    cdef double lz = x[4] * sbe + x[5] * cbe
    cdef double sx = x[0], lx = x[3]
    cdef double nx, ny
    nx = ca * sx - sa * sy
    ny = sa * sx + ca * sy
    cdef double r = 1.0 / sqrt(nx * nx + ny * ny + sz * sz)
    x[0] = nx * r
    x[1] = ny * r
    x[2] = sz * r
    nx = ca * lx - sa * ly
    ny = sa * lx + ca * ly
    r = 1.0 / sqrt(nx * nx + ny * ny + lz * lz)
    x[3] = nx * r
    x[4] = ny * r
    x[5] = lz * r


def evolve_many(double[:, ::1] S, double[:, ::1] L, double a, double c, Py_ssize_t n_steps):
    """Advance every row of ``S``/``L`` by ``n_steps`` kicks, in place."""
    cdef Py_ssize_t n = S.shape[0], i, t
    cdef double ca = cos(a), sa = sin(a)
    cdef double x[6]
    if L.shape[0] != n:
        raise ValueError("S and L must have the same number of rows")
    with nogil:
        for i in range(n):
            x[0] = S[i, 0]; x[1] = S[i, 1]; x[2] = S[i, 2]
            x[3] = L[i, 0]; x[4] = L[i, 1]; x[5] = L[i, 2]
            for t in range(n_steps):
                _step(x, ca, sa, c)
            S[i, 0] = x[0]; S[i, 1] = x[1]; S[i, 2] = x[2]
            L[i, 0] = x[3]; L[i, 1] = x[4]; L[i, 2] = x[5]


def trajectory(double[::1] x0, double a, double c, Py_ssize_t n_steps):
    """Return the ``(n_steps + 1, 6)`` stroboscopic orbit starting at ``x0``."""
    out = np.empty((n_steps + 1, 6), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double ca = cos(a), sa = sin(a)
    cdef double x[6]
    cdef Py_ssize_t t, k
    for k in range(6):
        x[k] = x0[k]
        o[0, k] = x0[k]
    with nogil:
        for t in range(1, n_steps + 1):
            _step(x, ca, sa, c)
            for k in range(6):
                o[t, k] = x[k]
    return out


def section(double[::1] x0, double a, double c, Py_ssize_t n_steps, double tol):
    """States (and kick indices) of the orbit whose second azimuth is within ``tol`` of 0."""
    cdef double ca = cos(a), sa = sin(a)
    cdef double x[6]
    cdef Py_ssize_t t, k, m = 0, cap = 1024
    cdef double phi2
    buf = np.empty((cap, 6), dtype=np.float64)
    idx = np.empty(cap, dtype=np.int64)
    cdef double[:, ::1] b = buf
    cdef long long[::1] ix = idx
    for k in range(6):
        x[k] = x0[k]
    for t in range(n_steps + 1):
        if t > 0:
            _step(x, ca, sa, c)
        phi2 = atan2(x[4], x[3])
        if fabs(phi2) < tol:
            if m == cap:
                cap *= 2
                buf = np.resize(buf, (cap, 6))
                idx = np.resize(idx, cap)
                b = buf
                ix = idx
            for k in range(6):
                b[m, k] = x[k]
            ix[m] = t
            m += 1
    return buf[:m].copy(), idx[:m].copy()


cdef inline void _tangent(const double* x, double* v, double cal, double sal,
                          double cbe, double sbe, double ca, double sa, double c) noexcept nogil:
    # x is the PRE-kick state, v a single 6-d tangent vector updated in place.
    cdef double sy = x[1] * cal - x[2] * sal
    cdef double sz = x[1] * sal + x[2] * cal
    cdef double ly = x[4] * cbe - x[5] * sbe
    cdef double lz = x[4] * sbe + x[5] * cbe
    cdef double dsx = v[0], dlx = v[3]
    cdef double dsy = v[1] * cal - v[2] * sal - c * dlx * sz
    cdef double dsz = v[1] * sal + v[2] * cal + c * dlx * sy
    cdef double dly = v[4] * cbe - v[5] * sbe - c * dsx * lz
    cdef double dlz = v[4] * sbe + v[5] * cbe + c * dsx * ly
    v[0] = ca * dsx - sa * dsy
    v[1] = sa * dsx + ca * dsy
    v[2] = dsz
    v[3] = ca * dlx - sa * dly
    v[4] = sa * dlx + ca * dly
    v[5] = dlz


cdef inline void _project(const double* x, double* v) noexcept nogil:
    cdef double p = v[0] * x[0] + v[1] * x[1] + v[2] * x[2]
    v[0] -= p * x[0]; v[1] -= p * x[1]; v[2] -= p * x[2]
    p = v[3] * x[3] + v[4] * x[4] + v[5] * x[5]
    v[3] -= p * x[3]; v[4] -= p * x[4]; v[5] -= p * x[5]


def benettin(double[::1] x0, double[:, ::1] Q0, double a, double c,
             Py_ssize_t n_transient, Py_ssize_t n_steps, Py_ssize_t n_blocks):
    """Benettin QR iteration of a 4-column tangent frame embedded in R^6.

    Returns ``(block_logs, x_final, Q_final)`` where ``block_logs[b, k]`` is the
    summed ``log R_kk`` over the b-th of ``n_blocks`` equal blocks of the
    measured (post-transient) steps.
    """
    if n_blocks < 1 or n_steps < n_blocks:
        raise ValueError("need 1 <= n_blocks <= n_steps")
    logs = np.zeros((n_blocks, 4), dtype=np.float64)
    cdef double[:, ::1] lg = logs
    cdef double ca = cos(a), sa = sin(a)
    cdef double x[6]
    cdef double q[4][6]
    cdef double al, be, cal, sal, cbe, sbe, dot, nrm
    cdef Py_ssize_t t, i, k, m, blk, per = n_steps // n_blocks
    for k in range(6):
        x[k] = x0[k]
        for i in range(4):
            q[i][k] = Q0[k, i]
    with nogil:
        for t in range(n_transient + n_steps):
            al = c * x[3]
            be = c * x[0]
            cal = cos(al); sal = sin(al); cbe = cos(be); sbe = sin(be)
            for i in range(4):
                _tangent(x, q[i], cal, sal, cbe, sbe, ca, sa, c)
            _step(x, ca, sa, c)
            for i in range(4):
                _project(x, q[i])
                for m in range(i):
                    dot = 0.0
                    for k in range(6):
                        dot = dot + q[i][k] * q[m][k]
                    for k in range(6):
                        q[i][k] -= dot * q[m][k]
                nrm = 0.0
                for k in range(6):
                    nrm = nrm + q[i][k] * q[i][k]
                nrm = sqrt(nrm)
                for k in range(6):
                    q[i][k] /= nrm
                if t >= n_transient:
                    blk = (t - n_transient) // per
                    if blk >= n_blocks:
                        blk = n_blocks - 1
                    lg[blk, i] += log(nrm)
    xf = np.empty(6, dtype=np.float64)
    Qf = np.empty((6, 4), dtype=np.float64)
    for k in range(6):
        xf[k] = x[k]
        for i in range(4):
            Qf[k, i] = q[i][k]
    return logs, xf, Qf
