"""Diagnostics shared by the run modes and the acceptance suite."""

import math

import numpy as np

from ..classical import ClassicalState
from ..ensemble import (
    GaussianEnsembleSpec,
    classical_linear_entropy,
    initial_shape_matrix,
    marginal_histogram,
    sample_ensemble,
)
from .._backend import kernels
from ..tangent import covariance_blocks, gaussian_entropy, iter_stability


def ehrenfest_time(hbar, lambda1):
    """Logarithmic estimate ``ln(1/hbar) / lambda1``; infinite without instability."""
    return math.log(1.0 / hbar) / lambda1 if lambda1 > 0 else math.inf


def agreement_time(t, s_q, s_cl, tol=0.25):
    """Last ``t`` up to which the offset-subtracted series stay within ``tol``."""
    t = np.asarray(t)
    d = np.abs((np.asarray(s_q) - s_q[0]) - (np.asarray(s_cl) - s_cl[0]))
    bad = np.nonzero(d > tol)[0]
    if len(bad) == 0:
        return int(t[-1])
    return int(t[bad[0] - 1]) if bad[0] > 0 else -1


def occupied_fraction(points, bins=50):
    """Fraction of a ``bins**3`` grid over ``[0,pi] x [0,2pi) x [0,pi]`` holding a section point."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        return 0.0
    spans = np.array([math.pi, 2 * math.pi, math.pi])
    idx = np.clip((points / spans * bins).astype(np.int64), 0, bins - 1)
    flat = (idx[:, 0] * bins + idx[:, 1]) * bins + idx[:, 2]
    return len(np.unique(flat)) / bins**3


def cloud_diameter(ens, center, quantile=0.99):
    """Twice the ``quantile`` of sample distances (R^6) from the evolved center."""
    x = np.hstack([ens.S, ens.L])
    r = np.linalg.norm(x - center[None, :], axis=1)
    return 2.0 * float(np.quantile(r, quantile))


def gaussian_vs_histogram(center, a, c, hbar_c, n_steps, n_traj=100_000, grid=(2000, 2000), seed=0):
    """Analytic Gaussian entropy and the cell-sum estimate along one ensemble.

    The analytic side uses ``M_t G``, where ``G`` maps the isotropic Gaussian
    onto the sampled initial cloud. Returns a dict of arrays indexed by ``t``.
    """
    state = ClassicalState.from_angles(center)
    ens = sample_ensemble(GaussianEnsembleSpec(tuple(center), hbar_c, n_traj, seed))
    G = initial_shape_matrix(center)
    out = {k: np.empty(n_steps + 1) for k in ("gaussian", "histogram", "diameter", "log_det_d")}
    for t, frame in enumerate(iter_stability(state, a, c, n_steps, initial_matrix=G)):
        if t:
            kernels.evolve_many(ens.S, ens.L, float(a), float(c), 1)
        blocks = covariance_blocks(frame)
        out["log_det_d"][t] = blocks.log_det_d
        out["gaussian"][t] = gaussian_entropy(blocks, hbar_c)
        out["histogram"][t] = classical_linear_entropy(marginal_histogram(ens.S, grid))
        out["diameter"][t] = cloud_diameter(ens, frame.base.as_array())
    out["t"] = np.arange(n_steps + 1)
    return out
