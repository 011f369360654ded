"""Monte-Carlo classical linear entropy of a Gaussian ensemble of kicked tops."""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .classical import bloch_vector, random_centers
from .quantum import EntropySeries

MIN_TRAJECTORIES = 1000
POLE_SIN = 1e-3
PHASE_SPACE_AREA = 4 * math.pi


def _rng(seed):
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(list(seed))
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GaussianEnsembleSpec:
    """Gaussian cloud ``exp(-dtheta^2/hbar_c - sin^2(theta) dphi^2/hbar_c)`` on each sphere."""

    center: tuple
    hbar_c: float
    n_traj: int
    seed: object = 0

    def __post_init__(self):
        if not self.hbar_c > 0:
            raise ValueError("hbar_c must be positive")
        if self.n_traj < MIN_TRAJECTORIES:
            raise ValueError(f"n_traj must be >= {MIN_TRAJECTORIES} for an entropy estimate")
        t1, _, t2, _ = self.center
        if min(abs(math.sin(t1)), abs(math.sin(t2))) <= POLE_SIN:
            raise ValueError(
                f"center {self.center} is within sin(theta) <= {POLE_SIN} of a pole; "
                "the azimuthal width diverges there, pick a center away from the poles"
            )


@dataclass
class Ensemble:
    S: np.ndarray  # (n, 3)
    L: np.ndarray  # (n, 3)

    def __len__(self):
        return self.S.shape[0]

    def copy(self):
        return Ensemble(self.S.copy(), self.L.copy())


def sample_angles(spec):
    """``(n_traj, 4)`` draws of ``(theta1, phi1, theta2, phi2)``.

    The exponent ``-x^2 / hbar_c`` means variance ``hbar_c / 2`` for ``theta``
    and ``hbar_c / (2 sin^2 theta)`` for ``phi``.
    """
    rng = _rng(spec.seed)
    sd = math.sqrt(spec.hbar_c / 2)
    out = np.empty((spec.n_traj, 4))
    for k in (0, 1):
        theta, phi = spec.center[2 * k], spec.center[2 * k + 1]
        out[:, 2 * k] = rng.normal(theta, sd, spec.n_traj)
        out[:, 2 * k + 1] = rng.normal(phi, sd / abs(math.sin(theta)), spec.n_traj)
    return out


def sample_ensemble(spec):
    """Draw the ensemble as unit vectors; angles outside their range wrap naturally."""
    ang = sample_angles(spec)
    S = np.ascontiguousarray(bloch_vector(ang[:, 0], ang[:, 1]))
    L = np.ascontiguousarray(bloch_vector(ang[:, 2], ang[:, 3]))
    return Ensemble(S, L)


def initial_shape_matrix(center):
    """Symplectic ``G`` with initial canonical covariance ``(hbar_c / 2) G G^T``.

    With ``p = cos(theta)`` the cloud has ``sd(q) = sd / sin(theta)`` and
    ``sd(p) = sd * sin(theta)``.
    """
    s1, s2 = abs(math.sin(center[0])), abs(math.sin(center[2]))
    return np.diag([1 / s1, s1, 1 / s2, s2])


def evolve_ensemble(ensemble, a, c, t):
    """Return a copy of ``ensemble`` after ``t`` kicks."""
    out = ensemble.copy()
    if t:
        kernels.evolve_many(out.S, out.L, float(a), float(c), int(t))
    return out


@dataclass
class MarginalHistogram:
    """Sparse counts of system-1 samples on an ``n_q x n_p`` grid of ``[0, 2pi) x [-1, 1]``."""

    n_q: int
    n_p: int
    cells: np.ndarray  # flat index iq * n_p + ip of occupied cells
    counts: np.ndarray
    n_total: int

    @property
    def cell_area(self):
        return (2 * math.pi / self.n_q) * (2.0 / self.n_p)

    def dense(self):
        out = np.zeros(self.n_q * self.n_p, dtype=np.int64)
        out[self.cells] = self.counts
        return out.reshape(self.n_q, self.n_p)

    def density(self):
        return self.dense() / (self.n_total * self.cell_area)


def marginal_histogram(samples, grid=(2000, 2000)):
    """Histogram of ``(q1, p1)`` over the full system-1 phase space.

    ``samples`` is an :class:`Ensemble` or an ``(n, 3)`` array of system-1 vectors.
    """
    S = samples.S if isinstance(samples, Ensemble) else np.asarray(samples, dtype=float)
    n_q, n_p = (int(g) for g in grid)
    if n_q < 1 or n_p < 1:
        raise ValueError("grid dimensions must be positive")
    q = np.mod(np.arctan2(S[:, 1], S[:, 0]), 2 * math.pi)
    iq = np.minimum((q * (n_q / (2 * math.pi))).astype(np.int64), n_q - 1)
    ip = np.clip(((S[:, 2] + 1.0) * (n_p / 2.0)).astype(np.int64), 0, n_p - 1)
    cells, counts = np.unique(iq * n_p + ip, return_counts=True)
    return MarginalHistogram(n_q, n_p, cells, counts, S.shape[0])


def classical_linear_entropy(hist, unbiased=True):
    """``-ln`` of the cell-sum estimate of the integral of the squared marginal density.

    ``unbiased`` drops self-pairs: ``sum c (c - 1) / (N (N - 1) dA)``.
    """
    n = hist.n_total
    if n < 2:
        raise ValueError("need at least two samples")
    c = hist.counts.astype(np.float64)
    if unbiased:
        s2 = np.sum(c * (c - 1.0)) / (n * (n - 1.0) * hist.cell_area)
    else:
        s2 = np.sum(c * c) / (n * float(n) * hist.cell_area)
    if s2 <= 0:
        raise ValueError("no grid cell holds two samples; increase n_traj or coarsen the grid")
    return -math.log(s2)


def classical_entropy_series(center, a, c, hbar_c, n_steps, n_traj, grid, seed):
    """Cell-sum linear entropy of one ensemble after 0..n_steps kicks."""
    ens = sample_ensemble(GaussianEnsembleSpec(tuple(center), hbar_c, n_traj, seed))
    out = np.empty(n_steps + 1)
    for t in range(n_steps + 1):
        if t:
            kernels.evolve_many(ens.S, ens.L, float(a), float(c), 1)
        out[t] = classical_linear_entropy(marginal_histogram(ens.S, grid))
    return out


def averaged_classical_entropy(a, c, hbar_c, n_steps, n_centers=16, n_traj=10**5, grid=(2000, 2000), seed=0,
                               centers=None):
    """Classical linear entropy averaged over ``n_centers`` Gaussian ensembles.

    Centers follow :func:`random_centers` (identical to the quantum runs for the
    same seed); ensemble ``p`` draws from the stream ``(seed, p, 1)``.
    """
    if centers is None:
        centers = random_centers(n_centers, seed, min_sin=POLE_SIN)
    centers = np.asarray(centers, dtype=float).reshape(-1, 4)
    per = np.array([
        classical_entropy_series(cen, a, c, hbar_c, n_steps, n_traj, grid, (seed, p, 1))
        for p, cen in enumerate(centers)
    ])
    meta = dict(kind="classical", a=a, c=c, hbar_c=hbar_c, n_centers=len(centers), n_traj=n_traj,
                grid=list(grid), seed=seed)
    return EntropySeries(np.arange(n_steps + 1), per.mean(axis=0), meta)
