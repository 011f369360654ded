import math

import numpy as np
import pytest

from entangle_ks.ensemble import (
    Ensemble,
    GaussianEnsembleSpec,
    MarginalHistogram,
    averaged_classical_entropy,
    classical_entropy_series,
    classical_linear_entropy,
    evolve_ensemble,
    initial_shape_matrix,
    marginal_histogram,
    sample_angles,
    sample_ensemble,
)
from entangle_ks.tangent import SYMPLECTIC_J

CENTER = (1.0, 0.3, 2.1, 4.0)


def test_sample_moments():
    spec = GaussianEnsembleSpec(CENTER, 2e-3, 200_000, seed=1)
    ang = sample_angles(spec)
    assert np.allclose(ang.mean(axis=0), CENTER, atol=3e-3)
    var = ang.var(axis=0)
    expect = [1e-3, 1e-3 / math.sin(1.0) ** 2, 1e-3, 1e-3 / math.sin(2.1) ** 2]
    assert np.allclose(var, expect, rtol=0.02)


def test_sampling_is_deterministic_per_seed():
    a = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-2, 2000, seed=(3, 1)))
    b = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-2, 2000, seed=(3, 1)))
    c = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-2, 2000, seed=(3, 2)))
    assert np.array_equal(a.S, b.S) and np.array_equal(a.L, b.L)
    assert not np.array_equal(a.S, c.S)
    assert np.allclose(np.linalg.norm(a.S, axis=1), 1.0)


@pytest.mark.parametrize("kw,match", [
    (dict(center=(1e-4, 0.0, 1.0, 0.0), hbar_c=1e-3, n_traj=1000), "pole"),
    (dict(center=CENTER, hbar_c=1e-3, n_traj=999), "n_traj"),
    (dict(center=CENTER, hbar_c=0.0, n_traj=1000), "hbar_c"),
])
def test_spec_validation(kw, match):
    with pytest.raises(ValueError, match=match):
        GaussianEnsembleSpec(**kw)


def test_uniform_sphere_gives_ln_4pi():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(1_000_000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    s = classical_linear_entropy(marginal_histogram(v, (100, 100)))
    assert abs(s - math.log(4 * math.pi)) < 0.01


def test_single_cell_gives_ln_cell_area():
    v = np.tile([0.6, 0.0, 0.8], (5000, 1))
    h = marginal_histogram(v, (50, 40))
    assert len(h.cells) == 1
    assert np.isclose(classical_linear_entropy(h), math.log(h.cell_area))


def test_fresh_gaussian_matches_analytic_purity():
    hbar = 1e-3
    ens = sample_ensemble(GaussianEnsembleSpec(CENTER, hbar, 100_000, seed=0))
    s = classical_linear_entropy(marginal_histogram(ens, (2000, 2000)))
    assert abs(s - math.log(2 * math.pi * hbar)) < 0.05


def test_bias_correction_matters_for_sparse_samples():
    ens = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-3, 5000, seed=0))
    h = marginal_histogram(ens, (2000, 2000))
    target = math.log(2 * math.pi * 1e-3)
    # with few samples per cell the naive sum overcounts self-pairs
    assert abs(classical_linear_entropy(h) - target) < abs(classical_linear_entropy(h, unbiased=False) - target)


def test_no_collisions_raise():
    h = MarginalHistogram(10, 10, np.array([0, 1]), np.array([1, 1]), 2)
    with pytest.raises(ValueError, match="two samples"):
        classical_linear_entropy(h)


def test_histogram_density_normalized():
    ens = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-2, 20_000, seed=2))
    h = marginal_histogram(ens, (300, 200))
    assert h.dense().sum() == 20_000
    assert np.isclose(h.density().sum() * h.cell_area, 1.0)
    with pytest.raises(ValueError):
        marginal_histogram(ens, (0, 10))


def test_evolve_ensemble_returns_copy():
    ens = sample_ensemble(GaussianEnsembleSpec(CENTER, 1e-2, 2000, seed=0))
    before = ens.S.copy()
    out = evolve_ensemble(ens, 5.0, 3.0, 3)
    assert np.array_equal(ens.S, before)
    assert not np.allclose(out.S, before)
    assert isinstance(out, Ensemble) and len(out) == 2000


def test_shape_matrix_is_symplectic():
    G = initial_shape_matrix(CENTER)
    assert np.allclose(G.T @ SYMPLECTIC_J @ G, SYMPLECTIC_J)


def test_uncoupled_series_is_flat():
    s = classical_entropy_series(CENTER, 5.0, 0.0, 1e-3, 6, 100_000, (2000, 2000), 0)
    assert np.max(np.abs(s - math.log(2 * math.pi * 1e-3))) < 0.05


def test_averaged_series_uses_given_centers():
    centers = np.array([CENTER, (2.0, 1.0, 1.0, 5.0)])
    avg = averaged_classical_entropy(5.0, 3.0, 1e-2, 3, n_traj=5000, grid=(400, 400), seed=9, centers=centers)
    manual = np.mean([classical_entropy_series(c, 5.0, 3.0, 1e-2, 3, 5000, (400, 400), (9, p, 1))
                      for p, c in enumerate(centers)], axis=0)
    assert np.allclose(avg.values, manual)
    assert avg.meta["n_centers"] == 2
