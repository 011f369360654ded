import math
from contextlib import nullcontext

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entangle_ks.classical import ClassicalState, from_canonical, kick_map, to_canonical
from entangle_ks.tangent import (
    SYMPLECTIC_J,
    PoleError,
    _log_det_top_block,
    accumulate_stability,
    covariance_blocks,
    gaussian_entropy,
    iter_stability,
    jacobian_one_step,
    ks_growth_prediction,
    lyapunov_spectrum,
    random_symplectic,
    symplectic_defect,
)

CENTER = (1.0, 0.3, 2.1, 4.0)
angles = st.tuples(st.floats(0.2, np.pi - 0.2), st.floats(0, 2 * np.pi),
                   st.floats(0.2, np.pi - 0.2), st.floats(0, 2 * np.pi))


def canonical_map(z, a, c):
    return to_canonical(kick_map(from_canonical(z), a, c)).as_array()


def finite_difference(z, a, c, h=1e-6):
    J = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        d = canonical_map(z + e, a, c) - canonical_map(z - e, a, c)
        d[[0, 2]] = np.angle(np.exp(1j * d[[0, 2]]))  # azimuth differences across the 2pi cut
        J[:, k] = d / (2 * h)
    return J


@given(angles, st.floats(0, 2 * np.pi), st.floats(0, 5))
def test_jacobian_matches_finite_differences(ang, a, c):
    x = ClassicalState.from_angles(ang)
    J = jacobian_one_step(x, a, c)
    try:
        Jfd = finite_difference(to_canonical(x).as_array(), a, c)
    except ValueError:  # perturbed point left the chart
        return
    assert np.max(np.abs(J - Jfd)) <= 1e-5 * max(1.0, np.max(np.abs(J)))


@given(angles, st.floats(0, 2 * np.pi), st.floats(0, 6))
def test_jacobian_is_symplectic(ang, a, c):
    J = jacobian_one_step(ClassicalState.from_angles(ang), a, c)
    assert symplectic_defect(J) < 1e-10 * max(1.0, np.max(np.abs(J)) ** 2)


def test_pole_raises():
    with pytest.raises(PoleError):
        jacobian_one_step(ClassicalState.from_angles((0.0, 0.0, 1.0, 1.0)), 1.0, 1.0)


def test_uncoupled_jacobian_is_shear_free_rotation():
    # c=0: q += a, p fixed, so the Jacobian is the identity
    J = jacobian_one_step(ClassicalState.from_angles(CENTER), 0.9, 0.0)
    assert np.allclose(J, np.eye(4), atol=1e-12)


def test_qr_mode_reproduces_direct_product():
    x = ClassicalState.from_angles(CENTER)
    d = accumulate_stability(x, 5.0, 3.0, 15, mode="direct")
    q = accumulate_stability(x, 5.0, 3.0, 15, mode="qr")
    M = d.matrix()
    assert np.allclose(q.matrix(), M, rtol=1e-9, atol=1e-9 * np.max(np.abs(M)))
    assert np.allclose(q.base.as_array(), d.base.as_array())
    assert abs(q.log_abs_det()) < 1e-9 and abs(d.log_abs_det()) < 1e-6


def test_initial_matrix_is_right_multiplied():
    x = ClassicalState.from_angles(CENTER)
    G = np.diag([2.0, 0.5, 1.25, 0.8])
    plain = accumulate_stability(x, 5.0, 3.0, 6).matrix()
    assert np.allclose(accumulate_stability(x, 5.0, 3.0, 6, initial_matrix=G).matrix(), plain @ G)
    assert np.allclose(accumulate_stability(x, 5.0, 3.0, 6, mode="qr", initial_matrix=G).matrix(), plain @ G)


def test_iter_stability_yields_every_step():
    frames = list(iter_stability(ClassicalState.from_angles(CENTER), 5.0, 3.0, 5))
    assert [f.t for f in frames] == list(range(6))
    assert np.allclose(frames[0].matrix(), np.eye(4))
    assert np.allclose(frames[4].matrix(), accumulate_stability(ClassicalState.from_angles(CENTER), 5.0, 3.0, 4).matrix())


def test_direct_mode_refuses_overflow():
    with pytest.raises(OverflowError):
        accumulate_stability(ClassicalState.from_angles(CENTER), 5.0, 5.0, 200, mode="direct")
    frame = accumulate_stability(ClassicalState.from_angles(CENTER), 5.0, 5.0, 200, mode="qr")
    assert np.isfinite(covariance_blocks(frame).log_det_d)


def test_invalid_stability_arguments():
    x = ClassicalState.from_angles(CENTER)
    with pytest.raises(ValueError):
        accumulate_stability(x, 1.0, 1.0, -1)
    with pytest.raises(ValueError):
        accumulate_stability(x, 1.0, 1.0, 3, mode="svd")


def test_log_domain_top_block_matches_direct(rng):
    for _ in range(50):
        M = random_symplectic(rng, n_factors=4)
        Q, R = np.linalg.qr(M)
        s = np.sign(np.diag(R))
        Q, R = Q * s, s[:, None] * R
        lr = np.log(np.diag(R))
        direct = np.linalg.slogdet((M @ M.T)[:2, :2])[1]
        assert np.isclose(_log_det_top_block(Q, lr, R / np.diag(R)[:, None]), direct, rtol=1e-9, atol=1e-9)


def test_log_det_d_agrees_between_modes():
    x = ClassicalState.from_angles(CENTER)
    for t in (1, 5, 12):
        d = covariance_blocks(accumulate_stability(x, 5.0, 3.0, t)).log_det_d
        q = covariance_blocks(accumulate_stability(x, 5.0, 3.0, t, mode="qr")).log_det_d
        assert np.isclose(d, q, rtol=1e-8, atol=1e-8)


def test_covariance_blocks_identities(rng):
    M = random_symplectic(rng)
    b = covariance_blocks(M)
    assert np.isclose(np.linalg.det(b.A), 1.0)
    assert np.isclose(np.linalg.det(b.d_hat) * np.linalg.det(b.a_tilde), 1.0)
    assert np.allclose(b.A, b.A.T)


def test_gaussian_entropy_at_identity():
    assert np.isclose(gaussian_entropy(covariance_blocks(np.eye(4)), 1e-3), math.log(2 * math.pi * 1e-3))
    with pytest.raises(ValueError):
        gaussian_entropy(covariance_blocks(np.eye(4)), 0.0)


def test_uncoupled_dynamics_keeps_entropy_flat():
    x = ClassicalState.from_angles(CENTER)
    for frame in iter_stability(x, 5.0, 0.0, 20):
        # without coupling A never reaches system 2, which the overlap check reports
        with pytest.warns(RuntimeWarning) if frame.t else nullcontext():
            assert abs(covariance_blocks(frame).log_det_d) < 1e-10


def test_lyapunov_pairing_and_positive_rates():
    spec = lyapunov_spectrum(CENTER, 5.0, 3.0, n_steps=100_000, n_transient=1000)
    assert np.all(np.diff(spec.lambdas) <= 0)
    assert spec.lambdas[0] > 0.3 and spec.lambdas[1] > 0.1
    sums, se = spec.pairing()
    assert np.all(np.abs(sums) <= 3 * se + 1e-12)
    assert np.isclose(spec.ks_entropy, spec.lambdas[0] + spec.lambdas[1])
    assert np.allclose(ks_growth_prediction(spec, [0, 2]), [0, 2 * spec.ks_entropy])


def test_lyapunov_is_deterministic():
    a = lyapunov_spectrum(CENTER, 5.0, 3.0, n_steps=5000, n_transient=10)
    b = lyapunov_spectrum(CENTER, 5.0, 3.0, n_steps=5000, n_transient=10)
    assert np.array_equal(a.lambdas, b.lambdas)


def test_lyapunov_zero_without_coupling():
    spec = lyapunov_spectrum(CENTER, 5.0, 0.0, n_steps=10_000, n_transient=0)
    assert np.max(np.abs(spec.lambdas)) < 1e-3
    assert spec.ks_entropy < 1e-3


def test_lyapunov_rejects_bad_lengths():
    with pytest.raises(ValueError):
        lyapunov_spectrum(CENTER, 5.0, 3.0, n_steps=0)


def test_benettin_near_pole_needs_no_reseed():
    spec = lyapunov_spectrum((1e-7, 0.0, 2.0, 1.0), 5.0, 3.0, n_steps=20_000, n_transient=0)
    assert np.all(np.isfinite(spec.lambdas))


def test_random_symplectic_is_symplectic(rng):
    for _ in range(20):
        M = random_symplectic(rng)
        assert np.allclose(M.T @ SYMPLECTIC_J @ M, SYMPLECTIC_J, atol=1e-9 * max(1.0, np.max(np.abs(M)) ** 2))
