"""Tests for the closed-form conditional sampler: low-resolution
covariance kernel, Fourier pseudo-inverse, predictor construction and
application, conditional draws, and the stability probe."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from texsr.adsn import AdsnModel, adsn_sample, white_noise
from texsr.errors import AllFrequenciesZeroed, DegenerateModel, DimensionMismatch
from texsr.grid import circular_convolve, flip, subsample
from texsr.kriging import (
    KrigingKernel,
    apply_kriging,
    kriging_kernel,
    lr_covariance_kernel,
    pseudo_inverse_kernel,
    sr_sample,
    stability_check,
)
from texsr.operators import apply, bicubic_operator, custom_operator

from .oracles import (
    dense_degradation,
    dense_gamma,
    dense_kriging_transpose,
    flatten,
    unflatten,
)


def _delta(m, n):
    d = np.zeros((m, n))
    d[0, 0] = 1.0
    return d


def _smooth_floor_texton(rng, m, n, floor=0.05):
    """Random texton with a spectral noise floor (keeps kappa well
    conditioned, so the Fourier cutoff and the SVD cutoff agree)."""
    x1 = np.arange(m)[:, None]
    x2 = np.arange(n)[None, :]
    d1 = np.minimum(x1, m - x1)
    d2 = np.minimum(x2, n - x2)
    bump = np.exp(-(d1**2 + d2**2) / (2.0 * 1.5**2))
    bump /= bump.sum()
    t = circular_convolve(bump, rng.normal(size=(m, n)))
    t[0, 0] += floor
    return t


def _alias_cosine_texton(m, n):
    """Concentrates all texture energy on the alias frequency (m/2, 0),
    which every mean-preserving stride-2 kernel maps to zero."""
    return ((-1.0) ** np.arange(m))[:, None] * np.ones((1, n))


# -------------------------------------------------- lr_covariance_kernel


def test_lr_covariance_delta_texton_identity_operator():
    op = custom_operator(np.array([[1.0]]), (0, 0), 1, 4, 4)
    kappa = lr_covariance_kernel(_delta(4, 4), op)
    assert_allclose(kappa, _delta(4, 4), atol=1e-12)


def test_lr_covariance_zero_texton_is_zero():
    op = bicubic_operator(8, 8, 2)
    assert_array_equal(lr_covariance_kernel(np.zeros((8, 8)), op), np.zeros((4, 4)))


def test_lr_covariance_matches_dense_matrix_column():
    rng = np.random.default_rng(400)
    t = rng.normal(size=(8, 8))
    op = bicubic_operator(8, 8, 2)
    kappa = lr_covariance_kernel(t, op)
    a = dense_degradation(op.kernel, 2)
    b = a @ dense_gamma(t) @ a.T
    # column 0 of the circulant operator B is the kernel itself
    assert_allclose(kappa, unflatten(b[:, 0], 4, 4), atol=1e-10)


def test_lr_covariance_spectrum_real_nonnegative():
    rng = np.random.default_rng(401)
    t = rng.normal(size=(8, 12))
    op = bicubic_operator(8, 12, 2)
    kappa_hat = np.fft.fft2(lr_covariance_kernel(t, op))
    assert np.abs(kappa_hat.imag).max() <= 1e-10 * np.abs(kappa_hat).max()
    assert kappa_hat.real.min() >= -1e-10 * np.abs(kappa_hat).max()


def test_lr_covariance_rejects_mismatched_texton():
    op = bicubic_operator(8, 8, 2)
    with pytest.raises(DimensionMismatch):
        lr_covariance_kernel(np.zeros((6, 6)), op)


# ------------------------------------------------- pseudo_inverse_kernel


def test_pseudo_inverse_of_delta_is_delta():
    inv, zeroed = pseudo_inverse_kernel(_delta(4, 4))
    assert_allclose(inv, _delta(4, 4), atol=1e-12)
    assert zeroed == 0


def test_pseudo_inverse_of_scaled_delta_divides():
    inv, zeroed = pseudo_inverse_kernel(2.0 * _delta(4, 4))
    assert_allclose(inv, 0.5 * _delta(4, 4), atol=1e-12)
    assert zeroed == 0


def test_pseudo_inverse_inverts_positive_spectrum_kernel():
    rng = np.random.default_rng(402)
    a = rng.normal(size=(4, 4))
    kappa = circular_convolve(a, flip(a)) + 0.3 * _delta(4, 4)
    inv, zeroed = pseudo_inverse_kernel(kappa)
    assert zeroed == 0
    assert_allclose(circular_convolve(kappa, inv), _delta(4, 4), atol=1e-9)


def test_pseudo_inverse_counts_zeroed_frequencies():
    # a pure cosine kernel carries exactly two nonzero coefficients
    kappa = np.cos(2 * np.pi * np.arange(4) / 4)[:, None] * np.ones((1, 4))
    inv, zeroed = pseudo_inverse_kernel(kappa)
    assert zeroed == 14
    recon = circular_convolve(kappa, inv)
    # on the surviving two frequencies the inversion is exact
    assert_allclose(np.fft.fft2(recon)[1, 0], 1.0, atol=1e-9)
    assert_allclose(np.fft.fft2(recon)[3, 0], 1.0, atol=1e-9)


def test_pseudo_inverse_zero_kernel_raises():
    with pytest.raises(AllFrequenciesZeroed):
        pseudo_inverse_kernel(np.zeros((4, 4)))


# ---------------------------------------------------------- kriging_kernel


def test_kriging_kernel_unit_stride_inverts_exactly():
    # r = 1, c = delta: the predictor is the inverse of the identity
    # degradation, i.e. the identity itself, for any invertible-spectrum
    # texton.
    op = custom_operator(np.array([[1.0]]), (0, 0), 1, 6, 6)
    t = _delta(6, 6) + 0.3 * np.roll(_delta(6, 6), (1, 2), axis=(0, 1))
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    assert_allclose(kern.spectrum[0], np.ones((6, 6)), atol=1e-9)
    rng = np.random.default_rng(403)
    v = rng.normal(size=(6, 6))
    assert_allclose(apply_kriging(kern, v), v, atol=1e-9)


def test_kriging_kernel_zero_texton_gives_zero_predictor():
    op = bicubic_operator(8, 8, 2)
    model = AdsnModel(textons=np.zeros((1, 8, 8)), means=np.zeros(1))
    kern = kriging_kernel(model, op)
    assert_array_equal(kern.spectrum[0], np.zeros((8, 8), dtype=complex))
    rng = np.random.default_rng(404)
    assert_array_equal(apply_kriging(kern, rng.normal(size=(4, 4))), np.zeros((8, 8)))


def test_kriging_kernel_invisible_texture_raises_degenerate():
    op = bicubic_operator(8, 8, 2)
    t = _alias_cosine_texton(8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    with pytest.raises(DegenerateModel):
        kriging_kernel(model, op)


def test_kriging_kernel_metadata():
    rng = np.random.default_rng(405)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op, epsilon=1e-10)
    assert kern.stride == 2
    assert kern.tolerance == 1e-10
    assert kern.channels == 1
    assert kern.hr_shape == (8, 8)
    assert kern.zeroed_frequencies == 0


def test_kriging_kernel_rejects_mismatched_grids():
    op = bicubic_operator(8, 8, 2)
    model = AdsnModel(textons=np.zeros((1, 6, 6)), means=np.zeros(1))
    with pytest.raises(DimensionMismatch):
        kriging_kernel(model, op)


def test_apply_kriging_matches_dense_svd_predictor():
    rng = np.random.default_rng(406)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    dense = dense_kriging_transpose(t, op.kernel, 2)
    for _ in range(5):
        v = rng.normal(size=(4, 4))
        expected = unflatten(dense @ flatten(v), 8, 8)
        got = apply_kriging(kern, v)
        assert np.linalg.norm(got - expected) <= 1e-7 * np.linalg.norm(expected)


# ------------------------------------------------------------ apply_kriging


def test_apply_kriging_zero_input_gives_zero():
    rng = np.random.default_rng(407)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    assert_array_equal(apply_kriging(kern, np.zeros((4, 4))), np.zeros((8, 8)))


def test_apply_kriging_identity_kernel_unit_stride():
    kern = KrigingKernel(
        spectrum=np.ones((1, 4, 4), dtype=complex),
        stride=1,
        tolerance=1e-12,
        zeroed_frequencies=0,
    )
    rng = np.random.default_rng(408)
    v = rng.normal(size=(4, 4))
    assert_allclose(apply_kriging(kern, v), v, atol=1e-12)


def test_apply_kriging_rejects_wrong_shapes():
    kern = KrigingKernel(
        spectrum=np.ones((1, 8, 8), dtype=complex),
        stride=2,
        tolerance=1e-12,
        zeroed_frequencies=0,
    )
    with pytest.raises(DimensionMismatch):
        apply_kriging(kern, np.zeros((8, 8)))  # HR-sized input
    with pytest.raises(DimensionMismatch):
        apply_kriging(kern, np.zeros((2, 4, 4)))  # wrong channel count


# ------------------------------------------- operator identities


def test_kriging_equation_residual_via_ffts():
    # A Gamma A^T Lambda = A Gamma, probed on random HR images using
    # only FFT compositions.
    rng = np.random.default_rng(409)
    op = bicubic_operator(16, 16, 2)
    t = _smooth_floor_texton(rng, 16, 16)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    lam = np.real(np.fft.ifft2(kern.spectrum[0]))
    kappa = lr_covariance_kernel(t, op)
    gamma_kernel = circular_convolve(t, flip(t))
    for _ in range(3):
        p = rng.normal(size=(16, 16))
        lambda_p = subsample(circular_convolve(flip(lam), p), 2)
        lhs = circular_convolve(kappa, lambda_p)
        rhs = apply(op, circular_convolve(gamma_kernel, p))
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)


def test_kriging_projects_onto_observed_textures():
    # On observations of in-model textures, A Lambda^T is the identity.
    rng = np.random.default_rng(410)
    op = bicubic_operator(16, 16, 2)
    t = _smooth_floor_texton(rng, 16, 16)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    v = apply(op, circular_convolve(t, white_noise(7, 16, 16)))
    back = apply(op, apply_kriging(kern, v))
    assert np.linalg.norm(back - v) <= 1e-8 * np.linalg.norm(v)


# ---------------------------------------------------------------- sr_sample


def test_sr_sample_lr_consistency():
    rng = np.random.default_rng(411)
    op = bicubic_operator(16, 16, 2)
    t = _smooth_floor_texton(rng, 16, 16)
    model = AdsnModel(textons=t[np.newaxis], means=np.array([60.0]))
    u_lr = apply(op, adsn_sample(model, 5))
    out = sr_sample(model, u_lr, op, seed=42)
    err = np.linalg.norm(apply(op, out.sample) - u_lr)
    assert err <= 1e-6 * np.linalg.norm(u_lr)


def test_sr_sample_zero_texton_returns_constant():
    op = bicubic_operator(8, 8, 2)
    model = AdsnModel(textons=np.zeros((1, 8, 8)), means=np.array([3.0]))
    out = sr_sample(model, np.full((4, 4), 7.25), op, seed=0)
    assert_allclose(out.sample, np.full((8, 8), 7.25), atol=1e-12)
    assert_allclose(out.innovation_component, np.zeros((8, 8)), atol=1e-12)


def test_sr_sample_degenerate_model_falls_back_to_mean():
    op = bicubic_operator(8, 8, 2)
    t = _alias_cosine_texton(8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    rng = np.random.default_rng(412)
    u_lr = rng.normal(size=(4, 4)) + 11.0
    out = sr_sample(model, u_lr, op, seed=3)
    assert_allclose(out.sample, np.full((8, 8), u_lr.mean()), atol=1e-12)
    assert_array_equal(out.innovation_component, np.zeros((8, 8)))


def test_sr_sample_matches_dense_decomposition():
    rng = np.random.default_rng(413)
    op = bicubic_operator(16, 16, 2)
    t = _smooth_floor_texton(rng, 16, 16)
    model = AdsnModel(textons=t[np.newaxis], means=np.array([100.0]))
    u_lr = apply(op, adsn_sample(model, 11))
    seed = 99
    out = sr_sample(model, u_lr, op, seed=seed)

    dense = dense_kriging_transpose(t, op.kernel, 2)
    mean = u_lr.mean()
    krig_o = mean + unflatten(dense @ flatten(u_lr - mean), 16, 16)
    texture = circular_convolve(t, white_noise(seed, 16, 16))
    innov_o = texture - unflatten(dense @ flatten(apply(op, texture)), 16, 16)

    scale = np.linalg.norm(out.sample)
    assert np.linalg.norm(out.kriging_component - krig_o) <= 1e-7 * scale
    assert np.linalg.norm(out.innovation_component - innov_o) <= 1e-7 * scale
    assert np.linalg.norm(out.sample - (krig_o + innov_o)) <= 1e-7 * scale


def test_sr_sample_components_sum_bit_exactly():
    rng = np.random.default_rng(414)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    out = sr_sample(model, rng.normal(size=(4, 4)), op, seed=17)
    assert_array_equal(out.sample, out.kriging_component + out.innovation_component)
    assert out.seed == 17


def test_sr_sample_deterministic_in_seed():
    rng = np.random.default_rng(415)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    u_lr = rng.normal(size=(4, 4))
    a = sr_sample(model, u_lr, op, seed=5)
    b = sr_sample(model, u_lr, op, seed=5)
    c = sr_sample(model, u_lr, op, seed=6)
    assert_array_equal(a.sample, b.sample)
    assert np.linalg.norm(a.sample - c.sample) > 1e-6


def test_sr_sample_reuses_precomputed_kernel():
    rng = np.random.default_rng(416)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op)
    u_lr = rng.normal(size=(4, 4))
    a = sr_sample(model, u_lr, op, seed=8)
    b = sr_sample(model, u_lr, op, seed=8, kernel=kern)
    assert_array_equal(a.sample, b.sample)


def test_sr_sample_innovation_annihilated_by_degradation():
    rng = np.random.default_rng(417)
    op = bicubic_operator(16, 16, 2)
    t = _smooth_floor_texton(rng, 16, 16)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    out = sr_sample(model, rng.normal(size=(8, 8)), op, seed=23)
    innov = out.innovation_component
    assert np.linalg.norm(apply(op, innov)) <= 1e-8 * np.linalg.norm(innov)


def test_sr_sample_mean_carried_by_kriging_component():
    rng = np.random.default_rng(418)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    u_lr = rng.normal(size=(4, 4)) + 40.0
    out = sr_sample(model, u_lr, op, seed=2)
    assert abs(out.kriging_component.mean() - u_lr.mean()) <= 1e-10 * abs(u_lr.mean())


def test_sr_sample_rgb_shares_one_noise_image():
    rng = np.random.default_rng(419)
    op = bicubic_operator(8, 8, 2)
    t = np.stack([_smooth_floor_texton(rng, 8, 8) for _ in range(3)])
    model = AdsnModel(textons=t, means=np.zeros(3))
    u_lr = rng.normal(size=(3, 4, 4))
    seed = 31
    out = sr_sample(model, u_lr, op, seed=seed)
    assert out.sample.shape == (3, 8, 8)
    kern = kriging_kernel(model, op)
    w = white_noise(seed, 8, 8)
    for ch in range(3):
        texture = circular_convolve(t[ch], w)
        innov = texture - apply_kriging(
            KrigingKernel(
                spectrum=kern.spectrum[ch : ch + 1],
                stride=2,
                tolerance=kern.tolerance,
                zeroed_frequencies=0,
            ),
            apply(op, texture),
        )
        assert_allclose(out.innovation_component[ch], innov, atol=1e-10)


def test_sr_sample_rejects_shape_mismatches():
    op = bicubic_operator(8, 8, 2)
    model = AdsnModel(textons=np.zeros((1, 8, 8)), means=np.zeros(1))
    with pytest.raises(DimensionMismatch):
        sr_sample(model, np.zeros((8, 8)), op, seed=0)  # HR-sized input
    with pytest.raises(DimensionMismatch):
        sr_sample(model, np.zeros((3, 4, 4)), op, seed=0)  # channel mismatch
    other = AdsnModel(textons=np.zeros((1, 6, 6)), means=np.zeros(1))
    with pytest.raises(DimensionMismatch):
        sr_sample(other, np.zeros((3, 3)), op, seed=0)  # model/operator grids


# ---------------------------------------------------------- stability_check


def test_stability_delta_texton_bounds_are_noise_norm():
    op = bicubic_operator(8, 8, 2)
    rep = stability_check(_delta(8, 8), op, seed=1)
    w_norm = float(np.linalg.norm(white_noise(1, 8, 8)))
    assert rep.lhs <= w_norm * (1 + 1e-9)
    assert_allclose(rep.bound_operator, w_norm, rtol=1e-12)
    assert_allclose(rep.bound_l1, w_norm, rtol=1e-12)


def test_stability_zero_texton_all_zero():
    op = bicubic_operator(8, 8, 2)
    rep = stability_check(np.zeros((8, 8)), op, seed=4)
    assert rep.lhs == 0.0
    assert rep.bound_operator == 0.0
    assert rep.bound_l1 == 0.0


def test_stability_accepts_grayscale_model():
    rng = np.random.default_rng(420)
    op = bicubic_operator(8, 8, 2)
    t = _smooth_floor_texton(rng, 8, 8)
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    a = stability_check(model, op, seed=9)
    b = stability_check(t, op, seed=9)
    assert a == b
    rgb = AdsnModel(textons=np.zeros((3, 8, 8)), means=np.zeros(3))
    with pytest.raises(DimensionMismatch):
        stability_check(rgb, op, seed=0)


def test_stability_inequality_chain_on_random_draws():
    rng = np.random.default_rng(421)
    for trial in range(20):
        r = 2 if trial % 2 == 0 else 4
        op = bicubic_operator(16, 16, r)
        t = rng.normal(size=(16, 16)) * rng.uniform(0.1, 2.0)
        rep = stability_check(t, op, seed=trial)
        slack = 1e-9 * max(rep.bound_l1, 1.0)
        assert rep.lhs <= rep.bound_operator + slack
        assert rep.bound_operator <= rep.bound_l1 + slack
