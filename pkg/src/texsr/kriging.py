"""Exact conditional super-resolution of Gaussian microtextures.

Given a texture model with covariance ``Gamma = C_t C_t^T`` (``C_t`` the
periodic convolution with the texton) and a zoom-out operator
``A = S C_c`` (blur then subsample), the best linear predictor of the
high-resolution field from its degraded observation solves

    (A Gamma A^T) Lambda = A Gamma.

Because every factor is a circular convolution or a regular subsampling,
``A Gamma A^T`` is itself a circular convolution on the low-resolution
grid — by the kernel obtained by subsampling ``t * flip(t) * c *
flip(c)`` — so the system diagonalizes in the Fourier domain and the
whole predictor collapses to one low-resolution kernel inversion with a
relative cutoff.  A conditional sample is then

    sample = Lambda^T u_lr          (kriging component, + mean)
           + (I - Lambda^T A) t*w   (innovation component)

with fresh white noise ``w``.  The decomposition is exact: re-degrading
the sample reproduces ``u_lr`` to machine precision, and the
innovation's covariance is exactly the conditional covariance of the
model.

Colour models are handled channel by channel — each channel gets its own
predictor, while one shared noise image drives the three innovations.
This is an approximation of the jointly optimal colour predictor (the
iterative reference in :mod:`texsr.cgd` computes the exact one) but it
keeps the closed form and reproduces cross-channel correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from . import grid, operators
from .adsn import AdsnModel, white_noise
from .errors import (
    AllFrequenciesZeroed,
    DegenerateModel,
    DimensionMismatch,
)
from .operators import DegradationOperator

__all__ = [
    "KrigingKernel",
    "SrSample",
    "StabilityReport",
    "lr_covariance_kernel",
    "pseudo_inverse_kernel",
    "kriging_kernel",
    "apply_kriging",
    "sr_sample",
    "stability_check",
]

#: default relative cutoff under which a Fourier coefficient of the
#: low-resolution covariance kernel is treated as exactly zero
DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class KrigingKernel:
    """Precomputed spectrum of the kriging predictor.

    ``apply_kriging`` realizes ``Lambda^T v`` as ``idft2(spectrum *
    dft2(upsample_adjoint(v)))`` channel by channel.

    Attributes
    ----------
    spectrum : ndarray of complex128, shape (C, M, N)
        High-resolution spectrum of the predictor kernel, one plane per
        channel.
    stride : int
        Zoom factor the kernel was built for.
    tolerance : float
        Relative cutoff used when inverting the low-resolution
        covariance kernel.
    zeroed_frequencies : int
        Number of low-resolution frequencies (summed over channels)
        whose covariance coefficient fell below the cutoff and was
        pseudo-inverted to 0.
    """

    spectrum: np.ndarray
    stride: int
    tolerance: float
    zeroed_frequencies: int

    @property
    def channels(self) -> int:
        return self.spectrum.shape[0]

    @property
    def hr_shape(self) -> tuple[int, int]:
        return self.spectrum.shape[-2], self.spectrum.shape[-1]


@dataclass(frozen=True)
class SrSample:
    """One conditional super-resolution draw.

    ``sample == kriging_component + innovation_component`` holds
    bit-exactly: the sample is constructed as that sum.  The channel
    means (estimated from the observed low-resolution image) are
    carried by the kriging component; the innovation is zero-mean.
    """

    sample: np.ndarray
    kriging_component: np.ndarray
    innovation_component: np.ndarray
    seed: int


@dataclass(frozen=True)
class StabilityReport:
    """Norms of one sensitivity probe ``Lambda^T A (t * w)``.

    The predictor never amplifies the texture field: ``lhs`` is bounded
    by the texton's largest spectral gain times ``||w||`` which in turn
    is bounded by ``||t||_1 ||w||``.
    """

    lhs: float
    bound_operator: float
    bound_l1: float


def lr_covariance_kernel(texton: np.ndarray, op: DegradationOperator) -> np.ndarray:
    """Covariance kernel of the degraded field on the low-resolution grid.

    Computes ``subsample(t * flip(t) * c * flip(c), r)``, the circular
    kernel through which ``A Gamma A^T`` acts.  Its spectrum is real and
    non-negative.
    """
    t = np.asarray(texton, dtype=float)
    if t.ndim != 2:
        raise DimensionMismatch(f"texton must be 2-D, got shape {t.shape}")
    if t.shape != op.hr_shape:
        raise DimensionMismatch(
            f"texton grid {t.shape} does not match operator grid {op.hr_shape}"
        )
    t_hat = scipy.fft.fft2(t)
    g_hat = (t_hat.real**2 + t_hat.imag**2) * (
        op.kernel_spectrum.real**2 + op.kernel_spectrum.imag**2
    )
    g = scipy.fft.ifft2(g_hat).real
    return grid.subsample(g, op.stride)


def pseudo_inverse_kernel(
    kernel: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> tuple[np.ndarray, int]:
    """Fourier-domain pseudo-inverse of a circular convolution kernel.

    Every Fourier coefficient with modulus at most ``epsilon`` times the
    largest modulus is mapped to 0; the others are inverted.

    Returns
    -------
    (kernel_dagger, zeroed) : (ndarray, int)
        The pseudo-inverse kernel on the same grid and the number of
        zeroed frequencies.

    Raises
    ------
    AllFrequenciesZeroed
        If the kernel is identically zero in the Fourier domain, i.e.
        the pseudo-inverse carries no information at all.
    """
    k = np.asarray(kernel, dtype=float)
    if k.ndim != 2:
        raise DimensionMismatch(f"kernel must be 2-D, got shape {k.shape}")
    k_hat = scipy.fft.fft2(k)
    mag = np.abs(k_hat)
    peak = float(mag.max())
    if peak == 0.0:
        raise AllFrequenciesZeroed(
            "kernel spectrum is identically zero; nothing to invert"
        )
    keep = mag > float(epsilon) * peak
    inv = np.zeros_like(k_hat)
    np.divide(1.0, k_hat, out=inv, where=keep)
    zeroed = int(k.size - np.count_nonzero(keep))
    return grid.idft2(inv), zeroed


def kriging_kernel(
    model: AdsnModel,
    op: DegradationOperator,
    epsilon: float = DEFAULT_EPSILON,
) -> KrigingKernel:
    """Solve the kriging system in closed form.

    Builds, channel by channel, the high-resolution kernel whose
    convolution with the zero-filled upsampled observation realizes the
    optimal predictor:

        lambda = t * flip(t) * flip(c) * upsample_adjoint(kappa_dagger)

    where ``kappa_dagger`` is the cutoff pseudo-inverse of
    :func:`lr_covariance_kernel`.  Only the spectrum is stored.

    An identically-zero texton is the well-defined limit of the model:
    its channel gets an all-zero predictor kernel (the observation
    constrains nothing, and there is nothing to predict).

    Raises
    ------
    DegenerateModel
        When a channel's texton is nonzero yet its low-resolution
        covariance kernel vanishes identically — the texture is
        invisible to the degradation, so no predictor exists for that
        channel.
    """
    if model.grid_shape != op.hr_shape:
        raise DimensionMismatch(
            f"model grid {model.grid_shape} does not match operator grid "
            f"{op.hr_shape}"
        )
    r = op.stride
    spectra = np.empty(
        (model.channels,) + op.hr_shape, dtype=complex
    )
    zeroed = 0
    for ch in range(model.channels):
        t = model.textons[ch]
        if not np.any(t):
            spectra[ch] = 0.0
            continue
        kappa = lr_covariance_kernel(t, op)
        try:
            kappa_dagger, n_zero = pseudo_inverse_kernel(kappa, epsilon)
        except AllFrequenciesZeroed as exc:
            raise DegenerateModel(
                f"channel {ch}: degraded-field covariance is identically "
                f"zero although the texton is not; the texture is "
                f"invisible to this degradation"
            ) from exc
        zeroed += n_zero
        t_hat = scipy.fft.fft2(t)
        power = t_hat.real**2 + t_hat.imag**2
        dagger_hat = scipy.fft.fft2(kappa_dagger)
        # spectrum of upsample_adjoint(kappa_dagger) is the LR spectrum
        # tiled r x r times over the HR frequency grid
        spectra[ch] = power * np.conj(op.kernel_spectrum) * np.tile(dagger_hat, (r, r))
    return KrigingKernel(
        spectrum=spectra, stride=r, tolerance=float(epsilon), zeroed_frequencies=zeroed
    )


def _as_lr_planes(kern: KrigingKernel, v: np.ndarray) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=float)
    squeeze = v.ndim == 2
    if squeeze:
        v = v[np.newaxis]
    if v.ndim != 3 or v.shape[0] != kern.channels:
        raise DimensionMismatch(
            f"expected {kern.channels} low-resolution plane(s), got shape {v.shape}"
        )
    m, n = kern.hr_shape
    r = kern.stride
    if v.shape[-2:] != (m // r, n // r):
        raise DimensionMismatch(
            f"low-resolution grid {v.shape[-2:]} does not match "
            f"{(m // r, n // r)} for stride {r}"
        )
    return v, squeeze


def apply_kriging(kern: KrigingKernel, v: np.ndarray) -> np.ndarray:
    """Apply the predictor ``Lambda^T`` to low-resolution plane(s).

    Linear, no mean handling: feed zero-mean data.  Accepts ``(m, n)``
    for single-channel kernels or ``(C, m, n)`` matching the kernel's
    channel count.
    """
    v, squeeze = _as_lr_planes(kern, v)
    up = grid.upsample_adjoint(v, kern.stride)
    out = scipy.fft.ifft2(
        kern.spectrum * scipy.fft.fft2(up, axes=(-2, -1)), axes=(-2, -1)
    ).real
    return out[0] if squeeze else out


def sr_sample(
    model: AdsnModel,
    u_lr: np.ndarray,
    op: DegradationOperator,
    seed: int,
    epsilon: float = DEFAULT_EPSILON,
    kernel: KrigingKernel | None = None,
) -> SrSample:
    """Draw one conditional super-resolution sample.

    Parameters
    ----------
    model : AdsnModel
        Texture model on the high-resolution grid.
    u_lr : ndarray
        Observed low-resolution image, ``(m, n)`` or ``(3, m, n)``
        matching the model's channel count.
    op : DegradationOperator
        The degradation that produced ``u_lr``.
    seed : int
        Noise seed for the innovation; identical seeds give identical
        samples.
    epsilon : float
        Relative cutoff for the covariance inversion (ignored when
        ``kernel`` is supplied).
    kernel : KrigingKernel, optional
        Reuse a precomputed predictor when drawing several samples for
        the same model and operator.

    Returns
    -------
    SrSample
        With the channel means of ``u_lr`` carried by the kriging
        component, and ``sample = kriging_component +
        innovation_component`` exactly.

    Notes
    -----
    A degenerate model (no usable covariance) does not raise here: the
    observation constrains nothing, so the sample falls back to the
    mean image with zero innovation.
    """
    mdl_m, mdl_n = model.grid_shape
    if (mdl_m, mdl_n) != op.hr_shape:
        raise DimensionMismatch(
            f"model grid {model.grid_shape} does not match operator grid "
            f"{op.hr_shape}"
        )
    v = np.asarray(u_lr, dtype=float)
    squeeze = v.ndim == 2
    if squeeze:
        v = v[np.newaxis]
    if v.ndim != 3 or v.shape[0] != model.channels or v.shape[-2:] != op.lr_shape:
        raise DimensionMismatch(
            f"low-resolution image shape {np.asarray(u_lr).shape} does not match "
            f"model channels {model.channels} and operator grid {op.lr_shape}"
        )

    means = v.mean(axis=(-2, -1))
    mean_image = np.broadcast_to(
        means[:, np.newaxis, np.newaxis], (model.channels, mdl_m, mdl_n)
    )

    if kernel is None:
        try:
            kernel = kriging_kernel(model, op, epsilon)
        except DegenerateModel:
            krig = mean_image.copy()
            innov = np.zeros_like(krig)
            samp = krig + innov
            if squeeze:
                krig, innov, samp = krig[0], innov[0], samp[0]
            return SrSample(
                sample=samp,
                kriging_component=krig,
                innovation_component=innov,
                seed=int(seed),
            )
    elif kernel.channels != model.channels or kernel.hr_shape != (mdl_m, mdl_n):
        raise DimensionMismatch(
            "supplied kriging kernel does not match the model grid/channels"
        )

    w = white_noise(seed, mdl_m, mdl_n)
    w_hat = scipy.fft.fft2(w)
    t_hat = scipy.fft.fft2(model.textons, axes=(-2, -1))
    texture = scipy.fft.ifft2(t_hat * w_hat, axes=(-2, -1)).real
    degraded_texture = grid.subsample(
        scipy.fft.ifft2(
            t_hat * w_hat * op.kernel_spectrum, axes=(-2, -1)
        ).real,
        op.stride,
    )

    krig = apply_kriging(kernel, v - means[:, np.newaxis, np.newaxis]) + mean_image
    innov = texture - apply_kriging(kernel, degraded_texture)
    samp = krig + innov
    if squeeze:
        krig, innov, samp = krig[0], innov[0], samp[0]
    return SrSample(
        sample=samp,
        kriging_component=krig,
        innovation_component=innov,
        seed=int(seed),
    )


def stability_check(
    model: AdsnModel | np.ndarray,
    op: DegradationOperator,
    seed: int,
    epsilon: float = DEFAULT_EPSILON,
) -> StabilityReport:
    """Probe the no-amplification bound of the predictor.

    Draws ``w`` from ``seed``, pushes the texture field ``t * w``
    through degradation and prediction, and reports

        lhs   = || Lambda^T A (t * w) ||_2
        b_op  = max_w |dft2(t)| * ||w||_2
        b_l1  = ||t||_1 * ||w||_2

    which always satisfy ``lhs <= b_op <= b_l1`` (up to rounding).

    ``model`` may be a grayscale :class:`AdsnModel` or a bare 2-D texton
    array.
    """
    if isinstance(model, AdsnModel):
        if model.channels != 1:
            raise DimensionMismatch(
                f"stability probe is grayscale-only, got {model.channels} channels"
            )
        t = model.textons[0]
    else:
        t = np.asarray(model, dtype=float)
    if t.ndim != 2:
        raise DimensionMismatch(f"texton must be 2-D, got shape {t.shape}")
    model = AdsnModel(textons=t[np.newaxis], means=np.zeros(1))
    kern = kriging_kernel(model, op, epsilon)
    w = white_noise(seed, *op.hr_shape)
    field = grid.circular_convolve(t, w)
    predicted = apply_kriging(kern, operators.apply(op, field))
    w_norm = float(np.linalg.norm(w))
    return StabilityReport(
        lhs=float(np.linalg.norm(predicted)),
        bound_operator=float(np.abs(scipy.fft.fft2(t)).max()) * w_norm,
        bound_l1=float(np.abs(t).sum()) * w_norm,
    )
