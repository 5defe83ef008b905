"""Quality metrics and variance analysis for super-resolved textures.

Two kinds of tools live here.  The plain fidelity metrics (MSE, PSNR,
SSIM, and the re-degradation PSNR that measures consistency with the
observed low-resolution image) treat images as data; the peak value is
always explicit and never inferred from the data range.  The variance
tools exploit the model: the per-pixel variance of the conditional
sampler has a closed form, is periodic with the zoom period, and
decomposes the expected reconstruction error into a deterministic
kriging part plus the innovation's total variance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft

from . import grid, operators
from .adsn import AdsnModel, _as_planes
from .errors import DegenerateModel, DimensionMismatch, InsufficientSamples
from .kriging import (
    DEFAULT_EPSILON,
    KrigingKernel,
    apply_kriging,
    kriging_kernel,
)
from .operators import DegradationOperator

__all__ = [
    "MetricsReport",
    "VarianceMap",
    "mse",
    "psnr",
    "lr_psnr",
    "ssim",
    "metrics_report",
    "theoretical_variance_map",
    "empirical_variance_map",
    "mse_decomposition",
]


def _pair(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(
            f"images have different shapes: {u.shape} vs {v.shape}"
        )
    return u, v


def mse(u: np.ndarray, v: np.ndarray) -> float:
    """Mean squared error over all pixels (and channels)."""
    u, v = _pair(u, v)
    d = u - v
    return float(np.mean(d * d))


def psnr(u: np.ndarray, v: np.ndarray, peak: float) -> float:
    """Peak signal-to-noise ratio ``10 log10(peak^2 / mse)`` in dB.

    ``peak`` must be given explicitly (255 for 8-bit-scaled data, 1.0
    for unit-scaled).  Identical images give ``inf``.
    """
    peak = float(peak)
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    err = mse(u, v)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / err))


def lr_psnr(u_sr: np.ndarray, u_lr: np.ndarray, op: DegradationOperator,
            peak: float) -> float:
    """PSNR between the re-degraded reconstruction and the observation.

    ``psnr(A u_sr, u_lr, peak)`` — the exactness certificate of the
    conditional sampler: for an exact sampler this is limited only by
    arithmetic (and file) precision.
    """
    u_sr = np.asarray(u_sr, dtype=float)
    return psnr(operators.apply(op, u_sr), u_lr, peak)


def _gaussian_window_kernel(m: int, n: int, window: int, sigma: float) -> np.ndarray:
    """Periodically embedded, mass-1 Gaussian window centered at 0."""
    half = window // 2
    off = np.arange(-half, window - half)
    g = np.exp(-(off**2) / (2.0 * sigma * sigma))
    g /= g.sum()
    kern = np.zeros((m, n))
    np.add.at(
        kern,
        (np.mod(off, m)[:, np.newaxis], np.mod(off, n)[np.newaxis, :]),
        np.outer(g, g),
    )
    return kern


def ssim(u: np.ndarray, v: np.ndarray, peak: float, window: int = 11,
         sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity with Gaussian windows on the
    periodic domain.

    Local statistics are computed with a circular ``window x window``
    Gaussian (std ``sigma``) so no boundary cropping occurs; the
    returned value is the map mean, averaged over channels for colour
    input.  Stabilizers are ``(k1*peak)^2`` and ``(k2*peak)^2``.
    """
    u, v = _pair(u, v)
    peak = float(peak)
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    m, n = u.shape[-2], u.shape[-1]
    kern = _gaussian_window_kernel(m, n, window, sigma)
    k_hat = scipy.fft.fft2(kern)

    def smooth(x):
        return scipy.fft.ifft2(
            scipy.fft.fft2(x, axes=(-2, -1)) * k_hat, axes=(-2, -1)
        ).real

    mu_u = smooth(u)
    mu_v = smooth(v)
    var_u = smooth(u * u) - mu_u * mu_u
    var_v = smooth(v * v) - mu_v * mu_v
    cov = smooth(u * v) - mu_u * mu_v
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    num = (2.0 * mu_u * mu_v + c1) * (2.0 * cov + c2)
    den = (mu_u * mu_u + mu_v * mu_v + c1) * (var_u + var_v + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class MetricsReport:
    """Flat bundle of fidelity numbers for one reconstruction."""

    mse: float
    psnr: float
    ssim: float
    lr_psnr: float | None
    per_channel: dict

    def as_dict(self) -> dict:
        out = {"mse": self.mse, "psnr": self.psnr, "ssim": self.ssim}
        if self.lr_psnr is not None:
            out["lr_psnr"] = self.lr_psnr
        for name, values in self.per_channel.items():
            for ch, value in enumerate(values):
                out[f"{name}_channel_{ch}"] = value
        return out


def metrics_report(u: np.ndarray, reference: np.ndarray, peak: float,
                   op: DegradationOperator | None = None) -> MetricsReport:
    """All metrics of ``u`` against ``reference`` in one report.

    When ``op`` is given, ``lr_psnr`` compares the re-degraded ``u``
    against the re-degraded reference (identical to comparing against
    the original observation whenever the observation was produced by
    the same operator).  Per-channel values are included for colour
    input.
    """
    u_p = _as_planes(u, "image")
    ref_p = _as_planes(reference, "reference image")
    if u_p.shape != ref_p.shape:
        raise DimensionMismatch(
            f"images have different shapes: {u_p.shape} vs {ref_p.shape}"
        )
    per_channel: dict = {}
    if u_p.shape[0] > 1:
        per_channel = {
            "mse": tuple(mse(a, b) for a, b in zip(u_p, ref_p)),
            "psnr": tuple(psnr(a, b, peak) for a, b in zip(u_p, ref_p)),
            "ssim": tuple(ssim(a, b, peak) for a, b in zip(u_p, ref_p)),
        }
    lr = None
    if op is not None:
        lr = lr_psnr(u_p, operators.apply(op, ref_p), op, peak)
    return MetricsReport(
        mse=mse(u_p, ref_p),
        psnr=psnr(u_p, ref_p, peak),
        ssim=float(np.mean([ssim(a, b, peak) for a, b in zip(u_p, ref_p)])),
        lr_psnr=lr,
        per_channel=per_channel,
    )


@dataclass(frozen=True)
class VarianceMap:
    """Per-pixel variance of the conditional sampler.

    ``per_channel`` has shape (C, M, N); ``total`` sums the channels
    (for grayscale the two coincide).  ``mode`` records whether the map
    is the closed-form one or a Monte-Carlo estimate over
    ``sample_count`` draws.
    """

    per_channel: np.ndarray
    mode: str
    sample_count: int | None = None

    @property
    def total(self) -> np.ndarray:
        return self.per_channel.sum(axis=0)


def theoretical_variance_map(
    model: AdsnModel,
    op: DegradationOperator,
    kernel: KrigingKernel | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> VarianceMap:
    """Closed-form per-pixel variance of the conditional sample.

    The sampler's law is invariant under translations by the zoom
    period, so the map takes at most ``r x r`` distinct values.  For
    each phase representative ``x`` the variance is the squared norm of
    the row kernel ``flip(t) * (delta_x - A^T Lambda delta_x)``,
    evaluated with FFT pipelines; the value is then broadcast to the
    whole phase class, making the result exactly periodic.

    Channels are reported separately (each channel's innovation is a
    linear image of the shared noise, so its variance does not depend
    on the sharing); sum them via ``VarianceMap.total``.

    A degenerate model (texture invisible to the degradation) gives the
    zero map: the sampler then falls back to the deterministic mean
    image.
    """
    if model.grid_shape != op.hr_shape:
        raise DimensionMismatch(
            f"model grid {model.grid_shape} does not match operator grid "
            f"{op.hr_shape}"
        )
    if kernel is None:
        try:
            kernel = kriging_kernel(model, op, epsilon)
        except DegenerateModel:
            # the sampler falls back to the deterministic mean image, so
            # the conditional variance is zero everywhere
            return VarianceMap(
                per_channel=np.zeros((model.channels,) + model.grid_shape),
                mode="theoretical",
            )
    if kernel.channels != model.channels or kernel.hr_shape != model.grid_shape:
        raise DimensionMismatch(
            "kriging kernel does not match the model grid/channels"
        )
    m, n = model.grid_shape
    r = op.stride
    values = np.empty((model.channels, m, n))
    for ch in range(model.channels):
        pred_flip_hat = np.conj(kernel.spectrum[ch])
        t_flip = grid.flip(model.textons[ch])
        for p1 in range(r):
            for p2 in range(r):
                delta = np.zeros((m, n))
                delta[p1, p2] = 1.0
                # Lambda delta = subsample(flip(lambda) * delta, r)
                lam_delta = grid.subsample(
                    scipy.fft.ifft2(pred_flip_hat * scipy.fft.fft2(delta)).real,
                    r,
                )
                row_arg = delta - operators.apply_adjoint(op, lam_delta)
                row = grid.circular_convolve(t_flip, row_arg)
                values[ch, p1::r, p2::r] = float(np.sum(row * row))
    return VarianceMap(per_channel=values, mode="theoretical")


def empirical_variance_map(samples) -> VarianceMap:
    """Unbiased per-pixel variance over a collection of samples.

    ``samples`` is a sequence of images, each ``(M, N)`` or
    ``(C, M, N)``; at least two are required.
    """
    stack = [_as_planes(s, "sample") for s in samples]
    n = len(stack)
    if n < 2:
        raise InsufficientSamples(
            f"need at least 2 samples for a variance estimate, got {n}"
        )
    if any(s.shape != stack[0].shape for s in stack[1:]):
        raise DimensionMismatch("samples have inconsistent shapes")
    arr = np.stack(stack)
    return VarianceMap(
        per_channel=arr.var(axis=0, ddof=1), mode="empirical", sample_count=n
    )


def mse_decomposition(
    model: AdsnModel,
    u_hr: np.ndarray,
    u_lr: np.ndarray,
    op: DegradationOperator,
    kernel: KrigingKernel | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> dict:
    """Expected reconstruction error split into bias and variance parts.

    For the conditional sampler, the expected MSE against the true
    high-resolution image splits exactly into the (deterministic) MSE
    of the kriging prediction plus the innovation's mean per-pixel
    variance:

        expected_mse = kriging_mse + trace_term.

    All three values are returned in mean-squared units (averaged over
    pixels and channels), consistent with :func:`mse`.  The split
    assumes ``u_lr`` is the degradation of ``u_hr`` by ``op``; a
    warning is emitted when that does not hold.
    """
    hr = _as_planes(u_hr, "high-resolution image")
    lr = _as_planes(u_lr, "low-resolution image")
    if hr.shape[0] != model.channels or hr.shape[-2:] != model.grid_shape:
        raise DimensionMismatch(
            f"high-resolution image shape {hr.shape} does not match model"
        )
    if lr.shape[0] != model.channels or lr.shape[-2:] != op.lr_shape:
        raise DimensionMismatch(
            f"low-resolution image shape {lr.shape} does not match operator"
        )
    redegraded = operators.apply(op, hr)
    scale = float(np.linalg.norm(redegraded))
    if np.linalg.norm(redegraded - lr) > 1e-8 * max(scale, 1.0):
        warnings.warn(
            "u_lr is not the degradation of u_hr by this operator; the "
            "decomposition identity need not hold",
            stacklevel=2,
        )
    if kernel is None:
        kernel = kriging_kernel(model, op, epsilon)
    means = lr.mean(axis=(-2, -1))
    krig = (
        apply_kriging(kernel, lr - means[:, np.newaxis, np.newaxis])
        + means[:, np.newaxis, np.newaxis]
    )
    kriging_mse = mse(hr, krig)
    vmap = theoretical_variance_map(model, op, kernel)
    trace_term = float(vmap.per_channel.sum() / hr.size)
    return {
        "kriging_mse": kriging_mse,
        "trace_term": trace_term,
        "expected_mse": kriging_mse + trace_term,
    }
