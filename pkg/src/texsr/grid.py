"""Algebra of images on the periodic grid.

Every image in this package lives on the 2-D periodic grid
``Omega = {0..M-1} x {0..N-1}`` and is stored as a float64 numpy array of
shape ``(M, N)`` (rows first).  All functions here accept arbitrary
leading batch axes and act on the last two, so a ``(3, M, N)`` stack of
colour planes goes through unchanged.

The discrete Fourier transform convention is the unnormalized forward
sum

    U_hat(w) = sum_y U(y) exp(-2i*pi*w1*y1/M) exp(-2i*pi*w2*y2/N),

with the ``1/(MN)`` factor in the inverse — i.e. exactly what
``scipy.fft.fft2`` / ``ifft2`` compute.  Under this convention the
periodic convolution

    (u * v)(x) = sum_y u(x - y) v(y)        (indices mod M, N)

becomes a plain product of spectra, and the reflected image
``flip(u)(x) = u(-x)`` has the conjugate spectrum.  Those identities,
together with spatial subsampling and its adjoint (zero-filling
upsampling), are the complete tool set the rest of the package builds
on.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.fft

from .errors import DimensionMismatch, NonHermitianSpectrum, StrideDoesNotDivide

__all__ = [
    "dft2",
    "idft2",
    "circular_convolve",
    "flip",
    "subsample",
    "upsample_adjoint",
]

#: imaginary residue (relative L2) above which idft2 refuses to return a
#: real image
_HERMITIAN_TOL = 1e-9
#: residue above this level is discarded but reported through a warning
_HERMITIAN_WARN = 1e-12


def _check_grid(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim < 2:
        raise DimensionMismatch(
            f"expected at least a 2-D grid image, got shape {a.shape}"
        )
    m, n = a.shape[-2], a.shape[-1]
    if m < 2 or n < 2:
        raise DimensionMismatch(
            f"grid dimensions must both be >= 2, got {m}x{n}"
        )
    return a


def dft2(u: np.ndarray) -> np.ndarray:
    """Unnormalized forward 2-D DFT of the trailing two axes.

    Parameters
    ----------
    u : ndarray, shape (..., M, N)
        Real image (complex input is transformed as-is).

    Returns
    -------
    ndarray of complex128, shape (..., M, N)
    """
    u = _check_grid(u)
    return scipy.fft.fft2(u, axes=(-2, -1))


def idft2(s: np.ndarray) -> np.ndarray:
    """Inverse DFT returning a real image.

    The spectrum must be Hermitian-symmetric up to rounding: the
    imaginary part of the inverse transform is discarded when its
    relative L2 norm is below ``1e-9`` (with a warning once it exceeds
    ``1e-12``) and rejected otherwise.

    Parameters
    ----------
    s : ndarray, shape (..., M, N)
        Complex spectrum in the convention of :func:`dft2`.

    Returns
    -------
    ndarray of float64, shape (..., M, N)

    Raises
    ------
    NonHermitianSpectrum
        If the imaginary residue exceeds ``1e-9`` relative to the
        output norm.
    """
    s = _check_grid(s)
    z = scipy.fft.ifft2(s, axes=(-2, -1))
    re = np.ascontiguousarray(z.real)
    im_norm = np.linalg.norm(z.imag)
    re_norm = np.linalg.norm(re)
    scale = re_norm if re_norm > 0.0 else 1.0
    if im_norm > _HERMITIAN_TOL * scale:
        raise NonHermitianSpectrum(
            f"imaginary residue {im_norm / scale:.3e} (relative) exceeds "
            f"{_HERMITIAN_TOL:.0e}; spectrum is not Hermitian-symmetric"
        )
    if im_norm > _HERMITIAN_WARN * scale:
        warnings.warn(
            f"discarding imaginary residue of relative size "
            f"{im_norm / scale:.3e} in idft2",
            stacklevel=2,
        )
    return re


def circular_convolve(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Periodic convolution ``(u * v)(x) = sum_y u(x-y) v(y)``.

    Computed through the FFT, so it is exact up to rounding for any
    pair of images on the same ``M x N`` grid.  Leading batch axes
    broadcast against each other.

    Raises
    ------
    DimensionMismatch
        If the trailing grid shapes differ.
    """
    u = _check_grid(u)
    v = _check_grid(v)
    if u.shape[-2:] != v.shape[-2:]:
        raise DimensionMismatch(
            f"cannot convolve grids of shape {u.shape[-2:]} and {v.shape[-2:]}"
        )
    prod = scipy.fft.fft2(u, axes=(-2, -1)) * scipy.fft.fft2(v, axes=(-2, -1))
    out = scipy.fft.ifft2(prod, axes=(-2, -1))
    if np.isrealobj(u) and np.isrealobj(v):
        return np.ascontiguousarray(out.real)
    return out


def flip(u: np.ndarray) -> np.ndarray:
    """Point reflection ``flip(u)(x) = u(-x mod (M, N))``.

    An involution; its spectrum is the complex conjugate of the
    spectrum of ``u``.
    """
    u = _check_grid(u)
    return np.roll(u[..., ::-1, ::-1], shift=(1, 1), axis=(-2, -1))


def subsample(u: np.ndarray, r: int) -> np.ndarray:
    """Keep every ``r``-th pixel: ``(S u)(x) = u(r x)``.

    Parameters
    ----------
    u : ndarray, shape (..., M, N)
    r : int
        Stride; must be >= 1 and divide both M and N.

    Returns
    -------
    ndarray, shape (..., M/r, N/r)

    Raises
    ------
    StrideDoesNotDivide
        If ``r`` does not divide both grid dimensions.
    """
    u = _check_grid(u)
    r = int(r)
    m, n = u.shape[-2], u.shape[-1]
    if r < 1 or m % r != 0 or n % r != 0:
        raise StrideDoesNotDivide(
            f"stride {r} does not divide grid {m}x{n}"
        )
    return u[..., ::r, ::r]


def upsample_adjoint(v: np.ndarray, r: int) -> np.ndarray:
    """Adjoint of :func:`subsample`: zero-filling upsampling.

    Places ``v(x)`` at position ``r x`` of an ``(r*m) x (r*n)`` grid and
    zero everywhere else, so that ``<subsample(u, r), v> = <u,
    upsample_adjoint(v, r)>`` for all ``u``.
    """
    v = _check_grid(v)
    r = int(r)
    if r < 1:
        raise StrideDoesNotDivide(f"stride must be >= 1, got {r}")
    m, n = v.shape[-2], v.shape[-1]
    out = np.zeros(v.shape[:-2] + (m * r, n * r), dtype=v.dtype)
    out[..., ::r, ::r] = v
    return out
