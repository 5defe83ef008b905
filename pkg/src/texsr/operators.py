"""Zoom-out degradation operators: periodic convolution then subsampling.

An operator ``A`` maps an ``M x N`` image to an ``(M/r) x (N/r)`` one by
convolving with a mass-1 kernel (antialiasing) and keeping every
``r``-th pixel.  The kernel is stored periodically embedded on the full
grid, with its tap for displacement ``d`` at index ``d mod (M, N)``, so
both ``A`` and its adjoint are exact circular operations with cached
spectra.

Two constructors are provided: the antialiased Keys bicubic family used
for standard zooms, and arbitrary user kernels given as a tap array plus
a center (for example a motion-blur kernel loaded from a text file).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from . import grid
from .errors import DimensionMismatch, KernelTooLarge, StrideDoesNotDivide

__all__ = [
    "DegradationOperator",
    "keys_taps",
    "bicubic_operator",
    "custom_operator",
    "apply",
    "apply_adjoint",
]

#: permitted drift of the kernel mass away from 1
_MASS_TOL = 1e-9
#: drift above this level triggers a renormalization warning
_MASS_WARN = 1e-6


@dataclass(frozen=True)
class DegradationOperator:
    """Periodic convolution-plus-subsampling operator.

    Attributes
    ----------
    kernel : ndarray, shape (M, N)
        Convolution kernel periodically embedded on the high-resolution
        grid; sums to 1.
    stride : int
        Subsampling step ``r >= 1``; divides both M and N.
    kernel_spectrum : ndarray of complex128, shape (M, N)
        Cached DFT of the kernel.
    renormalized : bool
        True when construction had to rescale the kernel mass to 1.
    """

    kernel: np.ndarray
    stride: int
    renormalized: bool = False
    kernel_spectrum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.ndim != 2 or k.shape[0] < 2 or k.shape[1] < 2:
            raise DimensionMismatch(
                f"kernel must be a 2-D grid image of shape >= 2x2, got {k.shape}"
            )
        if not np.all(np.isfinite(k)):
            raise ValueError("kernel contains non-finite values")
        r = int(self.stride)
        if r < 1 or k.shape[0] % r != 0 or k.shape[1] % r != 0:
            raise StrideDoesNotDivide(
                f"stride {r} does not divide grid {k.shape[0]}x{k.shape[1]}"
            )
        mass = float(k.sum())
        if abs(mass - 1.0) > _MASS_TOL:
            raise ValueError(
                f"kernel mass must be 1 within {_MASS_TOL:.0e}, got {mass!r}"
            )
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "stride", r)
        object.__setattr__(self, "kernel_spectrum", scipy.fft.fft2(k))

    @property
    def hr_shape(self) -> tuple[int, int]:
        return self.kernel.shape

    @property
    def lr_shape(self) -> tuple[int, int]:
        return self.kernel.shape[0] // self.stride, self.kernel.shape[1] // self.stride


def keys_taps(r: int) -> tuple[np.ndarray, np.ndarray]:
    """1-D antialiased Keys cubic taps for zoom-out factor ``r``.

    The taps sample the Keys cubic interpolation kernel (parameter
    ``a = -1/2``) stretched by ``r`` and shifted by the alignment offset
    ``delta = (r - 1) / 2``, i.e. ``tap(j) ~ k((j - delta) / r)`` on the
    integer support ``|j - delta| < 2 r``, normalized to sum 1.  For
    ``r = 1`` this degenerates to a unit impulse.

    Returns
    -------
    offsets : ndarray of int
        Tap displacements ``j``.
    taps : ndarray of float
        Tap weights, same length, summing to 1.
    """
    r = int(r)
    if r < 1:
        raise ValueError(f"zoom factor must be >= 1, got {r}")
    delta = (r - 1) / 2.0
    lo = int(np.floor(delta - 2 * r)) + 1
    hi = int(np.ceil(delta + 2 * r)) - 1
    offsets = np.arange(lo, hi + 1)
    s = np.abs((offsets - delta) / r)
    a = -0.5
    taps = np.where(
        s <= 1.0,
        (a + 2.0) * s**3 - (a + 3.0) * s**2 + 1.0,
        np.where(s < 2.0, a * s**3 - 5.0 * a * s**2 + 8.0 * a * s - 4.0 * a, 0.0),
    )
    keep = taps != 0.0
    # keep the center tap even in the degenerate r=1 case where s==0 only
    if not np.any(keep):
        raise ValueError("empty bicubic tap set")
    offsets, taps = offsets[keep], taps[keep]
    return offsets, taps / taps.sum()


def _embed_separable(row: np.ndarray, row_off: np.ndarray, m: int,
                     col: np.ndarray, col_off: np.ndarray, n: int) -> np.ndarray:
    """Periodically embed an outer product of 1-D taps on an m x n grid."""
    am = np.zeros(m)
    np.add.at(am, np.mod(row_off, m), row)
    an = np.zeros(n)
    np.add.at(an, np.mod(col_off, n), col)
    return np.outer(am, an)


def bicubic_operator(m: int, n: int, r: int) -> DegradationOperator:
    """Separable antialiased Keys bicubic zoom-out operator on m x n.

    The same 1-D taps from :func:`keys_taps` are used along both axes
    and periodically embedded (taps wrap and accumulate when the grid is
    small relative to ``4 r``).  For ``r = 1`` the kernel is the unit
    impulse and ``A`` is the identity.
    """
    m, n, r = int(m), int(n), int(r)
    if m % r != 0 or n % r != 0:
        raise StrideDoesNotDivide(f"stride {r} does not divide grid {m}x{n}")
    off, taps = keys_taps(r)
    kernel = _embed_separable(taps, off, m, taps, off, n)
    return DegradationOperator(kernel=kernel, stride=r)


def custom_operator(taps: np.ndarray, center: tuple[int, int], r: int,
                    m: int, n: int) -> DegradationOperator:
    """Build an operator from an explicit tap array.

    Parameters
    ----------
    taps : ndarray, shape (K, L)
        Kernel weights; entry ``(p, q)`` acts at displacement
        ``(p - cy, q - cx)``.
    center : (cy, cx)
        Index of the tap sitting at displacement zero.
    r : int
        Subsampling stride.
    m, n : int
        High-resolution grid size.

    The kernel mass is rescaled to exactly 1; when the input mass
    deviates from 1 by more than 1e-6 this is reported through a
    warning and flagged on the returned operator.

    Raises
    ------
    KernelTooLarge
        If the tap array exceeds the grid in either dimension.
    """
    taps = np.asarray(taps, dtype=float)
    if taps.ndim != 2:
        raise DimensionMismatch(f"tap array must be 2-D, got shape {taps.shape}")
    k_rows, k_cols = taps.shape
    m, n, r = int(m), int(n), int(r)
    if k_rows > m or k_cols > n:
        raise KernelTooLarge(
            f"tap array {k_rows}x{k_cols} exceeds grid {m}x{n}"
        )
    mass = float(taps.sum())
    if mass == 0.0 or not np.isfinite(mass):
        raise ValueError(f"kernel mass must be nonzero and finite, got {mass!r}")
    renorm = abs(mass - 1.0) > _MASS_WARN
    if renorm:
        warnings.warn(
            f"kernel mass {mass:.6g} renormalized to 1", stacklevel=2
        )
    taps = taps / mass
    cy, cx = int(center[0]), int(center[1])
    kernel = np.zeros((m, n))
    rows = np.mod(np.arange(k_rows) - cy, m)
    cols = np.mod(np.arange(k_cols) - cx, n)
    np.add.at(kernel, (rows[:, np.newaxis], cols[np.newaxis, :]), taps)
    return DegradationOperator(kernel=kernel, stride=r, renormalized=renorm)


def apply(op: DegradationOperator, u: np.ndarray) -> np.ndarray:
    """Degrade: ``A u = subsample(kernel * u, r)``.

    ``u`` may carry leading batch axes; the trailing axes must match the
    operator's high-resolution grid.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-2:] != op.hr_shape:
        raise DimensionMismatch(
            f"image grid {u.shape[-2:]} does not match operator grid {op.hr_shape}"
        )
    blurred = scipy.fft.ifft2(
        scipy.fft.fft2(u, axes=(-2, -1)) * op.kernel_spectrum, axes=(-2, -1)
    ).real
    r = op.stride
    return np.ascontiguousarray(blurred[..., ::r, ::r])


def apply_adjoint(op: DegradationOperator, v: np.ndarray) -> np.ndarray:
    """Adjoint ``A^T v``: zero-fill upsample, then correlate with the kernel.

    Satisfies ``<A u, v> = <u, A^T v>`` exactly up to rounding for all
    ``u``, ``v`` on the matching grids.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-2:] != op.lr_shape:
        raise DimensionMismatch(
            f"image grid {v.shape[-2:]} does not match operator "
            f"low-resolution grid {op.lr_shape}"
        )
    up = grid.upsample_adjoint(v, op.stride)
    return scipy.fft.ifft2(
        scipy.fft.fft2(up, axes=(-2, -1)) * np.conj(op.kernel_spectrum),
        axes=(-2, -1),
    ).real
