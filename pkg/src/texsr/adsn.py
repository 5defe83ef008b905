"""Gaussian microtexture models (asymptotic discrete spot noise).

A microtexture is modelled as ``m + t * w`` where ``t`` is the normalized
texton extracted from a reference image, ``w`` is a white Gaussian noise
image and ``*`` is periodic convolution.  Colour models carry one texton
per channel but share a single noise image, which is what couples the
channels.

Reference images are routinely passed through :func:`periodic_component`
first: it removes the artificial cross-shaped spectral energy created by
the non-periodic image boundary, while preserving the mean, so that the
periodic model does not hallucinate boundary seams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import grid
from .errors import DimensionMismatch

__all__ = [
    "AdsnModel",
    "periodic_component",
    "build_model",
    "white_noise",
    "adsn_sample",
]

_MAX_SEED = 2**64


def _as_planes(u: np.ndarray, what: str = "image") -> np.ndarray:
    """Return ``u`` as a (C, M, N) stack with C in {1, 3}."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 2:
        u = u[np.newaxis]
    if u.ndim != 3 or u.shape[0] not in (1, 3):
        raise DimensionMismatch(
            f"{what} must be (M, N) or (C, M, N) with C in {{1, 3}}, "
            f"got shape {u.shape}"
        )
    if u.shape[-2] < 2 or u.shape[-1] < 2:
        raise DimensionMismatch(f"{what} grid must be at least 2x2, got {u.shape}")
    return u


@dataclass(frozen=True)
class AdsnModel:
    """Stationary Gaussian texture model.

    Attributes
    ----------
    textons : ndarray, shape (C, M, N)
        One normalized texton per channel, C in {1, 3}.  Treated as
        immutable after construction.
    means : ndarray, shape (C,)
        Channel means of the reference image.
    """

    textons: np.ndarray
    means: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        t = np.asarray(self.textons, dtype=float)
        if t.ndim == 2:
            t = t[np.newaxis]
        if t.ndim != 3 or t.shape[0] not in (1, 3):
            raise DimensionMismatch(
                f"textons must be (C, M, N) with C in {{1, 3}}, got {t.shape}"
            )
        if t.shape[-2] < 2 or t.shape[-1] < 2:
            raise DimensionMismatch(f"texton grid must be at least 2x2, got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("textons contain non-finite values")
        m = self.means
        if m is None:
            m = np.zeros(t.shape[0])
        m = np.atleast_1d(np.asarray(m, dtype=float))
        if m.size == 1 and t.shape[0] != 1:
            m = np.full(t.shape[0], m[0])
        if m.shape != (t.shape[0],):
            raise DimensionMismatch(
                f"means must have shape ({t.shape[0]},), got {m.shape}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("means contain non-finite values")
        object.__setattr__(self, "textons", t)
        object.__setattr__(self, "means", m)

    @property
    def channels(self) -> int:
        return self.textons.shape[0]

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.textons.shape[-2], self.textons.shape[-1]


def _boundary_jump_field(u: np.ndarray) -> np.ndarray:
    """Wrap-around intensity jumps, with corners accumulating both axes."""
    v = np.zeros_like(u)
    v[..., 0, :] += u[..., -1, :] - u[..., 0, :]
    v[..., -1, :] += u[..., 0, :] - u[..., -1, :]
    v[..., :, 0] += u[..., :, -1] - u[..., :, 0]
    v[..., :, -1] += u[..., :, 0] - u[..., :, -1]
    return v


#: relative size at which the remaining boundary jump counts as gone
_JUMP_TOL = 1e-13
#: iteration cap for the jump-removal fixed point (the contraction rate
#: is about 0.68 per step, so the tolerance is reached well before this)
_MAX_JUMP_STEPS = 128


def periodic_component(u: np.ndarray) -> np.ndarray:
    """Periodic part of the periodic-plus-smooth decomposition.

    Splits ``u = p + s`` where ``s`` is a smooth field solving the
    discrete Poisson equation driven by the intensity jumps across the
    wrapped image boundary, and returns ``p``.  The Poisson transfer is
    iterated until the remaining jump field is negligible, which makes
    the operation a projection in practice: an image whose opposite
    edges already match (``u[0, :] == u[-1, :]`` and ``u[:, 0] ==
    u[:, -1]``) is returned unchanged, and applying the operation twice
    gives the same result up to rounding.  The zero-frequency
    coefficient of ``s`` is pinned to zero, so ``p`` keeps the mean of
    ``u``.

    Accepts leading batch axes like the rest of :mod:`texsr.grid`.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim < 2 or u.shape[-2] < 2 or u.shape[-1] < 2:
        raise DimensionMismatch(f"need at least a 2x2 image, got shape {u.shape}")
    m, n = u.shape[-2], u.shape[-1]

    cos_m = np.cos(2.0 * np.pi * np.arange(m) / m)[:, np.newaxis]
    cos_n = np.cos(2.0 * np.pi * np.arange(n) / n)[np.newaxis, :]
    denom = 2.0 * (cos_m + cos_n - 2.0)
    denom[0, 0] = 1.0  # placeholder; the DC term is forced to zero below

    p = u
    v = _boundary_jump_field(p)
    jump0 = float(np.linalg.norm(v))
    if jump0 == 0.0:
        return p.copy()
    for _ in range(_MAX_JUMP_STEPS):
        s_hat = grid.dft2(v) / denom
        s_hat[..., 0, 0] = 0.0
        p = p - grid.idft2(s_hat)
        v = _boundary_jump_field(p)
        if float(np.linalg.norm(v)) <= _JUMP_TOL * jump0:
            break
    return p


def build_model(u_ref: np.ndarray, use_periodic: bool = True) -> AdsnModel:
    """Extract an :class:`AdsnModel` from a reference image.

    Parameters
    ----------
    u_ref : ndarray, shape (M, N) or (C, M, N) with C in {1, 3}
        Reference texture image.
    use_periodic : bool
        Apply :func:`periodic_component` to the reference before
        extracting the texton (recommended for photographs; disable
        when the input is already periodic or synthetic).

    Returns
    -------
    AdsnModel
        With texton ``(p - mean(p)) / sqrt(M*N)`` per channel; each
        texton sums to zero up to rounding.
    """
    planes = _as_planes(u_ref, "reference image")
    if use_periodic:
        planes = periodic_component(planes)
    m, n = planes.shape[-2], planes.shape[-1]
    means = planes.mean(axis=(-2, -1))
    textons = (planes - means[:, np.newaxis, np.newaxis]) / np.sqrt(m * n)
    return AdsnModel(textons=textons, means=means)


def white_noise(seed: int, m: int, n: int) -> np.ndarray:
    """Standard normal image of shape (m, n), deterministic in ``seed``.

    The generator is numpy's ``default_rng`` (PCG64); the same seed
    always yields the same image for a given shape.
    """
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((int(m), int(n)))


def adsn_sample(model: AdsnModel, seed: int) -> np.ndarray:
    """Draw one texture sample ``m + t * w`` from the model.

    Colour channels share the single noise image ``w`` drawn from
    ``seed``, which reproduces the cross-channel correlation of the
    reference.  Returns shape (M, N) for a grayscale model and
    (3, M, N) for colour.
    """
    m, n = model.grid_shape
    w = white_noise(seed, m, n)
    out = model.means[:, np.newaxis, np.newaxis] + grid.circular_convolve(
        model.textons, w
    )
    return out[0] if model.channels == 1 else out
