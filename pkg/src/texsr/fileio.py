"""Image and kernel file I/O.

Two image formats are supported.  PFM (portable float map) is the
numeric workhorse: raw 32-bit floats, lossless for every finite float32
value, grayscale (``Pf``) or three-channel (``PF``), rows stored bottom
to top, byte order given by the sign of the scale field.  8-bit PNG is
for previews and external data: values are clamped to ``[0, peak]``,
scaled to ``[0, 255]`` and rounded half away from zero.

Kernel tap tables use a small text format: a header line ``K L cy cx``
(tap array size and center index) followed by K lines of L floats.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import CorruptHeader, DimensionMismatch, UnsupportedFormat

__all__ = [
    "read_image",
    "write_image",
    "read_pfm",
    "write_pfm",
    "read_png",
    "write_png",
    "read_kernel_file",
    "write_kernel_file",
    "write_spectrum_png",
]


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    size = len(buf)
    while pos < size and buf[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < size and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise CorruptHeader("unexpected end of PFM header")
    return buf[start:pos], pos


def read_pfm(path) -> np.ndarray:
    """Read a PFM image as float64 planes.

    Returns shape (M, N) for grayscale files and (3, M, N) for colour.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _next_token(buf, 0)
    if magic not in (b"Pf", b"PF"):
        raise UnsupportedFormat(f"not a PFM file (magic {magic!r})")
    color = magic == b"PF"
    try:
        w_tok, pos = _next_token(buf, pos)
        h_tok, pos = _next_token(buf, pos)
        scale_tok, pos = _next_token(buf, pos)
        width, height = int(w_tok), int(h_tok)
        scale = float(scale_tok)
    except (ValueError, CorruptHeader) as exc:
        raise CorruptHeader(f"malformed PFM header in {path}") from exc
    if width <= 0 or height <= 0 or scale == 0.0:
        raise CorruptHeader(
            f"invalid PFM dimensions/scale {width}x{height}, {scale}"
        )
    # exactly one whitespace byte separates the header from the pixels
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise CorruptHeader("missing separator before PFM pixel data")
    pos += 1
    channels = 3 if color else 1
    count = width * height * channels
    if len(buf) - pos != count * 4:
        raise CorruptHeader(
            f"PFM pixel payload has {len(buf) - pos} bytes, "
            f"expected {count * 4}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    if color:
        img = data.reshape(height, width, 3)
        img = np.flipud(img)  # PFM rows run bottom to top
        return np.ascontiguousarray(img.transpose(2, 0, 1)).astype(float)
    img = np.flipud(data.reshape(height, width))
    return np.ascontiguousarray(img).astype(float)


def write_pfm(path, planes: np.ndarray) -> None:
    """Write float planes, (M, N) or (3, M, N), as little-endian PFM."""
    a = np.asarray(planes, dtype=float)
    if a.ndim == 2:
        color = False
        rows = np.flipud(a)
    elif a.ndim == 3 and a.shape[0] == 3:
        color = True
        rows = np.flipud(a.transpose(1, 2, 0))
    else:
        raise DimensionMismatch(
            f"PFM images must be (M, N) or (3, M, N), got shape {a.shape}"
        )
    height, width = rows.shape[0], rows.shape[1]
    with open(path, "wb") as fh:
        fh.write(b"PF\n" if color else b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())


def _quantize(planes: np.ndarray, peak: float) -> np.ndarray:
    peak = float(peak)
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    clipped = np.clip(planes, 0.0, peak)
    return np.floor(clipped * (255.0 / peak) + 0.5).astype(np.uint8)


def write_png(path, planes: np.ndarray, peak: float = 255.0) -> None:
    """Write an 8-bit PNG preview.

    Values are clamped to ``[0, peak]``, mapped linearly onto
    ``[0, 255]`` and rounded half away from zero.
    """
    a = np.asarray(planes, dtype=float)
    if a.ndim == 2:
        Image.fromarray(_quantize(a, peak), mode="L").save(path, format="PNG")
    elif a.ndim == 3 and a.shape[0] == 3:
        rgb = _quantize(a.transpose(1, 2, 0), peak)
        Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
    else:
        raise DimensionMismatch(
            f"PNG images must be (M, N) or (3, M, N), got shape {a.shape}"
        )


def read_png(path) -> np.ndarray:
    """Read an 8-bit PNG as float64 planes with values in [0, 255]."""
    with Image.open(path) as img:
        if img.mode in ("L", "I;16", "I", "1", "LA"):
            a = np.asarray(img.convert("L"), dtype=float)
            return a
        a = np.asarray(img.convert("RGB"), dtype=float)
    return np.ascontiguousarray(a.transpose(2, 0, 1))


def read_image(path) -> tuple[np.ndarray, float | None]:
    """Read a PFM or PNG image based on the file extension.

    Returns
    -------
    (planes, value_scale)
        ``planes`` is (M, N) or (3, M, N) float64.  ``value_scale`` is
        255.0 for PNG (integers mapped to [0, 255]) and None for PFM
        (raw floats, no inherent scale).
    """
    name = str(path).lower()
    if name.endswith(".pfm"):
        return read_pfm(path), None
    if name.endswith(".png"):
        return read_png(path), 255.0
    raise UnsupportedFormat(f"unsupported image extension: {path}")


def write_image(path, planes: np.ndarray, peak: float = 255.0) -> None:
    """Write PFM or PNG based on the file extension (PNG uses ``peak``)."""
    name = str(path).lower()
    if name.endswith(".pfm"):
        write_pfm(path, planes)
    elif name.endswith(".png"):
        write_png(path, planes, peak)
    else:
        raise UnsupportedFormat(f"unsupported image extension: {path}")


def read_kernel_file(path) -> tuple[np.ndarray, tuple[int, int]]:
    """Read a kernel tap table.

    Format: first line ``K L cy cx``, then K lines of L floats.
    Returns the (K, L) tap array and the center index ``(cy, cx)``.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise CorruptHeader(f"empty kernel file {path}")
    head = lines[0].split()
    if len(head) != 4:
        raise CorruptHeader(
            f"kernel header must be 'K L cy cx', got {lines[0]!r}"
        )
    try:
        k_rows, k_cols, cy, cx = (int(x) for x in head)
    except ValueError as exc:
        raise CorruptHeader(f"non-integer kernel header {lines[0]!r}") from exc
    if k_rows <= 0 or k_cols <= 0:
        raise CorruptHeader(f"invalid kernel size {k_rows}x{k_cols}")
    if not (0 <= cy < k_rows and 0 <= cx < k_cols):
        raise CorruptHeader(
            f"kernel center ({cy}, {cx}) outside tap array {k_rows}x{k_cols}"
        )
    if len(lines) - 1 != k_rows:
        raise CorruptHeader(
            f"expected {k_rows} tap rows, found {len(lines) - 1}"
        )
    taps = np.empty((k_rows, k_cols))
    for i, line in enumerate(lines[1 : 1 + k_rows]):
        parts = line.split()
        if len(parts) != k_cols:
            raise CorruptHeader(
                f"tap row {i} has {len(parts)} entries, expected {k_cols}"
            )
        try:
            taps[i] = [float(x) for x in parts]
        except ValueError as exc:
            raise CorruptHeader(f"non-numeric tap in row {i}") from exc
    return taps, (cy, cx)


def write_kernel_file(path, taps: np.ndarray, center: tuple[int, int]) -> None:
    """Write a kernel tap table in the text format of
    :func:`read_kernel_file`."""
    taps = np.asarray(taps, dtype=float)
    if taps.ndim != 2:
        raise DimensionMismatch(f"tap array must be 2-D, got shape {taps.shape}")
    cy, cx = int(center[0]), int(center[1])
    with open(path, "w") as fh:
        fh.write(f"{taps.shape[0]} {taps.shape[1]} {cy} {cx}\n")
        for row in taps:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def write_spectrum_png(path, spectrum: np.ndarray) -> None:
    """Log-modulus visualization of a spectrum as an 8-bit PNG.

    Renders ``log(1 + |s|)`` with the zero frequency shifted to the
    center and the maximum mapped to 255.  Multi-channel spectra are
    averaged in modulus before the log.
    """
    s = np.asarray(spectrum)
    if s.ndim == 3:
        mag = np.mean(np.abs(s), axis=0)
    elif s.ndim == 2:
        mag = np.abs(s)
    else:
        raise DimensionMismatch(f"spectrum must be 2-D or (C, M, N), got {s.shape}")
    vis = np.log1p(mag)
    vis = np.fft.fftshift(vis)
    top = float(vis.max())
    if top > 0.0:
        vis = vis / top
    write_png(path, vis * 255.0, peak=255.0)
