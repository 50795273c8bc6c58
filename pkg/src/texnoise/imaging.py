"""Grayscale images: PGM/PNG decoding, bilinear resize, seeded Gaussian noise.

Images are real-valued fields in [0, 1]; 8-bit sources are mapped by v/255.
Quantization back to 8 bits happens only when saving, so all descriptor math
downstream operates on exact real intensities.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\n\r\x0b\x0c"


class ImageFormatError(ValueError):
    """Raised when image bytes cannot be decoded."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D grayscale intensity field, shape (height, width), values in [0, 1].

    The pixel array is copied on construction and marked read-only: images
    are immutable values and safe to share across workers.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.isfinite(arr).all():
            raise ValueError("pixels must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("pixels must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean additive Gaussian noise on the [0, 1] intensity scale.

    `level` is the variance of the noise; set `level_is_stddev` to reinterpret
    it as the standard deviation instead. `level == 0` means identity.
    """

    level: float
    seed: int
    level_is_stddev: bool = False

    def __post_init__(self):
        if not (self.level >= 0.0 and math.isfinite(self.level)):
            raise ValueError("noise level must be finite and >= 0")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def sigma(self) -> float:
        return self.level if self.level_is_stddev else math.sqrt(self.level)


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in (b"#",):
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise ImageFormatError("malformed header: unexpected end of data")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def _header_int(token: bytes, what: str) -> int:
    if not token.isdigit():
        raise ImageFormatError(f"malformed header: bad {what} {token!r}")
    return int(token)


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary "P5" PGM with maxval <= 255."""
    magic, pos = _next_token(bytes(data), 0)
    if magic != b"P5":
        raise ImageFormatError(f"unsupported magic number {magic[:8]!r}, expected P5")
    width, pos = _next_token(data, pos)
    height, pos = _next_token(data, pos)
    maxval, pos = _next_token(data, pos)
    width = _header_int(width, "width")
    height = _header_int(height, "height")
    maxval = _header_int(maxval, "maxval")
    if width == 0 or height == 0:
        raise ImageFormatError("malformed header: zero image dimension")
    if maxval > 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (must be <= 255)")
    if maxval == 0:
        raise ImageFormatError("malformed header: maxval must be >= 1")
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise ImageFormatError("malformed header: missing separator before pixels")
    payload = data[pos + 1 :]
    if len(payload) < width * height:
        raise ImageFormatError(
            f"truncated pixel payload: expected {width * height} bytes, got {len(payload)}"
        )
    if len(payload) > width * height:
        raise ImageFormatError("trailing data after pixel payload")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(raw / 255.0)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] reals to 8-bit by round-half-up: floor(v*255 + 0.5)."""
    return np.clip(np.floor(values * 255.0 + 0.5), 0, 255).astype(np.uint8)


def save_pgm(img: GrayImage) -> bytes:
    """Encode as binary P5 with maxval 255."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + quantize_u8(img.pixels).tobytes()


def load_png(data: bytes) -> GrayImage:
    """Decode an 8-bit grayscale (mode L) PNG. Optional path; requires Pillow."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is a declared dep
        raise ImageFormatError("PNG decoding requires Pillow") from exc
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.mode != "L":
                raise ImageFormatError(
                    f"unsupported PNG mode {im.mode!r}: 8-bit grayscale (L) required"
                )
            raw = np.asarray(im, dtype=np.uint8)
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"malformed PNG data: {exc}") from exc
    return GrayImage(raw / 255.0)


def decode_image(data: bytes) -> GrayImage:
    """Decode PGM or PNG bytes, dispatching on the file signature."""
    if data[:2] == b"P5":
        return load_pgm(data)
    if data[:8] == _PNG_SIGNATURE:
        return load_png(data)
    raise ImageFormatError(f"unsupported magic number {bytes(data[:8])!r}")


def load_image(path: str | Path) -> GrayImage:
    """Read and decode an image file, attributing errors to the path."""
    path = Path(path)
    try:
        return decode_image(path.read_bytes())
    except ImageFormatError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resize with corner-aligned sample mapping.

    Output pixel (x, y) samples the source at x*(W-1)/(out_w-1) and
    y*(H-1)/(out_h-1); a target dimension of 1 samples coordinate 0.
    Resizing to the source dimensions is the identity.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError("resize target dimensions must be >= 1")
    if out_w == img.width and out_h == img.height:
        return img
    px = img.pixels
    h, w = px.shape

    def axis_coords(out_n: int, in_n: int) -> np.ndarray:
        if out_n == 1:
            return np.zeros(1)
        return np.clip(np.arange(out_n) * ((in_n - 1) / (out_n - 1)), 0.0, in_n - 1)

    xs = axis_coords(out_w, w)
    ys = axis_coords(out_h, h)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    tx = xs - x0
    ty = ys - y0
    # Only touch the +1 neighbor when the fraction is nonzero, so exact hits
    # never read out of bounds and stay bit-exact.
    x1 = x0 + (tx > 0)
    y1 = y0 + (ty > 0)

    a = px[y0[:, None], x0[None, :]]
    b = px[y0[:, None], x1[None, :]]
    c = px[y1[:, None], x0[None, :]]
    d = px[y1[:, None], x1[None, :]]
    top = a + tx[None, :] * (b - a)
    bot = c + tx[None, :] * (d - c)
    out = top + ty[:, None] * (bot - top)
    return GrayImage(np.clip(out, 0.0, 1.0))


def noise_field(shape: tuple[int, int], spec: NoiseSpec) -> np.ndarray:
    """Draw the Gaussian noise field for `spec`.

    Deterministic: a Philox counter-based generator keyed by `spec.seed`
    produces the normal deviates, so the same spec always yields the same
    field. Exposed separately so the injected noise itself can be inspected
    (clamping in `add_gaussian_noise` would otherwise bias measurements).
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    return rng.normal(0.0, spec.sigma, shape)


def add_gaussian_noise(img: GrayImage, spec: NoiseSpec) -> GrayImage:
    """Add seeded Gaussian noise and clamp back to [0, 1].

    A level of 0 returns the input image unchanged.
    """
    if spec.level == 0.0:
        return img
    noisy = img.pixels + noise_field(img.pixels.shape, spec)
    return GrayImage(np.clip(noisy, 0.0, 1.0))
