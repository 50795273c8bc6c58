"""LBP and LDP texture descriptors over grayscale images.

Conventions (shared by every code path, including the test oracles):

* Circular LBP sampling: point p of N sits at angle 2*pi*p/N counter-clockwise
  from east, i.e. offset (R*cos, -R*sin) in image coordinates (y grows down).
  Offsets within 1e-9 of an integer are snapped so mathematically integral
  sample points read pixels exactly.
* LBP bit p is set iff sample p >= center; code = sum of 2^p.
* R=1, N=8 uses the eight literal 3x3 integer neighbors (no interpolation).
* LDP ranks the absolute responses of the eight Kirsch compass masks and sets
  the bits of the k strongest; ties prefer the lower mask index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _backend
from .imaging import GrayImage

# Kirsch compass masks, indexed counter-clockwise from east. Each rotates the
# east mask's column of 5s one 45-degree step around the border ring.
KIRSCH_MASKS: tuple[np.ndarray, ...] = tuple(
    np.array(m, dtype=np.float64)
    for m in (
        [[-3, -3, 5], [-3, 0, 5], [-3, -3, 5]],  # 0: east
        [[-3, 5, 5], [-3, 0, 5], [-3, -3, -3]],  # 1: northeast
        [[5, 5, 5], [-3, 0, -3], [-3, -3, -3]],  # 2: north
        [[5, 5, -3], [5, 0, -3], [-3, -3, -3]],  # 3: northwest
        [[5, -3, -3], [5, 0, -3], [5, -3, -3]],  # 4: west
        [[-3, -3, -3], [5, 0, -3], [5, 5, -3]],  # 5: southwest
        [[-3, -3, -3], [-3, 0, -3], [5, 5, 5]],  # 6: south
        [[-3, -3, -3], [-3, 0, 5], [-3, 5, 5]],  # 7: southeast
    )
)
for _m in KIRSCH_MASKS:
    _m.setflags(write=False)

# Border cells of the 3x3 window in row-major order (center excluded); the
# kernels traverse them in exactly this order.
_CELLS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_KIRSCH_CELL_COEFFS = np.array(
    [[mask[dy + 1, dx + 1] for dy, dx in _CELLS] for mask in KIRSCH_MASKS]
)
_KIRSCH_CELL_COEFFS.setflags(write=False)

_OFFSET_SNAP = 1e-9


@dataclass(frozen=True)
class LbpParams:
    """Circular LBP parameters: sampling radius and number of sample points."""

    radius: float
    samples: int

    def __post_init__(self):
        if not (self.radius >= 1.0 and math.isfinite(self.radius)):
            raise ValueError("radius must be >= 1")
        if not 4 <= self.samples <= 24:
            raise ValueError("samples must be in [4, 24]")

    @property
    def margin(self) -> int:
        return math.ceil(self.radius)

    @property
    def bins(self) -> int:
        return 1 << self.samples

    @property
    def descriptor_id(self) -> str:
        return f"lbp_r{self.radius:g}_n{self.samples}"


@dataclass(frozen=True)
class LdpParams:
    """LDP parameter: how many top-ranked directional responses set bits."""

    k: int

    def __post_init__(self):
        if not 1 <= self.k <= 7:
            raise ValueError("k must be in [1, 7]")

    @property
    def bins(self) -> int:
        return math.comb(8, self.k)

    @property
    def descriptor_id(self) -> str:
        return f"ldp_k{self.k}"


DescriptorConfig = LbpParams | LdpParams


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Fixed-length real feature vector with a provenance tag."""

    values: np.ndarray
    descriptor_id: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("feature values must be 1-D")
        if not np.isfinite(arr).all():
            raise ValueError("feature values must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


def circle_offsets(params: LbpParams) -> np.ndarray:
    """(dx, dy) sample offsets relative to the center pixel, one row per point."""
    out = np.empty((params.samples, 2))
    for p in range(params.samples):
        angle = 2.0 * math.pi * p / params.samples
        dx = params.radius * math.cos(angle)
        dy = -params.radius * math.sin(angle)
        if abs(dx - round(dx)) < _OFFSET_SNAP:
            dx = float(round(dx))
        if abs(dy - round(dy)) < _OFFSET_SNAP:
            dy = float(round(dy))
        out[p] = dx, dy
    return out


def _require_center(img: GrayImage, cx: int, cy: int, margin: int):
    if not (margin <= cx < img.width - margin and margin <= cy < img.height - margin):
        raise ValueError(
            f"center ({cx}, {cy}) too close to border for margin {margin} "
            f"in {img.width}x{img.height} image"
        )


def _bilinear_at(px: np.ndarray, x: float, y: float) -> float:
    x0 = math.floor(x)
    y0 = math.floor(y)
    tx = x - x0
    ty = y - y0
    x1 = x0 + 1 if tx > 0.0 else x0
    y1 = y0 + 1 if ty > 0.0 else y0
    a = px[y0, x0]
    b = px[y0, x1]
    c = px[y1, x0]
    d = px[y1, x1]
    top = a + tx * (b - a)
    bot = c + tx * (d - c)
    return top + ty * (bot - top)


def sample_circular(img: GrayImage, cx: int, cy: int, params: LbpParams) -> np.ndarray:
    """Intensities at the N circular sample points around (cx, cy)."""
    _require_center(img, cx, cy, params.margin)
    px = img.pixels
    offsets = circle_offsets(params)
    return np.array([_bilinear_at(px, cx + dx, cy + dy) for dx, dy in offsets])


def lbp_code(img: GrayImage, cx: int, cy: int, params: LbpParams) -> int:
    """LBP code at one center: bit p set iff sample p >= center."""
    if params.radius == 1.0 and params.samples == 8:
        _require_center(img, cx, cy, 1)
        px = img.pixels
        c = px[cy, cx]
        neighbors = (
            px[cy, cx + 1],
            px[cy - 1, cx + 1],
            px[cy - 1, cx],
            px[cy - 1, cx - 1],
            px[cy, cx - 1],
            px[cy + 1, cx - 1],
            px[cy + 1, cx],
            px[cy + 1, cx + 1],
        )
        samples = np.array(neighbors)
    else:
        samples = sample_circular(img, cx, cy, params)
        c = img.pixels[cy, cx]
    code = 0
    for p in range(params.samples):
        if samples[p] >= c:
            code |= 1 << p
    return code


def lbp_code_map(img: GrayImage, params: LbpParams) -> np.ndarray:
    """LBP codes at every valid center (those >= ceil(R) from the borders)."""
    margin = params.margin
    if img.width < 2 * margin + 1 or img.height < 2 * margin + 1:
        raise ValueError(
            f"image too small: need at least {2 * margin + 1} pixels per side"
        )
    if params.radius == 1.0 and params.samples == 8:
        return _backend.lbp_code_map_r1n8(img.pixels)
    return _backend.lbp_code_map_circular(img.pixels, circle_offsets(params), margin)


def lbp_histogram(img: GrayImage, params: LbpParams) -> FeatureVector:
    """L1-normalized histogram of LBP codes over 2^N bins."""
    codes = lbp_code_map(img, params)
    counts = np.bincount(codes.ravel(), minlength=params.bins)
    return FeatureVector(counts / codes.size, params.descriptor_id)


def kirsch_responses(img: GrayImage, cx: int, cy: int) -> np.ndarray:
    """Absolute responses of the eight Kirsch masks at (cx, cy)."""
    _require_center(img, cx, cy, 1)
    px = img.pixels
    out = np.empty(8)
    for i in range(8):
        acc = 0.0
        for j, (dy, dx) in enumerate(_CELLS):
            acc += _KIRSCH_CELL_COEFFS[i, j] * px[cy + dy, cx + dx]
        out[i] = abs(acc)
    return out


def ldp_code(responses: np.ndarray, params: LdpParams) -> int:
    """8-bit code with bits at the indices of the k largest responses.

    Ties are broken in favor of the lower mask index, so popcount(code) == k
    for every input.
    """
    r = np.asarray(responses, dtype=np.float64)
    if r.shape != (8,):
        raise ValueError("exactly 8 responses required")
    if not np.isfinite(r).all():
        raise ValueError("responses must be finite")
    ranked = sorted(range(8), key=lambda i: (-r[i], i))
    code = 0
    for i in ranked[: params.k]:
        code |= 1 << i
    return code


def ldp_code_map(img: GrayImage, params: LdpParams) -> np.ndarray:
    """LDP codes at every center at least 1 pixel from the borders."""
    if img.width < 3 or img.height < 3:
        raise ValueError("image too small: need at least 3 pixels per side")
    return _backend.ldp_code_map(img.pixels, params.k, _KIRSCH_CELL_COEFFS)


def ldp_valid_codes(k: int) -> np.ndarray:
    """The C(8,k) codes with popcount k, in increasing numeric order."""
    codes = sorted(sum(1 << b for b in bits) for bits in combinations(range(8), k))
    return np.array(codes, dtype=np.int64)


def ldp_histogram(img: GrayImage, params: LdpParams) -> FeatureVector:
    """L1-normalized histogram over the C(8,k) valid LDP codes."""
    codes = ldp_code_map(img, params)
    rank = np.full(256, -1, dtype=np.int64)
    rank[ldp_valid_codes(params.k)] = np.arange(params.bins)
    counts = np.bincount(rank[codes.ravel()], minlength=params.bins)
    return FeatureVector(counts / codes.size, params.descriptor_id)


def extract_histogram(img: GrayImage, config: DescriptorConfig) -> FeatureVector:
    """Histogram feature for either descriptor family."""
    if isinstance(config, LbpParams):
        return lbp_histogram(img, config)
    return ldp_histogram(img, config)
