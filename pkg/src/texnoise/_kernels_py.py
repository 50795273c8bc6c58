"""Pure-numpy descriptor kernels: the fallback when the compiled core is absent.

Arithmetic is ordered to match the compiled kernels operation-for-operation so
both backends produce bit-identical code maps (no reassociation, same lerp
form, same accumulation order).
"""

from __future__ import annotations

import math

import numpy as np

# Border cells of a 3x3 window in row-major order, center excluded.
_CELLS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def lbp_code_map_r1n8(px: np.ndarray) -> np.ndarray:
    """8-bit LBP codes over the literal 3x3 integer neighborhood.

    Bit p set iff neighbor p >= center, neighbors indexed counter-clockwise
    from east. Returns an (H-2, W-2) int64 map.
    """
    c = px[1:-1, 1:-1]
    shifted = (
        px[1:-1, 2:],  # east
        px[:-2, 2:],  # northeast
        px[:-2, 1:-1],  # north
        px[:-2, :-2],  # northwest
        px[1:-1, :-2],  # west
        px[2:, :-2],  # southwest
        px[2:, 1:-1],  # south
        px[2:, 2:],  # southeast
    )
    codes = np.zeros(c.shape, dtype=np.int64)
    for p, nb in enumerate(shifted):
        codes |= (nb >= c).astype(np.int64) << p
    return codes


def lbp_code_map_circular(px: np.ndarray, offsets: np.ndarray, margin: int) -> np.ndarray:
    """LBP codes from interpolated circular sampling.

    `offsets` is an (N, 2) array of (dx, dy) sample offsets relative to the
    center pixel. Samples use the lerp form of bilinear interpolation and
    read exact pixels when an offset is integral.
    """
    h, w = px.shape
    ch, cw = h - 2 * margin, w - 2 * margin
    center = px[margin : margin + ch, margin : margin + cw]
    codes = np.zeros((ch, cw), dtype=np.int64)
    for p in range(offsets.shape[0]):
        dx, dy = offsets[p]
        x0 = math.floor(dx)
        y0 = math.floor(dy)
        tx = dx - x0
        ty = dy - y0
        x1 = x0 + 1 if tx > 0.0 else x0
        y1 = y0 + 1 if ty > 0.0 else y0

        def window(oy, ox):
            return px[margin + oy : margin + oy + ch, margin + ox : margin + ox + cw]

        a = window(y0, x0)
        b = window(y0, x1)
        c = window(y1, x0)
        d = window(y1, x1)
        top = a + tx * (b - a)
        bot = c + tx * (d - c)
        sample = top + ty * (bot - top)
        codes |= (sample >= center).astype(np.int64) << p
    return codes


def ldp_code_map(px: np.ndarray, k: int, cell_coeffs: np.ndarray) -> np.ndarray:
    """8-bit LDP codes: bits mark the k largest absolute compass responses.

    `cell_coeffs[i, j]` is mask i's coefficient at border cell j (row-major,
    center excluded). Ties rank the lower mask index first. Returns an
    (H-2, W-2) int64 map whose codes all have popcount k.
    """
    h, w = px.shape
    ch, cw = h - 2, w - 2
    responses = np.empty((8, ch, cw))
    for i in range(8):
        acc = None
        for j, (dy, dx) in enumerate(_CELLS):
            term = cell_coeffs[i, j] * px[1 + dy : 1 + dy + ch, 1 + dx : 1 + dx + cw]
            acc = term if acc is None else acc + term
        responses[i] = np.abs(acc)

    flat = responses.reshape(8, -1)
    # Stable argsort on the negated responses: descending, lower index wins ties.
    order = np.argsort(-flat, axis=0, kind="stable")
    codes = np.zeros(flat.shape[1], dtype=np.int64)
    for j in range(k):
        codes |= np.int64(1) << order[j].astype(np.int64)
    return codes.reshape(ch, cw)
