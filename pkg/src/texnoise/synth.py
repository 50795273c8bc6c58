"""Synthetic grating corpora for demos and end-to-end tests.

Each class is a sinusoidal grating at a fixed orientation; images within a
class differ by random phase and a little frequency jitter. Orientation is
exactly what directional descriptors encode, so a sound pipeline separates
the classes easily on clean images.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .imaging import GrayImage, save_pgm


def grating(size: int, angle: float, frequency: float, phase: float,
            amplitude: float = 0.45, offset: float = 0.5) -> GrayImage:
    """One sinusoidal grating; `angle` in radians, `frequency` in cycles/pixel."""
    coords = np.arange(size)
    xx, yy = np.meshgrid(coords, coords)
    t = xx * math.cos(angle) + yy * math.sin(angle)
    values = offset + amplitude * np.sin(2.0 * math.pi * frequency * t + phase)
    return GrayImage(np.clip(values, 0.0, 1.0))


def make_grating_corpus(root: str | Path, classes: int = 5, images_per_class: int = 40,
                        size: int = 100, seed: int = 0, frequency: float = 0.11,
                        amplitude: float = 0.45) -> int:
    """Write a PGM corpus of oriented gratings; returns the image count."""
    root = Path(root)
    rng = np.random.Generator(np.random.Philox(seed))
    written = 0
    for c in range(classes):
        angle = math.pi * c / classes
        subject_dir = root / f"class_{c:02d}"
        subject_dir.mkdir(parents=True, exist_ok=True)
        for i in range(images_per_class):
            phase = rng.uniform(0.0, 2.0 * math.pi)
            freq = frequency * rng.uniform(0.95, 1.05)
            img = grating(size, angle, freq, phase, amplitude=amplitude)
            (subject_dir / f"img_{i:03d}.pgm").write_bytes(save_pgm(img))
            written += 1
    return written
