"""Synthetic shape rasters standing in for field imagery.

Shapes are drawn as filled masks on a square canvas, then transformed by
array operations chosen for exactness: nearest-neighbour upscale (kron),
quarter-turn rotation (rot90) and integer translation (bounds-checked
shift). This keeps the geometric relationships between an image and its
transformed copy exact at the pixel level, so invariance measurements see
only the estimator's own error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .raster import GrayImage

SHAPE_CLASS = {
    "fin_polygon": "mature_shark",
    "ellipse": "shark_school",
    "disk": "baby_shark",
    "triangle": "other",
}

# unit-square outlines, y up; deliberately scalene / lopsided so no
# central-moment product degenerates to zero by symmetry
_TRIANGLE = ((-0.9, -0.75), (0.95, -0.35), (-0.25, 0.9))
_FIN = ((-0.95, -0.85), (0.95, -0.85), (0.55, -0.25), (0.72, 0.95),
        (0.05, 0.3), (-0.4, -0.1), (-0.75, -0.45))


@dataclass(frozen=True)
class SyntheticShapeSpec:
    kind: str                      # disk | ellipse | triangle | fin_polygon
    size: int                      # characteristic radius in pixels
    canvas: int = 192
    translate: tuple[int, int] = (0, 0)   # (dx, dy), applied last
    rotate_quarters: int = 0
    scale: int = 1                 # nearest-neighbour upscale factor
    noise: float = 0.0             # gaussian sigma added to pixel values

    def validate(self):
        if self.kind not in SHAPE_CLASS:
            raise ParameterError(f"unknown shape kind {self.kind!r}")
        if self.size < 0 or (self.kind != "disk" and self.size < 1):
            raise ParameterError("size must be positive (disk may be 0)")
        if self.canvas < 8:
            raise ParameterError("canvas must be at least 8 px")
        if self.size * 2 >= self.canvas:
            raise ParameterError("shape does not fit the canvas")
        if self.scale < 1:
            raise ParameterError("scale must be a positive integer factor")
        if self.noise < 0:
            raise ParameterError("noise must be nonnegative")

    @property
    def label(self) -> str:
        return SHAPE_CLASS[self.kind]


def _polygon_mask(vertices, xs, ys) -> np.ndarray:
    """Even-odd rule point-in-polygon over coordinate grids."""
    inside = np.zeros(xs.shape, dtype=bool)
    x0, y0 = vertices[-1]
    for x1, y1 in vertices:
        crosses = (y0 > ys) != (y1 > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (xs < xint)
        x0, y0 = x1, y1
    return inside


def _base_mask(spec: SyntheticShapeSpec) -> np.ndarray:
    c = spec.canvas // 2
    ys, xs = np.mgrid[0:spec.canvas, 0:spec.canvas]
    x = (xs - c).astype(np.float64)
    y = (c - ys).astype(np.float64)  # y up
    s = float(spec.size)
    if spec.kind == "disk":
        return x * x + y * y <= s * s
    if spec.kind == "ellipse":
        return (x / s) ** 2 + (y / (0.62 * s)) ** 2 <= 1.0
    verts = _TRIANGLE if spec.kind == "triangle" else _FIN
    return _polygon_mask([(vx * s, vy * s) for vx, vy in verts], x, y)


def _shift(mask: np.ndarray, dx: int, dy: int) -> np.ndarray:
    rows, cols = np.nonzero(mask)
    h, w = mask.shape
    cols = cols + dx
    rows = rows - dy  # dy > 0 moves the shape up
    if cols.min() < 0 or cols.max() >= w or rows.min() < 0 or rows.max() >= h:
        raise ParameterError("translation pushes the shape off the canvas")
    out = np.zeros_like(mask)
    out[rows, cols] = True
    return out


def generate_synthetic(spec: SyntheticShapeSpec, rng_seed: int = 0) -> tuple[GrayImage, str]:
    spec.validate()
    mask = _base_mask(spec)
    if not mask.any():
        # degenerate radius keeps a single centre pixel
        mask[spec.canvas // 2, spec.canvas // 2] = True
    if spec.scale > 1:
        mask = np.kron(mask, np.ones((spec.scale, spec.scale), dtype=bool))
    mask = np.rot90(mask, spec.rotate_quarters % 4)
    if spec.translate != (0, 0):
        mask = _shift(mask, *spec.translate)
    pixels = mask.astype(np.float64)
    if spec.noise > 0:
        rng = np.random.default_rng(rng_seed)
        pixels = np.clip(pixels + rng.normal(0.0, spec.noise, pixels.shape), 0.0, 1.0)
    return GrayImage(pixels), spec.label
