"""Noise removal, Otsu binarization, and random-walker segmentation.

The segmentation path is: median filter, Otsu threshold, binarize, derive
one seed per 4-connected foreground component plus a background seed set,
then solve the random-walker Dirichlet problem on the pixel graph and
assign each pixel to its argmax shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.ndimage
import scipy.sparse
import scipy.sparse.linalg

from ._kernels import median_filter_core
from .errors import (
    DegenerateHistogramError,
    EmptyForegroundError,
    ParameterError,
    ShapeError,
    SolverError,
)
from .raster import BinaryImage, GrayImage, encode_pgm

SIGMA_FLOOR = 1e-6
RESIDUAL_TOL = 1e-8


def median_filter(img: GrayImage, side: int = 3) -> GrayImage:
    """Replace each pixel by the median of its side x side neighborhood.

    Borders replicate the edge row/column, so output dimensions match the
    input and no intensity value outside the input set is ever produced.
    """
    if side < 1 or side % 2 == 0:
        raise ParameterError(f"median window side must be odd and positive, got {side}")
    if side > min(img.width, img.height):
        raise ParameterError(
            f"median window {side} exceeds image extent {img.width}x{img.height}"
        )
    if side == 1:
        return img
    pad = side // 2
    padded = np.pad(img.pixels, pad, mode="edge")
    return GrayImage(median_filter_core(padded, side))


@dataclass(frozen=True)
class OtsuResult:
    theta: float
    sigma_in: float
    sigma_out: float


def histogram256(img: GrayImage) -> np.ndarray:
    """Counts over 256 bins; intensity g lands in bin round(g * 255)."""
    levels = np.floor(img.pixels * 255.0 + 0.5).astype(np.int64)
    return np.bincount(levels.ravel(), minlength=256)


def otsu_threshold(img: GrayImage) -> OtsuResult:
    """Threshold maximizing the interclass variance.

    sigma_out(t) = w_b (mu_b - mu)^2 + w_a (mu_a - mu)^2 where the
    background class is every bin <= t. Tied optima are averaged. The
    complementary intraclass variance is returned alongside so the
    decomposition sigma_in + sigma_out = total variance can be checked.
    """
    counts = histogram256(img)
    if np.count_nonzero(counts) < 2:
        raise DegenerateHistogramError(
            "single-valued image: no threshold separates background from foreground"
        )
    p = counts.astype(np.float64) / counts.sum()
    v = np.arange(256, dtype=np.float64) / 255.0
    mu = float(p @ v)

    w_b = np.cumsum(p)
    first_moment = np.cumsum(p * v)
    w_a = 1.0 - w_b
    with np.errstate(divide="ignore", invalid="ignore"):
        mu_b = np.where(w_b > 0, first_moment / w_b, 0.0)
        mu_a = np.where(w_a > 0, (mu - first_moment) / w_a, 0.0)
    sigma_out = np.where(w_b > 0, w_b * (mu_b - mu) ** 2, 0.0) + np.where(
        w_a > 0, w_a * (mu_a - mu) ** 2, 0.0
    )

    best = sigma_out.max()
    tied = np.flatnonzero(sigma_out == best)
    theta = float(tied.mean() / 255.0)

    t0 = int(tied[0])
    below = v <= v[t0]
    var_b = float(p[below] @ (v[below] - mu_b[t0]) ** 2)
    var_a = float(p[~below] @ (v[~below] - mu_a[t0]) ** 2) if w_a[t0] > 0 else 0.0
    return OtsuResult(theta=theta, sigma_in=var_b + var_a, sigma_out=float(sigma_out[t0]))


def binarize(img: GrayImage, theta: float) -> BinaryImage:
    """h(x, y) = 0 where g <= theta, else 1."""
    if not 0.0 <= theta <= 1.0:
        raise ParameterError(f"threshold must lie in [0, 1], got {theta}")
    return BinaryImage((img.pixels > theta).astype(np.uint8))


@dataclass(frozen=True)
class PixelGraph:
    height: int
    width: int
    sigma: float
    laplacian: scipy.sparse.csr_matrix

    @property
    def vertex_count(self) -> int:
        return self.height * self.width


def build_pixel_graph(img: GrayImage) -> PixelGraph:
    """4-neighborhood graph with weights eta_ij = exp(-(g_i - g_j)^2 / sigma).

    sigma is the intensity variance of the image, floored at 1e-6. The
    Laplacian carries the degree on the diagonal and -eta off it.
    """
    g = img.pixels
    h, w = g.shape
    n = h * w
    if n < 2:
        raise ShapeError("pixel graph needs at least 2 pixels")
    sigma = max(float(g.var()), SIGMA_FLOOR)

    idx = np.arange(n).reshape(h, w)
    rows = []
    cols = []
    vals = []
    if w > 1:
        diff = g[:, 1:] - g[:, :-1]
        rows.append(idx[:, :-1].ravel())
        cols.append(idx[:, 1:].ravel())
        vals.append(np.exp(-(diff**2) / sigma).ravel())
    if h > 1:
        diff = g[1:, :] - g[:-1, :]
        rows.append(idx[:-1, :].ravel())
        cols.append(idx[1:, :].ravel())
        vals.append(np.exp(-(diff**2) / sigma).ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    weights = scipy.sparse.coo_matrix(
        (np.concatenate([vals, vals]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    ).tocsr()
    degree = np.asarray(weights.sum(axis=1)).ravel()
    laplacian = scipy.sparse.diags(degree) - weights
    return PixelGraph(height=h, width=w, sigma=sigma, laplacian=laplacian.tocsr())


@dataclass(frozen=True)
class ShapeCrop:
    label: int
    image: GrayImage
    bbox: tuple[int, int, int, int]  # y0, x0, y1, x1 inclusive-exclusive
    pixel_count: int


@dataclass(frozen=True)
class Segmentation:
    labels: np.ndarray          # (h, w) argmax shape index per pixel
    gamma: np.ndarray           # (h, w, s) per-shape probabilities
    shapes: tuple[ShapeCrop, ...]


def _crops(img: GrayImage, labels: np.ndarray, shape_count: int) -> tuple[ShapeCrop, ...]:
    out = []
    for j in range(shape_count):
        mask = labels == j
        count = int(mask.sum())
        if count == 0:
            continue
        ys, xs = np.nonzero(mask)
        y0, y1 = int(ys.min()), int(ys.max()) + 1
        x0, x1 = int(xs.min()), int(xs.max()) + 1
        crop = np.where(mask, img.pixels, 0.0)[y0:y1, x0:x1]
        out.append(ShapeCrop(label=j, image=GrayImage(crop), bbox=(y0, x0, y1, x1), pixel_count=count))
    return tuple(out)


def random_walker_segment(img: GrayImage, seeds: list[np.ndarray]) -> Segmentation:
    """Per-shape Dirichlet solves on the pixel graph.

    For shape j the seeded pixels of set j are held at 1, all other seeds
    at 0, and the Laplacian system is solved for the free pixels. Each
    pixel is assigned to the argmax shape; ties pick the lower index.
    """
    seed_sets = [np.asarray(s, dtype=np.int64).ravel() for s in seeds]
    if len(seed_sets) < 2:
        raise ParameterError("need at least 2 seed sets")
    for s in seed_sets:
        if s.size == 0:
            raise ParameterError("seed sets must be nonempty")
    all_seeds = np.concatenate(seed_sets)
    if np.unique(all_seeds).size != all_seeds.size:
        raise ParameterError("seed sets overlap")

    graph = build_pixel_graph(img)
    n = graph.vertex_count
    if all_seeds.min() < 0 or all_seeds.max() >= n:
        raise ParameterError("seed index out of range")
    s_count = len(seed_sets)

    seeded_mask = np.zeros(n, dtype=bool)
    seeded_mask[all_seeds] = True
    free = np.flatnonzero(~seeded_mask)

    gamma = np.zeros((n, s_count), dtype=np.float64)
    for j, s in enumerate(seed_sets):
        gamma[s, j] = 1.0

    if free.size:
        L = graph.laplacian
        L_uu = L[free][:, free].tocsc()
        L_us = L[free][:, all_seeds]
        boundary = np.zeros((all_seeds.size, s_count))
        offset = 0
        for j, s in enumerate(seed_sets):
            boundary[offset : offset + s.size, j] = 1.0
            offset += s.size
        rhs = -L_us @ boundary
        try:
            solver = scipy.sparse.linalg.splu(L_uu)
            solution = solver.solve(rhs)
        except RuntimeError as exc:
            raise SolverError(f"reduced system is singular: {exc}") from exc
        if not np.isfinite(solution).all():
            raise SolverError("reduced system produced non-finite probabilities")
        residual = L_uu @ solution - rhs
        scale = max(float(np.abs(rhs).max()), 1.0)
        if float(np.abs(residual).max()) / scale > RESIDUAL_TOL:
            raise SolverError("linear solve exceeded the 1e-8 relative residual budget")
        gamma[free] = np.clip(solution, 0.0, 1.0)

    labels = np.argmax(gamma, axis=1).reshape(graph.height, graph.width)
    gamma_grid = gamma.reshape(graph.height, graph.width, s_count)
    return Segmentation(labels=labels, gamma=gamma_grid, shapes=_crops(img, labels, s_count))


def derive_seeds(binary: BinaryImage) -> list[np.ndarray]:
    """Seed sets from a binary image.

    One single-pixel seed per 4-connected foreground component (the pixel
    nearest its component centroid), then every pixel of the largest
    background component as the final set.
    """
    bits = binary.bits
    if not bits.any():
        raise EmptyForegroundError("binary image has no foreground pixels")
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    fg_labels, fg_count = scipy.ndimage.label(bits, structure=structure)
    w = bits.shape[1]

    seeds: list[np.ndarray] = []
    for comp in range(1, fg_count + 1):
        ys, xs = np.nonzero(fg_labels == comp)
        cy, cx = ys.mean(), xs.mean()
        nearest = np.argmin((ys - cy) ** 2 + (xs - cx) ** 2)
        seeds.append(np.array([ys[nearest] * w + xs[nearest]], dtype=np.int64))

    bg_labels, bg_count = scipy.ndimage.label(1 - bits, structure=structure)
    if bg_count == 0:
        raise ParameterError("image has no background pixels to seed")
    sizes = scipy.ndimage.sum_labels(np.ones_like(bits), bg_labels, index=range(1, bg_count + 1))
    largest = 1 + int(np.argmax(sizes))
    ys, xs = np.nonzero(bg_labels == largest)
    seeds.append((ys * w + xs).astype(np.int64))
    return seeds


def segment_image(img: GrayImage, median_side: int = 3) -> tuple[Segmentation, list[int]]:
    """Full preprocessing chain. Returns the segmentation and the foreground labels."""
    smoothed = median_filter(img, median_side)
    theta = otsu_threshold(smoothed).theta
    binary = binarize(smoothed, theta)
    seeds = derive_seeds(binary)
    seg = random_walker_segment(smoothed, seeds)
    fg = [crop.label for crop in seg.shapes if crop.label != len(seeds) - 1]
    return seg, fg


def export_segmentation(seg: Segmentation, directory: str | Path,
                        labels: list[int] | None = None) -> Path:
    """Write one cropped PGM per shape plus a JSON sidecar. Returns the sidecar path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    wanted = set(labels) if labels is not None else None
    records = []
    for crop in seg.shapes:
        if wanted is not None and crop.label not in wanted:
            continue
        name = f"shape_{crop.label:02d}.pgm"
        (directory / name).write_bytes(encode_pgm(crop.image))
        records.append(
            {
                "shape": crop.label,
                "file": name,
                "bbox": list(crop.bbox),
                "pixel_count": crop.pixel_count,
            }
        )
    sidecar = directory / "segments.json"
    sidecar.write_text(json.dumps({"shapes": records}, indent=2, sort_keys=True) + "\n")
    return sidecar
