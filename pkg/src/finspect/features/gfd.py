"""Generic Fourier descriptor.

The image is resampled onto a polar grid centred at the intensity
centroid, with 64 radial samples at radii (s + 0.5) * R_max / 64 (R_max is
the largest centroid-to-nonzero-pixel distance) and 128 angular samples.
The frequency sum is a DFT in the sample indices,

    S(rho, psi) = sum_s sum_t g(r_s, theta_t)
                  * exp(-2 pi i (rho (s + 0.5) / 64 + psi t / 128)),

so the angular phase is periodic in t and a lossless quarter-turn of the
image circularly shifts the samples, leaving every |S| unchanged. All
magnitudes are divided by |S(0, 0)|, which makes feature 0 exactly 1.
"""

from __future__ import annotations

import numpy as np

from .._kernels import polar_resample_core
from ..errors import ParameterError, ZeroMassError
from ..raster import GrayImage, as_pixels
from . import FeatureVector
from .moments import centroid

RADIAL_SAMPLES = 64
ANGULAR_SAMPLES = 128


def polar_samples(img: GrayImage | np.ndarray) -> np.ndarray:
    """Bilinear polar resampling grid used by the descriptor. Zero outside the canvas."""
    g = as_pixels(img)
    if g.sum() <= 0.0:
        raise ZeroMassError("polar resampling undefined for a zero-mass image")
    xc, yc = centroid(img)
    ys, xs = np.nonzero(g)
    r_max = float(np.sqrt((xs - xc) ** 2 + (ys - yc) ** 2).max())
    radii = (np.arange(RADIAL_SAMPLES) + 0.5) * r_max / RADIAL_SAMPLES
    thetas = 2.0 * np.pi * np.arange(ANGULAR_SAMPLES) / ANGULAR_SAMPLES
    return polar_resample_core(g, xc, yc, radii, thetas)


def gfd_features(img: GrayImage | np.ndarray, radial_count: int = 4, angular_count: int = 9) -> FeatureVector:
    """|S(rho, psi)| / |S(0, 0)| for rho < radial_count, psi < angular_count."""
    if radial_count < 1 or angular_count < 1:
        raise ParameterError("frequency counts must be at least 1")
    polar = polar_samples(img)

    s_idx = np.arange(RADIAL_SAMPLES) + 0.5
    t_idx = np.arange(ANGULAR_SAMPLES)
    rho = np.arange(radial_count)
    psi = np.arange(angular_count)
    radial_phase = np.exp(-2j * np.pi * np.outer(rho, s_idx) / RADIAL_SAMPLES)
    angular_phase = np.exp(-2j * np.pi * np.outer(psi, t_idx) / ANGULAR_SAMPLES)
    spectrum = radial_phase @ polar @ angular_phase.T

    dc = abs(spectrum[0, 0])
    if dc <= 0.0:
        raise ZeroMassError("S(0,0) vanished; magnitudes cannot be normalized")
    magnitudes = np.abs(spectrum) / dc
    descriptor = tuple(f"S({r},{p})" for r in range(radial_count) for p in range(angular_count))
    return FeatureVector(extractor="GFD", descriptor=descriptor, values=magnitudes.ravel())
