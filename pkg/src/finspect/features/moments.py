"""Geometric moments and complex moment invariant products.

A product spec is a list of factors (a, b, c). The feature emitted for it
is |prod_i C_(a_i b_i)^(c_i)| / C_00^(sum_i w_i) with w_i = c_i(a_i+b_i+2)/2,
where C_ab is the central complex moment

    C_ab = sum_xy [(x-x_c) + j(y-y_c)]^a [(x-x_c) - j(y-y_c)]^b g(x, y).

Rotation invariance requires sum_i c_i(a_i - b_i) = 0; the scale powers
cancel by construction of w_i; centering handles translation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BasisError, ParameterError, ZeroMassError
from ..raster import GrayImage, as_pixels
from . import FeatureVector


def geometric_moment(img: GrayImage | np.ndarray, a: int, b: int, central: bool = False) -> float:
    """Discrete moment sum_xy x^a y^b g(x, y); x runs over columns, y over rows."""
    if a < 0 or b < 0:
        raise ParameterError("moment orders must be nonnegative")
    g = as_pixels(img)
    ys, xs = np.mgrid[0 : g.shape[0], 0 : g.shape[1]].astype(np.float64)
    if central:
        xc, yc = centroid(img)
        xs = xs - xc
        ys = ys - yc
    return float(np.sum(xs**a * ys**b * g))


def centroid(img: GrayImage | np.ndarray) -> tuple[float, float]:
    """Intensity centroid (mu10/mu00, mu01/mu00)."""
    g = as_pixels(img)
    mass = g.sum()
    if mass <= 0.0:
        raise ZeroMassError("centroid undefined for a zero-mass image")
    ys, xs = np.mgrid[0 : g.shape[0], 0 : g.shape[1]]
    return float((xs * g).sum() / mass), float((ys * g).sum() / mass)


def complex_moment(img: GrayImage | np.ndarray, a: int, b: int) -> complex:
    """Central complex moment C_ab of order a + b."""
    if a < 0 or b < 0:
        raise ParameterError("moment orders must be nonnegative")
    g = as_pixels(img)
    xc, yc = centroid(img)
    ys, xs = np.mgrid[0 : g.shape[0], 0 : g.shape[1]].astype(np.float64)
    u = (xs - xc) + 1j * (ys - yc)
    v = (xs - xc) - 1j * (ys - yc)
    return complex(np.sum(u**a * v**b * g))


@dataclass(frozen=True)
class MomentProductSpec:
    """Factors (a, b, c): moment orders a, b and the exponent c of that factor."""

    factors: tuple[tuple[int, int, float], ...]
    name: str = ""

    def validate(self) -> None:
        if not self.factors:
            raise BasisError("a moment product needs at least one factor")
        balance = 0.0
        for a, b, c in self.factors:
            if a < 0 or b < 0:
                raise BasisError(f"moment orders must be nonnegative, got ({a}, {b})")
            balance += c * (a - b)
        if abs(balance) > 1e-12:
            raise BasisError(
                f"product {self.label()} violates sum c(a - b) = 0 (got {balance!r}); "
                "it cannot be rotation invariant"
            )

    def label(self) -> str:
        if self.name:
            return self.name
        return " ".join(
            f"M{a}{b}" + (f"^{c:g}" if c != 1 else "") for a, b, c in self.factors
        )


DEFAULT_CMI_BASIS: tuple[MomentProductSpec, ...] = (
    MomentProductSpec(((0, 2, 1.0), (2, 0, 1.0))),
    MomentProductSpec(((1, 2, 2.0), (2, 0, 1.0))),
    MomentProductSpec(((1, 2, 1.0), (2, 1, 1.0))),
    MomentProductSpec(((2, 1, 2.0), (0, 2, 1.0))),
    MomentProductSpec(((1, 3, 3.0), (4, 2, 3.0))),
    MomentProductSpec(((3, 2, 2.0), (2, 3, 2.0))),
)


def cmi_features(img: GrayImage | np.ndarray, basis: tuple[MomentProductSpec, ...] | None = None) -> FeatureVector:
    """Moduli of the normalized complex moment products over the basis."""
    if basis is None:
        basis = DEFAULT_CMI_BASIS
    for spec in basis:
        spec.validate()

    g = as_pixels(img)
    mass = float(g.sum())
    if mass <= 0.0:
        raise ZeroMassError("complex moment invariants undefined for a zero-mass image")
    xc, yc = centroid(img)
    ys, xs = np.mgrid[0 : g.shape[0], 0 : g.shape[1]].astype(np.float64)
    u = (xs - xc) + 1j * (ys - yc)
    v = np.conj(u)

    needed = {(a, b) for spec in basis for a, b, _ in spec.factors}
    cache: dict[tuple[int, int], complex] = {}
    for a, b in needed:
        cache[(a, b)] = complex(np.sum(u**a * v**b * g))

    values = []
    for spec in basis:
        product = complex(1.0)
        weight = 0.0
        for a, b, c in spec.factors:
            product *= cache[(a, b)] ** c
            weight += c * (a + b + 2) / 2.0
        values.append(abs(product) / mass**weight)
    return FeatureVector(
        extractor="CMI",
        descriptor=tuple(spec.label() for spec in basis),
        values=np.asarray(values),
    )
