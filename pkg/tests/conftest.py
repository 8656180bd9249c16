import numpy as np
import pytest

from finspect import GrayImage, SyntheticShapeSpec, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def shape_image(kind: str, size: int, canvas: int = 192, **kw) -> GrayImage:
    img, _ = generate_synthetic(SyntheticShapeSpec(kind, size, canvas, **kw))
    return img


def random_gray(rng, lo=4, hi=20) -> GrayImage:
    h, w = rng.integers(lo, hi, 2)
    return GrayImage(rng.random((int(h), int(w))))
