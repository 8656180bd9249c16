import numpy as np
import pytest

from finspect import ParameterError, ZeroMassError, gfd_features
from finspect.features.gfd import ANGULAR_SAMPLES, RADIAL_SAMPLES, polar_samples

from conftest import shape_image


def brute_spectrum(polar, radial_count, angular_count):
    """Direct double-sum DFT over the polar sample grid."""
    out = np.zeros((radial_count, angular_count), dtype=complex)
    for rho in range(radial_count):
        for psi in range(angular_count):
            acc = 0j
            for s in range(RADIAL_SAMPLES):
                for t in range(ANGULAR_SAMPLES):
                    phase = rho * (s + 0.5) / RADIAL_SAMPLES + psi * t / ANGULAR_SAMPLES
                    acc += polar[s, t] * np.exp(-2j * np.pi * phase)
            out[rho, psi] = acc
    return out


class TestPolarSampling:
    def test_grid_shape(self):
        img = shape_image("disk", 20, canvas=64)
        polar = polar_samples(img.pixels)
        assert polar.shape == (RADIAL_SAMPLES, ANGULAR_SAMPLES)

    def test_disk_is_radius_limited(self):
        img = shape_image("disk", 20, canvas=64)
        polar = polar_samples(img.pixels)
        # intensity beyond the disk boundary must vanish; inner rings are full
        assert polar[0].min() > 0.5
        assert polar[-1].max() <= 1.0

    def test_zero_mass_rejected(self):
        with pytest.raises(ZeroMassError):
            polar_samples(np.zeros((5, 5)))


class TestGfdFeatures:
    def test_matches_brute_force_dft(self, rng):
        px = rng.random((17, 19))
        polar = polar_samples(px)
        ref = np.abs(brute_spectrum(polar, 3, 4))
        ref = (ref / ref[0, 0]).ravel()
        got = gfd_features(px, radial_count=3, angular_count=4).values
        assert np.abs(got - ref).max() < 1e-9

    def test_first_feature_is_one(self, rng):
        px = rng.random((12, 14)) + 0.01
        assert gfd_features(px).values[0] == 1.0

    def test_default_dimensions(self):
        fv = gfd_features(shape_image("triangle", 30, canvas=96).pixels)
        assert fv.values.shape == (36,)
        assert len(fv.descriptor) == 36

    def test_rotation_invariance_exact(self):
        base = shape_image("fin_polygon", 30, canvas=96).pixels
        v0 = gfd_features(base).values
        for q in (1, 2, 3):
            vq = gfd_features(np.rot90(base, q)).values
            assert np.abs(vq - v0).max() < 1e-6

    def test_translation_invariance(self):
        v0 = gfd_features(shape_image("fin_polygon", 24, canvas=96).pixels).values
        vt = gfd_features(shape_image("fin_polygon", 24, canvas=96,
                                      translate=(11, -8)).pixels).values
        assert np.abs(vt - v0).max() < 1e-2

    def test_counts_validated(self, rng):
        px = rng.random((6, 6))
        with pytest.raises(ParameterError):
            gfd_features(px, radial_count=0)
        with pytest.raises(ParameterError):
            gfd_features(px, angular_count=0)

    def test_zero_mass_rejected(self):
        with pytest.raises(ZeroMassError):
            gfd_features(np.zeros((6, 6)))

    def test_values_nonnegative(self, rng):
        vals = gfd_features(rng.random((10, 10))).values
        assert (vals >= 0).all()
