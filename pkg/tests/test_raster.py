import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finspect import (GrayImage, GrayscaleCoefficients, ParameterError, PnmDecodeError,
                      RgbImage, ShapeError, decode_image, encode_pgm, to_grayscale)


class TestDecode:
    def test_p2_with_comments(self):
        raw = b"P2\n# made by hand\n3 2 # dims\n255\n0 128 255\n64 32 16\n"
        img = decode_image(raw)
        assert isinstance(img, GrayImage)
        assert img.pixels.shape == (2, 3)
        assert img.pixels[0, 2] == 1.0
        assert img.pixels[0, 1] == pytest.approx(128 / 255)

    def test_p5_binary(self):
        raw = b"P5 3 2 255\n" + bytes([0, 128, 255, 64, 32, 16])
        img = decode_image(raw)
        assert img.pixels.shape == (2, 3)
        assert img.pixels[1, 0] == pytest.approx(64 / 255)

    def test_p3_and_p6_agree(self):
        samples = [10, 20, 30, 40, 50, 60]
        ascii_raw = b"P3 2 1 255 " + b" ".join(str(s).encode() for s in samples)
        bin_raw = b"P6 2 1 255\n" + bytes(samples)
        a, b = decode_image(ascii_raw), decode_image(bin_raw)
        assert isinstance(a, RgbImage) and isinstance(b, RgbImage)
        assert np.array_equal(a.pixels, b.pixels)

    def test_bad_magic_offset(self):
        with pytest.raises(PnmDecodeError) as e:
            decode_image(b"P7 1 1 255 0")
        assert e.value.offset == 0
        assert "byte 0" in str(e.value)

    def test_maxval_must_be_255(self):
        raw = b"P2 2 1 65535 0 1"
        with pytest.raises(PnmDecodeError) as e:
            decode_image(raw)
        assert e.value.offset == raw.index(b"65535")

    def test_truncated_body_names_end(self):
        raw = b"P2 2 2 255 0 1 2"
        with pytest.raises(PnmDecodeError) as e:
            decode_image(raw)
        assert e.value.offset == len(raw)

    def test_truncated_binary_payload(self):
        raw = b"P5 4 4 255\n" + bytes(7)
        with pytest.raises(PnmDecodeError):
            decode_image(raw)

    def test_sample_out_of_range_names_token(self):
        raw = b"P2 2 1 255 0 300"
        with pytest.raises(PnmDecodeError) as e:
            decode_image(raw)
        assert e.value.offset == raw.index(b"300")

    def test_nonnumeric_header(self):
        with pytest.raises(PnmDecodeError):
            decode_image(b"P2 x 1 255 0")

    def test_comment_requires_header_position(self):
        # comments are a header feature; the P2 body is bare samples
        with pytest.raises(PnmDecodeError):
            decode_image(b"P2 1 2 255 0 # nope\n1")


class TestEncode:
    def test_p2_format_and_rounding(self):
        img = GrayImage(np.array([[0.0, 1.0, 0.5]]))
        raw = encode_pgm(img)
        assert raw.startswith(b"P2")
        tokens = raw.split()
        assert tokens[1:4] == [b"3", b"1", b"255"]
        assert tokens[4:] == [b"0", b"255", b"128"]  # floor(f*255 + 0.5)

    def test_roundtrip_error_bound(self, rng):
        img = GrayImage(rng.random((13, 9)))
        back = decode_image(encode_pgm(img))
        assert np.abs(back.pixels - img.pixels).max() <= 1 / 510 + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_roundtrip_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        img = GrayImage(rng.random((rng.integers(1, 8), rng.integers(1, 8))))
        once = decode_image(encode_pgm(img))
        twice = decode_image(encode_pgm(once))
        assert np.array_equal(once.pixels, twice.pixels)


class TestGrayscale:
    def test_defaults_luma(self):
        px = np.zeros((1, 1, 3), dtype=np.uint8)
        px[0, 0] = (255, 0, 0)
        g = to_grayscale(RgbImage(px))
        assert g.pixels[0, 0] == pytest.approx(0.299)

    def test_coefficients_must_sum_to_one(self):
        with pytest.raises(ParameterError):
            to_grayscale(RgbImage(np.zeros((1, 1, 3), np.uint8)),
                         GrayscaleCoefficients(0.5, 0.5, 0.5, 255))

    def test_mu_one_rescaled(self):
        px = np.full((2, 2, 3), 255, dtype=np.uint8)
        g = to_grayscale(RgbImage(px), GrayscaleCoefficients(mu=1))
        assert np.allclose(g.pixels, 1.0)

    def test_output_clipped(self):
        px = np.full((1, 1, 3), 255, dtype=np.uint8)
        g = to_grayscale(RgbImage(px))
        assert g.pixels.max() <= 1.0


class TestContainers:
    def test_gray_rejects_out_of_range(self):
        with pytest.raises(ShapeError):
            GrayImage(np.array([[1.5]]))

    def test_gray_rejects_empty(self):
        with pytest.raises(ShapeError):
            GrayImage(np.empty((0, 3)))

    def test_pixels_frozen(self):
        img = GrayImage(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0
