import numpy as np
import pytest

import naive_reference as naive
from texnoise import (
    GrayImage,
    ImageFormatError,
    NoiseSpec,
    add_gaussian_noise,
    decode_image,
    load_pgm,
    load_png,
    noise_field,
    resize_bilinear,
    save_pgm,
)


def random_image(rng, h, w):
    return GrayImage(rng.random((h, w)))


class TestGrayImage:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0.0, 1.5]]))
        with pytest.raises(ValueError):
            GrayImage(np.array([[-0.1]]))

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros(4))
        with pytest.raises(ValueError):
            GrayImage(np.zeros((2, 2, 2)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0.5, np.nan]]))

    def test_pixels_are_read_only_copies(self):
        src = np.zeros((3, 3))
        img = GrayImage(src)
        src[0, 0] = 1.0
        assert img.pixels[0, 0] == 0.0
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 0.5


class TestPgm:
    def test_load_simple(self):
        data = b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64])
        img = load_pgm(data)
        assert (img.width, img.height) == (2, 2)
        assert np.array_equal(
            img.pixels, np.array([[0.0, 1.0], [128 / 255, 64 / 255]])
        )

    def test_header_comments_and_whitespace(self):
        data = b"P5 # comment\n# another\n 2\t1 # trailing\n255\n" + bytes([7, 9])
        img = load_pgm(data)
        assert img.pixels.shape == (1, 2)
        assert img.pixels[0, 1] == 9 / 255

    def test_rejects_large_maxval(self):
        data = b"P5\n1 1\n65535\n\x00\x00"
        with pytest.raises(ImageFormatError, match="unsupported maxval"):
            load_pgm(data)

    def test_rejects_other_magic(self):
        with pytest.raises(ImageFormatError, match="unsupported magic"):
            load_pgm(b"P2\n1 1\n255\n0")
        with pytest.raises(ImageFormatError, match="unsupported magic"):
            decode_image(b"GIF89a....")

    def test_rejects_truncated_payload(self):
        with pytest.raises(ImageFormatError, match="truncated pixel payload"):
            load_pgm(b"P5\n2 2\n255\n\x00\x01\x02")

    def test_rejects_trailing_data(self):
        with pytest.raises(ImageFormatError, match="trailing data"):
            load_pgm(b"P5\n1 1\n255\n\x00\x01")

    def test_rejects_malformed_header(self):
        with pytest.raises(ImageFormatError, match="malformed header"):
            load_pgm(b"P5\nab 2\n255\n\x00\x00")
        with pytest.raises(ImageFormatError, match="malformed header"):
            load_pgm(b"P5\n2")

    def test_save_quantization(self):
        assert save_pgm(GrayImage(np.array([[0.5]])))[-1] == 128
        assert save_pgm(GrayImage(np.array([[1.0]])))[-1] == 255
        assert save_pgm(GrayImage(np.array([[0.0]])))[-1] == 0

    def test_round_trip_bytes_identical(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            h, w = rng.integers(1, 12, 2)
            raw = rng.integers(0, 256, (h, w), dtype=np.uint8)
            data = f"P5\n{w} {h}\n255\n".encode() + raw.tobytes()
            assert save_pgm(load_pgm(data)) == data

    def test_quantization_idempotent(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            img = random_image(rng, 6, 5)
            once = save_pgm(img)
            twice = save_pgm(load_pgm(once))
            assert once == twice


class TestPng:
    def test_round_trip_via_pillow(self):
        import io

        from PIL import Image

        rng = np.random.default_rng(3)
        raw = rng.integers(0, 256, (9, 7), dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(raw, mode="L").save(buf, format="PNG")
        img = decode_image(buf.getvalue())
        assert np.array_equal(img.pixels, raw / 255.0)

    def test_rejects_non_grayscale(self):
        import io

        from PIL import Image

        buf = io.BytesIO()
        Image.new("RGB", (4, 4)).save(buf, format="PNG")
        with pytest.raises(ImageFormatError, match="unsupported PNG mode"):
            load_png(buf.getvalue())


class TestResize:
    def test_identity_is_bitwise(self):
        rng = np.random.default_rng(1)
        img = random_image(rng, 10, 8)
        out = resize_bilinear(img, 8, 10)
        assert out is img

    def test_corner_aligned_midpoint(self):
        img = GrayImage(np.array([[0.0, 1.0]]))
        out = resize_bilinear(img, 3, 1)
        assert np.array_equal(out.pixels, np.array([[0.0, 0.5, 1.0]]))

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(2)
        img = random_image(rng, 8, 8)
        out = resize_bilinear(img, 16, 16)
        expected = naive.resize_bilinear(img.pixels, 16, 16)
        assert np.allclose(out.pixels, expected, atol=1e-12, rtol=0)

    def test_downscale_and_single_pixel(self):
        rng = np.random.default_rng(4)
        img = random_image(rng, 9, 9)
        out = resize_bilinear(img, 4, 3)
        expected = naive.resize_bilinear(img.pixels, 4, 3)
        assert np.allclose(out.pixels, expected, atol=1e-12, rtol=0)
        one = resize_bilinear(img, 1, 1)
        assert one.pixels.shape == (1, 1)

    def test_rejects_zero_dimension(self):
        img = GrayImage(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            resize_bilinear(img, 0, 3)

    def test_output_in_range(self):
        rng = np.random.default_rng(5)
        img = random_image(rng, 7, 7)
        out = resize_bilinear(img, 23, 5)
        assert out.pixels.min() >= 0.0 and out.pixels.max() <= 1.0


class TestNoise:
    def test_level_zero_is_identity(self):
        rng = np.random.default_rng(6)
        img = random_image(rng, 10, 10)
        out = add_gaussian_noise(img, NoiseSpec(0.0, 123))
        assert out is img

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(9)
        img = random_image(rng, 20, 20)
        spec = NoiseSpec(0.007, 42)
        a = add_gaussian_noise(img, spec)
        b = add_gaussian_noise(img, spec)
        assert np.array_equal(a.pixels, b.pixels)
        c = add_gaussian_noise(img, NoiseSpec(0.007, 43))
        assert not np.array_equal(a.pixels, c.pixels)

    def test_output_in_range(self):
        img = GrayImage(np.full((50, 50), 0.5))
        out = add_gaussian_noise(img, NoiseSpec(0.8859, 0))
        assert out.pixels.min() >= 0.0 and out.pixels.max() <= 1.0

    def test_mid_gray_variance_matches_level(self):
        img = GrayImage(np.full((100, 100), 0.5))
        out = add_gaussian_noise(img, NoiseSpec(0.007, 11))
        delta = out.pixels - img.pixels
        assert abs(delta.var(ddof=1) / 0.007 - 1.0) < 0.10

    def test_heavy_noise_clamps_but_keeps_mean(self):
        img = GrayImage(np.full((100, 100), 0.5))
        out = add_gaussian_noise(img, NoiseSpec(0.8859, 21))
        at_bounds = (out.pixels == 0.0).mean() + (out.pixels == 1.0).mean()
        assert at_bounds > 0.2
        assert abs(out.pixels.mean() - 0.5) < 0.02

    def test_field_variance_all_levels(self):
        for level in (0.0006, 0.007, 0.0785, 0.8859):
            field = noise_field((100, 100), NoiseSpec(level, 5))
            assert abs(field.var(ddof=1) / level - 1.0) < 0.10

    def test_stddev_reinterpretation(self):
        field = noise_field((200, 200), NoiseSpec(0.3, 5, level_is_stddev=True))
        assert abs(field.var(ddof=1) / 0.09 - 1.0) < 0.10

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(-0.1, 0)
        with pytest.raises(ValueError):
            NoiseSpec(0.1, -1)
        with pytest.raises(ValueError):
            NoiseSpec(0.1, 2**64)
