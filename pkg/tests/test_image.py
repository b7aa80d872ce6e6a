import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from pwmf.image import (
    GrayImage,
    PatchKernel,
    mirror_index,
    mirror_pad,
    patch,
    patch_distance2,
    quantize,
    read_pgm,
    write_pgm,
)

SQUARE = np.arange(1, 10, dtype=float).reshape(3, 3)


def test_gray_image_rejects_non_finite():
    with pytest.raises(ValueError):
        GrayImage(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        GrayImage(np.ones(4))


def test_gray_image_dimensions():
    img = GrayImage(np.zeros((3, 5)))
    assert (img.width, img.height) == (5, 3)
    assert img.pixels.size == img.width * img.height


class TestMirrorPad:
    def test_single_pixel(self):
        assert np.array_equal(mirror_pad(np.array([[5.0]]), 1).pixels, np.full((3, 3), 5.0))

    def test_zero_radius_is_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(mirror_pad(a, 0).pixels, a)

    def test_two_by_two(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        expected = [[4, 3, 4, 3], [2, 1, 2, 1], [4, 3, 4, 3], [2, 1, 2, 1]]
        assert np.array_equal(mirror_pad(a, 1).pixels, expected)

    def test_matches_scalar_reference(self, rng):
        a = rng.uniform(0, 255, (5, 7))
        r = 3
        padded = mirror_pad(a, r).pixels
        ref = [[oracles.pix(a, y - r, x - r) for x in range(7 + 2 * r)] for y in range(5 + 2 * r)]
        assert np.array_equal(padded, ref)

    def test_radius_too_large(self):
        with pytest.raises(ValueError, match="pad radius too large"):
            mirror_pad(np.zeros((4, 6)), 4)

    @given(arrays(np.float64, st.tuples(st.integers(2, 6), st.integers(2, 6)),
                  elements=st.floats(0, 255)), st.integers(0, 1))
    def test_crop_after_pad_is_identity(self, a, r):
        padded = mirror_pad(a, r).pixels
        assert np.array_equal(padded[r:r + a.shape[0], r:r + a.shape[1]], a)


def test_mirror_index_agrees_with_walk():
    for n in (1, 2, 3, 7):
        for k in range(-20, 20):
            assert mirror_index(k, n) == oracles.mirror(k, n)


class TestPatch:
    def test_constant(self):
        assert np.array_equal(patch(np.full((4, 4), 7.0), (1, 2), 3), [7.0] * 9)

    def test_center_is_lexicographic(self):
        assert np.array_equal(patch(SQUARE, (1, 1), 3), np.arange(1, 10))

    def test_corner_is_mirrored(self):
        assert np.array_equal(patch(SQUARE, (0, 0), 3), [5, 4, 5, 2, 1, 2, 5, 4, 5])

    def test_even_diameter_rejected(self):
        with pytest.raises(ValueError):
            patch(SQUARE, (1, 1), 2)


class TestPatchDistance:
    def test_self_distance(self, rng):
        a = rng.uniform(0, 255, (6, 6))
        assert patch_distance2(a, (2, 3), (2, 3), PatchKernel.uniform(3)) == 0.0

    def test_constant_offset(self):
        a = np.zeros((3, 6))
        a[:, 3:] = 2.0
        # patches at columns 1 and 4 differ by 2 everywhere
        assert patch_distance2(a, (1, 1), (1, 4), PatchKernel.uniform(3)) == pytest.approx(4.0)

    def test_single_position(self):
        a = np.zeros((3, 6))
        a[0, 3] = 3.0
        by_hand = sum((p - q) ** 2 for p, q in zip(patch(a, (1, 1), 3), patch(a, (1, 4), 3))) / 9
        assert by_hand == 1.0
        assert patch_distance2(a, (1, 1), (1, 4), PatchKernel.uniform(3)) == pytest.approx(1.0)

    @settings(max_examples=30)
    @given(arrays(np.float64, (5, 5), elements=st.floats(0, 255)),
           st.tuples(st.integers(0, 4), st.integers(0, 4)),
           st.tuples(st.integers(0, 4), st.integers(0, 4)),
           st.floats(-100, 100))
    def test_properties(self, a, i, j, c):
        k = PatchKernel.uniform(3)
        dist = patch_distance2(a, i, j, k)
        euclid = float(np.sum((patch(a, i, 3) - patch(a, j, 3)) ** 2))
        assert dist * 9 == pytest.approx(euclid, rel=1e-12, abs=1e-9)
        assert patch_distance2(a + c, i, j, k) == pytest.approx(dist, rel=1e-9, abs=1e-6)
        assert patch_distance2(a, j, i, k) == pytest.approx(dist, rel=1e-12, abs=1e-12)

    def test_exclude_center_zeroes_center_weight(self):
        k = PatchKernel.gaussian(5, 1.0, exclude_center=True)
        assert k.weights[2, 2] == 0.0
        assert k.weights[0, 0] == pytest.approx(np.exp(-2.0))

    def test_kernel_validation(self):
        with pytest.raises(ValueError):
            PatchKernel(3, -np.ones((3, 3)))
        with pytest.raises(ValueError):
            PatchKernel.uniform(1)
        with pytest.raises(ValueError):
            PatchKernel(3, np.eye(3) * 0)


class TestPgm:
    def test_round_trip_is_bit_exact(self, tmp_path, rng):
        a = rng.integers(0, 256, (7, 11)).astype(float)
        write_pgm(tmp_path / "a.pgm", a)
        assert np.array_equal(read_pgm(tmp_path / "a.pgm").pixels, a)
        data = (tmp_path / "a.pgm").read_bytes()
        assert data.startswith(b"P5\n11 7\n255\n")

    def test_quantize_clamps_and_rounds_half_away(self):
        q = quantize(np.array([[-3.0, 0.5, 1.49, 254.5, 300.0]]))
        assert q.tolist() == [[0, 1, 1, 255, 255]]

    def test_header_comments_and_plain_format(self, tmp_path):
        (tmp_path / "c.pgm").write_bytes(b"P5\n# comment\n2 1\n255\n\x07\xff")
        assert read_pgm(tmp_path / "c.pgm").pixels.tolist() == [[7.0, 255.0]]
        (tmp_path / "p.pgm").write_bytes(b"P2\n2 2\n255\n1 2\n3 4\n")
        assert read_pgm(tmp_path / "p.pgm").pixels.tolist() == [[1, 2], [3, 4]]

    def test_truncated_raster(self, tmp_path):
        (tmp_path / "t.pgm").write_bytes(b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(ValueError):
            read_pgm(tmp_path / "t.pgm")
