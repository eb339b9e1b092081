import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfcf.colordesc import (
    CHANNEL_NAMES,
    LbpCodeImage,
    decode_dlbp,
    derive_channels,
    dlbp_from_image,
    lbp_codes,
    lbp_rgb,
)
from hfcf.errors import DimError, SpaceError
from hfcf.tensorio import ColorSpace, RasterImage

NEIGHBORS = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def lbp_oracle(plane):
    """Brute-force bit assembly with edge replication."""
    h, w = plane.shape
    padded = np.pad(plane, 1, mode="edge")
    out = np.zeros((h, w), dtype=int)
    for i in range(h):
        for j in range(w):
            code = 0
            for bit, (dr, dc) in enumerate(NEIGHBORS):
                if padded[1 + i + dr, 1 + j + dc] >= plane[i, j]:
                    code |= 1 << bit
            out[i, j] = code
    return out


class TestLbpCodes:
    def test_constant_plane_all_255(self):
        out = lbp_codes(np.full((5, 5), 42.0))
        assert np.all(out.codes == 255)

    def test_isolated_peak_center_zero(self):
        plane = np.zeros((3, 3))
        plane[1, 1] = 100.0
        out = lbp_codes(plane)
        assert out.codes[1, 1] == 0

    def test_ramp_patch_center(self):
        plane = np.array([[10.0, 20, 30], [40, 50, 60], [70, 80, 90]])
        out = lbp_codes(plane)
        assert out.codes[1, 1] == lbp_oracle(plane)[1, 1]
        # neighbors >= 50 sit at bits 3..6 (right, then clockwise to bottom-left)
        assert out.codes[1, 1] == 0b01111000

    def test_matches_oracle_on_random(self, rng):
        plane = rng.integers(0, 256, size=(9, 7)).astype(float)
        assert np.array_equal(lbp_codes(plane).codes, lbp_oracle(plane))

    def test_codes_in_range(self, rng):
        out = lbp_codes(rng.uniform(0, 255, size=(16, 16)))
        assert out.codes.min() >= 0 and out.codes.max() <= 255

    def test_too_small_rejected(self):
        with pytest.raises(DimError):
            lbp_codes(np.zeros((2, 5)))

    @given(st.data())
    @settings(max_examples=25)
    def test_monotone_remap_invariance(self, data):
        h = data.draw(st.integers(3, 6))
        w = data.draw(st.integers(3, 6))
        vals = data.draw(
            st.lists(st.integers(0, 31), min_size=h * w, max_size=h * w)
        )
        plane = np.array(vals, dtype=float).reshape(h, w)
        # strictly increasing remap of the 32 possible levels
        increments = data.draw(
            st.lists(st.floats(0.1, 5.0), min_size=32, max_size=32)
        )
        remap = np.cumsum(increments)
        remapped = remap[plane.astype(int)]
        assert np.array_equal(lbp_codes(plane).codes, lbp_codes(remapped).codes)


class TestDeriveChannels:
    def test_count_and_order(self, rng):
        img = RasterImage(rng.uniform(0, 255, size=(8, 8, 3)), ColorSpace.RGB)
        planes = derive_channels(img)
        assert len(planes) == 8
        assert np.array_equal(planes[0], img.channel(0))
        assert np.array_equal(planes[2], img.channel(2))

    def test_gray_pixel_differences(self):
        img = RasterImage(np.full((3, 3, 3), 90.0), ColorSpace.RGB)
        planes = derive_channels(img)
        assert np.allclose(planes[6], 127.5)  # D1
        assert np.allclose(planes[7], 127.5)  # D2

    def test_red_pixel_differences(self):
        img = RasterImage(
            np.tile(np.array([255.0, 0.0, 0.0]), (3, 3, 1)), ColorSpace.RGB
        )
        planes = derive_channels(img)
        assert np.allclose(planes[6], 255.0)
        assert np.allclose(planes[7], 127.5)

    def test_rejects_ycbcr(self):
        img = RasterImage(np.zeros((3, 3, 3)), ColorSpace.YCBCR)
        with pytest.raises(SpaceError):
            derive_channels(img)


class TestDecodeDlbp:
    def _codes(self, arrays):
        return [LbpCodeImage(a, CHANNEL_NAMES[i]) for i, a in enumerate(arrays)]

    def test_all_zero(self):
        stack = decode_dlbp(self._codes([np.zeros((3, 3), dtype=int)] * 8))
        assert stack.depth == 64
        assert np.all(stack.tensor.data == 0.0)
        assert stack.sparsity == 1.0

    def test_constant_255(self):
        stack = decode_dlbp(self._codes([np.full((3, 3), 255, dtype=int)] * 8))
        assert np.all(stack.tensor.data == 255.0)
        assert stack.sparsity == 0.0

    def test_code_5_bit_decomposition(self):
        arrays = [np.zeros((3, 3), dtype=int) for _ in range(8)]
        arrays[2][1, 1] = 5  # bits 0 and 2
        stack = decode_dlbp(self._codes(arrays))
        assert stack.plane(8 * 2 + 0)[1, 1] == 5.0
        assert stack.plane(8 * 2 + 2)[1, 1] == 5.0
        hits = np.nonzero(stack.tensor.data)
        assert len(hits[0]) == 2

    def test_reconstruction_recovers_codes(self, rng):
        arrays = [rng.integers(0, 256, size=(6, 6)) for _ in range(8)]
        stack = decode_dlbp(self._codes(arrays))
        for c in range(8):
            planes = stack.tensor.data[:, :, 8 * c : 8 * c + 8]
            assert np.array_equal(planes.max(axis=2), arrays[c].astype(float))
            for bit in range(8):
                bit_set = ((arrays[c] >> bit) & 1).astype(bool)
                assert np.array_equal(planes[:, :, bit] != 0, bit_set)

    def test_sparsity_of_uniform_codes(self, rng):
        arrays = [rng.integers(0, 256, size=(64, 64)) for _ in range(8)]
        stack = decode_dlbp(self._codes(arrays))
        nonzero = 1.0 - stack.sparsity
        assert abs(nonzero - 0.5) < 0.02

    def test_shape_mismatch(self, rng):
        arrays = [rng.integers(0, 256, size=(4, 4)) for _ in range(8)]
        arrays[3] = rng.integers(0, 256, size=(5, 4))
        with pytest.raises(DimError):
            decode_dlbp(self._codes(arrays))

    def test_wrong_count(self):
        with pytest.raises(DimError):
            decode_dlbp(self._codes([np.zeros((3, 3), dtype=int)] * 7))


class TestLbpRgb:
    def test_three_outputs(self, rng):
        img = RasterImage(rng.uniform(0, 255, size=(8, 8, 3)), ColorSpace.RGB)
        out = lbp_rgb(img)
        assert len(out) == 3
        assert [c.source_channel for c in out] == ["R", "G", "B"]

    def test_constant_color(self):
        img = RasterImage(np.full((4, 4, 3), 30.0), ColorSpace.RGB)
        for code_img in lbp_rgb(img):
            assert np.all(code_img.codes == 255)

    def test_gray_content_identical_codes(self, rng):
        plane = rng.uniform(0, 255, size=(6, 6))
        img = RasterImage(np.stack([plane] * 3, axis=2), ColorSpace.RGB)
        a, b, c = lbp_rgb(img)
        assert np.array_equal(a.codes, b.codes)
        assert np.array_equal(b.codes, c.codes)


def test_full_descriptor_geometry(face_corpus):
    stack = dlbp_from_image(face_corpus[0])
    assert stack.depth == 64
    assert stack.tensor.height == face_corpus[0].height
    assert stack.sparsity > 0.1  # sparse by construction
