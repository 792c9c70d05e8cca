import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manipkit.errors import EmptyMaskError, RleError
from manipkit.masks import RleMask, decode_mask, encode_mask, mask_bbox_centroid


def test_encode_starts_with_zero_run():
    grid = np.zeros((2, 3), dtype=np.uint8)
    grid[0, 0] = 1
    mask = encode_mask(grid)
    # foreground at flat index 0 forces a leading zero-length background run
    assert mask.counts[0] == 0
    assert mask.counts[1] == 1


def test_encode_decode_round_trip_known_grid():
    grid = np.array([[0, 1, 1], [1, 0, 0]], dtype=np.uint8)
    mask = encode_mask(grid)
    assert mask.width == 3 and mask.height == 2
    np.testing.assert_array_equal(decode_mask(mask), grid)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_encode_decode_round_trip_random(w, h, seed):
    grid = np.random.default_rng(seed).integers(0, 2, size=(h, w)).astype(np.uint8)
    np.testing.assert_array_equal(decode_mask(encode_mask(grid)), grid)


def test_decode_rejects_inconsistent_counts():
    with pytest.raises(RleError):
        decode_mask(RleMask(width=3, height=2, counts=(4, 1)))


def test_decode_rejects_negative_runs():
    with pytest.raises(RleError):
        decode_mask(RleMask(width=2, height=2, counts=(-1, 5)))


def test_encode_rejects_bad_shapes():
    with pytest.raises(RleError):
        encode_mask(np.zeros((0, 4)))
    with pytest.raises(RleError):
        encode_mask(np.zeros(5))


def test_bbox_centroid_of_rectangle_block():
    grid = np.zeros((10, 10), dtype=np.uint8)
    grid[2:5, 3:8] = 1  # rows 2..4, cols 3..7
    bbox, centroid = mask_bbox_centroid(encode_mask(grid))
    assert bbox == (3, 2, 7, 4)
    assert centroid == (5.0, 3.0)


def test_bbox_centroid_single_pixel():
    grid = np.zeros((4, 4), dtype=np.uint8)
    grid[1, 2] = 1
    bbox, centroid = mask_bbox_centroid(encode_mask(grid))
    assert bbox == (2, 1, 2, 1)
    assert centroid == (2.0, 1.0)


def test_bbox_centroid_rejects_empty_mask():
    with pytest.raises(EmptyMaskError):
        mask_bbox_centroid(encode_mask(np.zeros((3, 3), dtype=np.uint8)))
