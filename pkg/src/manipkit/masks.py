"""Run-length encoded segmentation masks and pixel-geometry helpers.

Convention: pixels are scanned row-major (index = y*width + x), and `counts`
alternates run lengths starting with the run of zeros, which may be 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMaskError, RleError


@dataclass(frozen=True)
class RleMask:
    width: int
    height: int
    counts: tuple[int, ...]


def encode_mask(grid) -> RleMask:
    """Run-length encode a binary grid of shape (height, width)."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise RleError(f"grid must be 2-D and non-empty, got shape {grid.shape}")
    flat = grid.ravel().astype(bool)
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    counts = np.diff(edges).tolist()
    if flat[0]:
        counts = [0] + counts
    h, w = grid.shape
    return RleMask(width=int(w), height=int(h), counts=tuple(int(c) for c in counts))


def decode_mask(mask: RleMask) -> np.ndarray:
    """Decode to a uint8 grid of shape (height, width)."""
    counts = np.asarray(mask.counts, dtype=np.int64)
    if counts.size and counts.min() < 0:
        raise RleError("negative run length")
    if int(counts.sum()) != mask.width * mask.height:
        raise RleError(
            f"counts sum {int(counts.sum())} != width*height {mask.width * mask.height}"
        )
    values = np.arange(counts.size) % 2  # 0,1,0,1,...
    flat = np.repeat(values.astype(np.uint8), counts)
    return flat.reshape(mask.height, mask.width)


def mask_bbox_centroid(mask: RleMask) -> tuple[tuple[int, int, int, int], tuple[float, float]]:
    """Tight (x1,y1,x2,y2) box and mean-pixel centroid (cx,cy) of the foreground.

    Raises:
        EmptyMaskError: if the mask has no foreground pixels.
    """
    grid = decode_mask(mask)
    ys, xs = np.nonzero(grid)
    if xs.size == 0:
        raise EmptyMaskError(f"mask {mask.width}x{mask.height} has no foreground")
    bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    return bbox, (float(xs.mean()), float(ys.mean()))
