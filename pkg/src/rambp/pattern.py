"""The adaptive-radius median binary pattern descriptor.

Each pixel's 8-bit code compares its threshold against the adaptive-window
medians of eight surrounding patches. The patch ring sits at Chebyshev
distance R = max_window + window_size(pixel), which keeps every patch
analysis window disjoint from the window that produced the threshold.
"""

from __future__ import annotations

import numpy as np

from .detection import classify_image
from .image import as_gray_image
from .thresholds import (
    ThresholdMap,
    adaptive_median_field,
    adaptive_window_median,
    build_threshold_map,
    check_max_window,
)

__all__ = [
    "PATCH_OFFSETS",
    "patch_centers",
    "patch_radius",
    "rambp_code",
    "rambp_code_image",
    "rambp_descriptor",
    "code_histogram",
]

# Unit offsets (d_row, d_col) of the eight patch centers: east first, then
# counter-clockwise. Bit i of a code corresponds to PATCH_OFFSETS[i].
PATCH_OFFSETS = (
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
)


def patch_centers(pos: tuple[int, int], radius: int) -> list[tuple[int, int]]:
    """The eight patch centers on the Chebyshev ring of the given radius.

    Centers may fall outside the image; sampling resolves them by clamping.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    row, col = pos
    return [(row + dr * radius, col + dc * radius) for dr, dc in PATCH_OFFSETS]


def patch_radius(max_window: int, window_size: int) -> int:
    """Ring distance for a pixel: max analysis width plus its accepted width."""
    return int(max_window) + int(window_size)


def rambp_code(img, mask, tmap: ThresholdMap, pos: tuple[int, int], max_window: int = 5) -> int:
    """8-bit code of one pixel given a threshold map built from (img, mask).

    Bit i is 1 when the pixel's threshold is >= the adaptive-window median
    at patch center i.
    """
    max_window = check_max_window(max_window)
    row, col = pos
    radius = patch_radius(max_window, tmap.window_sizes[row, col])
    threshold = float(tmap.thresholds[row, col])
    code = 0
    for i, center in enumerate(patch_centers(pos, radius)):
        beta, _ = adaptive_window_median(img, mask, center, max_window)
        if threshold >= beta:
            code |= 1 << i
    return code


def rambp_code_image(img, mask=None, tmap: ThresholdMap | None = None, max_window: int = 5) -> np.ndarray:
    """Code image for every pixel; mask and threshold map are computed if absent.

    Patch medians are evaluated once per grid position and shared across the
    pixels whose rings touch it, which gives the same result as recomputing
    them per patch.
    """
    arr = as_gray_image(img)
    max_window = check_max_window(max_window)
    if mask is None:
        mask = classify_image(arr)
    if tmap is None:
        tmap = build_threshold_map(arr, mask, max_window)
    h, w = arr.shape
    if tmap.thresholds.shape != (h, w) or tmap.window_sizes.shape != (h, w):
        raise ValueError("threshold map shape does not match the image")

    margin = 2 * max_window  # covers the largest ring radius
    field = adaptive_median_field(arr, mask, max_window, margin)
    codes = np.zeros((h, w), dtype=np.uint8)
    thresholds = tmap.thresholds
    for ws in np.unique(tmap.window_sizes):
        radius = patch_radius(max_window, ws)
        sel = tmap.window_sizes == ws
        for i, (dr, dc) in enumerate(PATCH_OFFSETS):
            beta = field[
                margin + dr * radius : margin + dr * radius + h,
                margin + dc * radius : margin + dc * radius + w,
            ]
            bit = (thresholds >= beta) & sel
            codes |= bit.astype(np.uint8) << np.uint8(i)
    return codes


def code_histogram(codes: np.ndarray, n_bins: int) -> np.ndarray:
    """Frequency histogram over code values, normalized to unit sum."""
    counts = np.bincount(np.asarray(codes).ravel(), minlength=n_bins)
    return counts.astype(np.float64) / codes.size


def rambp_descriptor(img, max_window: int = 5) -> np.ndarray:
    """256-bin normalized pattern histogram of an image."""
    codes = rambp_code_image(img, max_window=max_window)
    return code_histogram(codes, 256)
