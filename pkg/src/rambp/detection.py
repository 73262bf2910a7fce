"""Per-pixel corrupted/uncorrupted labeling via boundary-discriminative cluster analysis.

Each pixel is tested against the intensity clusters of its neighborhood:
the sorted window is split at the largest intensity gap on each side of the
median, and the pixel counts as uncorrupted when it falls in the middle
cluster. Pixels failing the wide-window test are re-examined on a 3x3
window before being labeled corrupted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import as_gray_image, pad_replicate

__all__ = [
    "BoundaryAnalysis",
    "boundary_analysis",
    "window_values",
    "classify_pixel",
    "classify_image",
    "mask_to_image",
]

# Cap per-chunk scratch memory for the wide-window sort (values + diffs).
_CHUNK_BYTES = 64 * 1024 * 1024


@dataclass(frozen=True)
class BoundaryAnalysis:
    """Sorted window with its median and the two cluster boundaries."""

    sorted_values: np.ndarray
    median: int
    v_low: int
    v_high: int


def _check_window_width(width: int, name: str = "window width") -> None:
    if width < 3 or width % 2 == 0:
        raise ValueError(f"{name} must be an odd integer >= 3, got {width}")


def _cluster_bounds(sorted_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Boundary values (v_low, v_high) for each row of sorted windows.

    Rows must be ascending and of odd length N. Gaps are the consecutive
    differences; the left interval covers gaps strictly below the median
    position and the right interval the gaps from the median position on.
    Ties pick the smallest gap index, so an all-zero interval collapses to
    its first gap, whose value equals the median-side value of the run.
    """
    n = sorted_rows.shape[1]
    i_med = (n - 1) // 2
    gaps = np.diff(sorted_rows.astype(np.int16), axis=1)
    rows = np.arange(sorted_rows.shape[0])
    j_low = np.argmax(gaps[:, :i_med], axis=1)
    j_high = i_med + np.argmax(gaps[:, i_med:], axis=1)
    return sorted_rows[rows, j_low], sorted_rows[rows, j_high]


def boundary_analysis(values) -> BoundaryAnalysis:
    """Sort a window and locate its cluster boundaries.

    The median of the N (odd, >= 3) values is the ((N+1)/2)-th smallest.
    v_low sits at the largest gap below the median, v_high at the largest
    gap at or above it; both are values of the sorted window and satisfy
    v_low <= median <= v_high.
    """
    arr = np.asarray(values).ravel()
    n = arr.size
    if n < 3 or n % 2 == 0:
        raise ValueError(f"need an odd number of values >= 3, got {n}")
    s = np.sort(arr.astype(np.uint8))
    v_low, v_high = _cluster_bounds(s[None, :])
    return BoundaryAnalysis(
        sorted_values=s,
        median=int(s[(n - 1) // 2]),
        v_low=int(v_low[0]),
        v_high=int(v_high[0]),
    )


def window_values(img, row: int, col: int, width: int) -> np.ndarray:
    """Gather a width x width window around (row, col) with replicate clamping."""
    arr = as_gray_image(img)
    _check_window_width(width)
    half = width // 2
    rr = np.clip(np.arange(row - half, row + half + 1), 0, arr.shape[0] - 1)
    cc = np.clip(np.arange(col - half, col + half + 1), 0, arr.shape[1] - 1)
    return arr[np.ix_(rr, cc)].ravel()


def _middle_cluster_test(values: np.ndarray, center: int) -> bool:
    s = np.sort(values.astype(np.uint8))
    if s[0] == s[-1]:
        # Homogeneous window: no impulse evidence, treat as uncorrupted.
        return True
    v_low, v_high = _cluster_bounds(s[None, :])
    return bool(v_low[0] < center <= v_high[0])


def classify_pixel(img, pos: tuple[int, int], stage1: int = 21, stage2: int = 3) -> int:
    """Label one pixel: 1 = uncorrupted, 0 = corrupted.

    The pixel passes if it lies in the middle cluster (v_low, v_high] of its
    stage-1 window; failures are re-examined on the smaller stage-2 window
    and only labeled corrupted when that test also fails.
    """
    arr = as_gray_image(img)
    _check_window_width(stage1, "stage1 width")
    _check_window_width(stage2, "stage2 width")
    row, col = pos
    center = int(arr[row, col])
    if _middle_cluster_test(window_values(arr, row, col, stage1), center):
        return 1
    return int(_middle_cluster_test(window_values(arr, row, col, stage2), center))


def _stage_pass_all(arr: np.ndarray, width: int) -> np.ndarray:
    """Vectorized middle-cluster test for every pixel at one window width."""
    h, w = arr.shape
    half = width // 2
    windows = sliding_window_view(pad_replicate(arr, half), (width, width))
    windows = windows.reshape(h * w, width * width)
    centers = arr.ravel()
    n = width * width
    out = np.empty(h * w, dtype=bool)
    chunk = max(1, _CHUNK_BYTES // (n * 3))
    for lo in range(0, h * w, chunk):
        hi = min(lo + chunk, h * w)
        s = np.sort(windows[lo:hi], axis=1)
        v_low, v_high = _cluster_bounds(s)
        c = centers[lo:hi]
        out[lo:hi] = (s[:, 0] == s[:, -1]) | ((v_low < c) & (c <= v_high))
    return out


def classify_image(img, stage1: int = 21, stage2: int = 3) -> np.ndarray:
    """Label every pixel: uint8 mask with 1 = uncorrupted, 0 = corrupted.

    Equivalent to mapping classify_pixel over all positions; pixels failing
    the stage-1 test are re-examined in bulk on the stage-2 window.
    """
    arr = as_gray_image(img)
    _check_window_width(stage1, "stage1 width")
    _check_window_width(stage2, "stage2 width")
    h, w = arr.shape
    passed = _stage_pass_all(arr, stage1)
    retry = np.flatnonzero(~passed)
    if retry.size:
        half = stage2 // 2
        windows = sliding_window_view(pad_replicate(arr, half), (stage2, stage2))
        windows = windows.reshape(h * w, stage2 * stage2)[retry]
        s = np.sort(windows, axis=1)
        v_low, v_high = _cluster_bounds(s)
        c = arr.ravel()[retry]
        passed[retry] = (s[:, 0] == s[:, -1]) | ((v_low < c) & (c <= v_high))
    return passed.reshape(h, w).astype(np.uint8)


def mask_to_image(mask) -> np.ndarray:
    """Render a 0/1 corruption mask as a 0/255 image for visual inspection."""
    arr = np.asarray(mask)
    if arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
        raise ValueError("mask must be a 2-D array of 0/1 labels")
    return (arr.astype(np.uint8)) * np.uint8(255)
