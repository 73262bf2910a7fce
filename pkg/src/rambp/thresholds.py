"""Per-pixel thresholds from adaptive-window medians of uncorrupted pixels.

Uncorrupted pixels keep their own intensity as threshold (window size 1).
For corrupted pixels a window grows from 3x3 in steps of 2 until at least
half of its pixels are uncorrupted; the threshold is the median of the
uncorrupted intensities in the accepted window. The maximum width itself is
never tested: it is the fallback when every smaller window is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import as_gray_image, pad_replicate

__all__ = [
    "ThresholdMap",
    "check_max_window",
    "adaptive_window_median",
    "build_threshold_map",
    "adaptive_median_field",
]


@dataclass(frozen=True)
class ThresholdMap:
    """Per-pixel threshold values and the window widths that produced them.

    window_sizes is 1 exactly where the mask says uncorrupted; elsewhere it
    is odd and bounded by the configured maximum width.
    """

    thresholds: np.ndarray
    window_sizes: np.ndarray


def check_max_window(max_window: int) -> int:
    if max_window < 3 or max_window % 2 == 0:
        raise ValueError(f"max_window must be an odd integer >= 3, got {max_window}")
    return int(max_window)


def check_mask(img: np.ndarray, mask) -> np.ndarray:
    m = np.asarray(mask)
    if m.shape != img.shape:
        raise ValueError(f"mask shape {m.shape} does not match image shape {img.shape}")
    if not np.isin(m, (0, 1)).all():
        raise ValueError("mask labels must be 0 (corrupted) or 1 (uncorrupted)")
    return m.astype(np.uint8, copy=False)


def _masked_median_rows(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Median of the valid entries per row; median of all entries if none valid.

    Even valid counts use the exact mean of the two central order statistics.
    Row length is odd, so the all-entries fallback is a single order statistic.
    """
    work = np.where(valid, values.astype(np.int16), np.int16(999))
    work.sort(axis=1)
    n_valid = valid.sum(axis=1)
    out = np.empty(values.shape[0], dtype=np.float64)
    rows = np.arange(values.shape[0])
    nz = n_valid > 0
    lo = (n_valid[nz] - 1) // 2
    hi = n_valid[nz] // 2
    out[nz] = (work[nz, lo].astype(np.float64) + work[nz, hi]) / 2.0
    if not nz.all():
        plain = np.sort(values[~nz].astype(np.int16), axis=1)
        out[~nz] = plain[:, (values.shape[1] - 1) // 2]
    return out


def _adaptive_median_at(
    p_img: np.ndarray,
    p_mask: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    max_window: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Grow windows at padded coordinates (rows, cols) and take masked medians.

    The caller must pad p_img/p_mask so every candidate window is in bounds.
    Returns (median values, accepted widths) aligned with the positions.
    """
    n = rows.size
    widths = np.full(n, max_window, dtype=np.int16)
    if n == 0:
        return np.empty(0, dtype=np.float64), widths

    # Integral image of the mask gives O(1) uncorrupted counts per window.
    integral = np.zeros((p_mask.shape[0] + 1, p_mask.shape[1] + 1), dtype=np.int32)
    np.cumsum(np.cumsum(p_mask, axis=0), axis=1, out=integral[1:, 1:])

    unresolved = np.ones(n, dtype=bool)
    for w in range(3, max_window, 2):
        half = w // 2
        r = rows[unresolved] - half
        c = cols[unresolved] - half
        counts = (
            integral[r + w, c + w] - integral[r, c + w] - integral[r + w, c] + integral[r, c]
        )
        accept = 2 * counts >= w * w
        idx = np.flatnonzero(unresolved)[accept]
        widths[idx] = w
        unresolved[idx] = False
        if not unresolved.any():
            break

    values = np.empty(n, dtype=np.float64)
    for w in np.unique(widths):
        sel = np.flatnonzero(widths == w)
        half = int(w) // 2
        win_img = sliding_window_view(p_img, (int(w), int(w)))
        win_mask = sliding_window_view(p_mask, (int(w), int(w)))
        r = rows[sel] - half
        c = cols[sel] - half
        vals = win_img[r, c].reshape(sel.size, -1)
        valid = win_mask[r, c].reshape(sel.size, -1).astype(bool)
        values[sel] = _masked_median_rows(vals, valid)
    return values, widths


def adaptive_window_median(img, mask, center: tuple[int, int], max_window: int = 5) -> tuple[float, int]:
    """Adaptive-window median of uncorrupted pixels around one center.

    The center may lie outside the image; sampling clamps to the edges.
    Returns (median value, accepted window width).
    """
    arr = as_gray_image(img)
    m = check_mask(arr, mask)
    max_window = check_max_window(max_window)
    row, col = center
    h, w = arr.shape
    overhang = max(0, -row, row - (h - 1), -col, col - (w - 1))
    pad = max_window // 2 + overhang
    values, widths = _adaptive_median_at(
        pad_replicate(arr, pad),
        pad_replicate(m, pad),
        np.asarray([row + pad]),
        np.asarray([col + pad]),
        max_window,
    )
    return float(values[0]), int(widths[0])


def build_threshold_map(img, mask, max_window: int = 5) -> ThresholdMap:
    """Threshold map for a whole image given its corruption mask.

    Uncorrupted pixels keep their intensity (width 1); corrupted pixels get
    the adaptive-window median of the surrounding uncorrupted intensities.
    """
    arr = as_gray_image(img)
    m = check_mask(arr, mask)
    max_window = check_max_window(max_window)
    thresholds = arr.astype(np.float64)
    window_sizes = np.ones(arr.shape, dtype=np.int16)
    rows, cols = np.nonzero(m == 0)
    if rows.size:
        pad = max_window // 2
        values, widths = _adaptive_median_at(
            pad_replicate(arr, pad),
            pad_replicate(m, pad),
            rows + pad,
            cols + pad,
            max_window,
        )
        thresholds[rows, cols] = values
        window_sizes[rows, cols] = widths
    return ThresholdMap(thresholds=thresholds, window_sizes=window_sizes)


def adaptive_median_field(img, mask, max_window: int, margin: int) -> np.ndarray:
    """Adaptive-window medians at every position of an extended grid.

    The grid covers coordinates [-margin, height-1+margin] in both axes so
    callers can read medians at centers that fall outside the image; those
    windows sample the clamped (replicated) border values.
    """
    arr = as_gray_image(img)
    m = check_mask(arr, mask)
    max_window = check_max_window(max_window)
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    h, w = arr.shape
    pad = margin + max_window // 2
    ext_h, ext_w = h + 2 * margin, w + 2 * margin
    rows, cols = np.divmod(np.arange(ext_h * ext_w), ext_w)
    # Grid position p maps to image coordinate p - margin, i.e. padded index p + (pad - margin).
    offset = pad - margin
    values, _ = _adaptive_median_at(
        pad_replicate(arr, pad),
        pad_replicate(m, pad),
        rows + offset,
        cols + offset,
        max_window,
    )
    return values.reshape(ext_h, ext_w)
