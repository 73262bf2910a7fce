"""Reference descriptors used as comparison baselines: LBP, uniform
rotation-invariant LBP, and the median binary pattern.

All three share the replicate-edge border policy and the neighbor ordering
of the main descriptor, so histograms are comparable across runs.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import as_gray_image, pad_replicate
from .pattern import PATCH_OFFSETS, code_histogram

__all__ = [
    "BASELINE_KINDS",
    "lbp_code_image",
    "lbp_descriptor",
    "riu2_map",
    "RIU2_TABLE",
    "lbp_riu2_descriptor",
    "mbp_code_image",
    "mbp_descriptor",
]

BASELINE_KINDS = ("lbp", "lbp_riu2", "mbp")


def _neighbor_views(arr: np.ndarray, radius: int) -> list[np.ndarray]:
    padded = pad_replicate(arr, radius)
    h, w = arr.shape
    return [
        padded[radius + dr * radius : radius + dr * radius + h, radius + dc * radius : radius + dc * radius + w]
        for dr, dc in PATCH_OFFSETS
    ]


def lbp_code_image(img) -> np.ndarray:
    """Classic 8-neighbor radius-1 codes: bit i set when neighbor i >= center."""
    arr = as_gray_image(img)
    codes = np.zeros(arr.shape, dtype=np.uint8)
    for i, neighbor in enumerate(_neighbor_views(arr, 1)):
        codes |= (neighbor >= arr).astype(np.uint8) << np.uint8(i)
    return codes


def lbp_descriptor(img) -> np.ndarray:
    """256-bin normalized histogram of radius-1 codes."""
    return code_histogram(lbp_code_image(img), 256)


def riu2_map(code: int) -> int:
    """Rotation-invariant uniform bin of an 8-bit code.

    Codes with at most 2 circular 0/1 transitions map to their popcount
    (0..8); all other codes share bin 9.
    """
    if not 0 <= code <= 255:
        raise ValueError(f"code must be in [0, 255], got {code}")
    rotated = ((code << 1) | (code >> 7)) & 0xFF
    transitions = bin(code ^ rotated).count("1")
    if transitions <= 2:
        return bin(code).count("1")
    return 9


RIU2_TABLE = np.asarray([riu2_map(c) for c in range(256)], dtype=np.uint8)


def lbp_riu2_descriptor(img) -> np.ndarray:
    """10-bin normalized histogram of rotation-invariant uniform codes."""
    return code_histogram(RIU2_TABLE[lbp_code_image(img)], 10)


def mbp_code_image(img) -> np.ndarray:
    """9-bit codes comparing each 3x3 block against its own median.

    Bits 0..7 are the eight neighbors in ring order and bit 8 is the center;
    a bit is set when its pixel is >= the block median (the exact middle of
    the nine values).
    """
    arr = as_gray_image(img)
    h, w = arr.shape
    blocks = sliding_window_view(pad_replicate(arr, 1), (3, 3)).reshape(h, w, 9)
    medians = np.sort(blocks, axis=2)[:, :, 4]
    codes = np.zeros((h, w), dtype=np.uint16)
    for i, neighbor in enumerate(_neighbor_views(arr, 1)):
        codes |= (neighbor >= medians).astype(np.uint16) << np.uint16(i)
    codes |= (arr >= medians).astype(np.uint16) << np.uint16(8)
    return codes


def mbp_descriptor(img) -> np.ndarray:
    """512-bin normalized histogram of median-block codes."""
    return code_histogram(mbp_code_image(img), 512)
