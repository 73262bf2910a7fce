"""Seeded, reproducible image degradations: salt-and-pepper, Gaussian noise, Gaussian blur.

All randomness comes from a small counter-based generator (the SplitMix64
finalizer applied to seed + counter * golden-ratio increments). The stream is
a pure function of the seed, independent of platform, library version, and
call order, which keeps golden tests byte-stable. Library default generators
are deliberately not used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import as_gray_image

__all__ = [
    "NoiseSpec",
    "stream_key",
    "uniform_stream",
    "normal_stream",
    "salt_pepper",
    "gaussian_noise",
    "gaussian_blur",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def _mix_int(z: int) -> int:
    """SplitMix64 finalizer on a Python int, exact 64-bit arithmetic."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2**64, which is exactly what SplitMix64 needs
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
    return z ^ (z >> np.uint64(31))


def stream_key(*words: int) -> int:
    """Fold any number of 64-bit words into one stream key.

    Used to derive independent substreams from (seed, tag, index, ...)
    tuples; the folding is order-sensitive, so permuted inputs give
    unrelated keys.
    """
    key = 0
    for w in words:
        key = _mix_int(key + _GOLDEN + (int(w) & _MASK64))
    return key


def _counter_block(key: int, start: int, count: int) -> np.ndarray:
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix_array(np.uint64(key) + idx * np.uint64(_GOLDEN))


def uniform_stream(key: int, count: int, start: int = 0) -> np.ndarray:
    """`count` doubles in [0, 1) from counters start..start+count-1."""
    bits = _counter_block(key, start, count)
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def normal_stream(key: int, count: int, start: int = 0) -> np.ndarray:
    """`count` standard normal doubles, Box-Muller over counter pairs."""
    bits = _counter_block(key, start, 2 * count)
    # u1 in (0, 1] so the log is finite; u2 in [0, 1)
    u1 = ((bits[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * (2.0**-53)
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * (2.0**-53)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def salt_pepper(img, rho: float, seed: int) -> np.ndarray:
    """Corrupt each pixel independently with probability rho to 0 or 255.

    Impulse polarity is a fair coin. Positions are untouched otherwise;
    the output is a pure function of (img, rho, seed).
    """
    arr = as_gray_image(img)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    n = arr.size
    key = stream_key(0x53414C54, seed)  # domain tag keeps streams disjoint per operation
    u = uniform_stream(key, 2 * n)
    hit = u[0::2] < rho
    out = arr.copy().ravel()
    out[hit] = np.where(u[1::2][hit] < 0.5, 255, 0).astype(np.uint8)
    return out.reshape(arr.shape)


def gaussian_noise(img, sigma: float, seed: int) -> np.ndarray:
    """Add zero-mean Gaussian noise with standard deviation sigma gray levels.

    Each pixel becomes round(value + N(0, sigma)), rounded half to even,
    then clamped to [0, 255].
    """
    arr = as_gray_image(img)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    key = stream_key(0x47415553, seed)
    z = normal_stream(key, arr.size).reshape(arr.shape)
    noisy = np.rint(arr.astype(np.float64) + sigma * z)
    return np.clip(noisy, 0, 255).astype(np.uint8)


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps of radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def separable_blur(field: np.ndarray, sigma: float) -> np.ndarray:
    """Blur a float 2-D field with a separable Gaussian, replicate edges."""
    k = gaussian_kernel_1d(sigma)
    radius = (len(k) - 1) // 2
    out = np.asarray(field, dtype=np.float64)
    for axis in (0, 1):
        padded = np.pad(out, [(radius, radius) if a == axis else (0, 0) for a in (0, 1)], mode="edge")
        acc = np.zeros_like(out)
        for t, weight in enumerate(k):
            sl = [slice(None), slice(None)]
            sl[axis] = slice(t, t + out.shape[axis])
            acc += weight * padded[tuple(sl)]
        out = acc
    return out


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Gaussian-blur an image (separable kernel, radius ceil(3*sigma)).

    Deterministic: no seed is involved. Values are convolved in float64
    and rounded to the nearest integer once at the end.
    """
    arr = as_gray_image(img)
    blurred = separable_blur(arr.astype(np.float64), sigma)
    return np.clip(np.rint(blurred), 0, 255).astype(np.uint8)


_KINDS = ("salt_pepper", "gaussian_noise", "gaussian_blur")


@dataclass(frozen=True)
class NoiseSpec:
    """One degradation: kind plus exactly the parameter that kind uses.

    salt_pepper takes `rho` (density in [0, 1]); gaussian_noise and
    gaussian_blur take `sigma` (> 0, gray levels or pixels). `seed` drives
    the generator for the seeded kinds and is ignored by gaussian_blur.
    """

    kind: str
    rho: float | None = None
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "salt_pepper":
            if self.rho is None:
                raise ValueError("salt_pepper requires rho")
            if self.sigma is not None:
                raise ValueError("salt_pepper takes rho only, not sigma")
            if not 0.0 <= self.rho <= 1.0:
                raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        else:
            if self.sigma is None:
                raise ValueError(f"{self.kind} requires sigma")
            if self.rho is not None:
                raise ValueError(f"{self.kind} takes sigma only, not rho")
            if self.sigma <= 0:
                raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def parameter(self) -> float:
        return float(self.rho if self.kind == "salt_pepper" else self.sigma)

    def with_seed(self, seed: int) -> "NoiseSpec":
        return NoiseSpec(kind=self.kind, rho=self.rho, sigma=self.sigma, seed=seed)

    def apply(self, img) -> np.ndarray:
        if self.kind == "salt_pepper":
            return salt_pepper(img, self.rho, self.seed)
        if self.kind == "gaussian_noise":
            return gaussian_noise(img, self.sigma, self.seed)
        return gaussian_blur(img, self.sigma)
