"""Grayscale raster primitives shared by the whole pipeline.

Images are plain 2-D uint8 arrays. Every windowed operation in this package
uses replicate-edge sampling: out-of-bounds coordinates are clamped to the
nearest in-bounds pixel, so windows near borders never see intensities that
do not occur in the image.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PgmError",
    "DatasetError",
    "Sample",
    "LabeledDataset",
    "as_gray_image",
    "sample_padded",
    "pad_replicate",
    "read_pgm",
    "write_pgm",
    "load_dataset",
]

_WHITESPACE = b" \t\r\n\x0b\x0c"


class PgmError(ValueError):
    """Raised when a PGM byte stream cannot be decoded."""


class DatasetError(ValueError):
    """Raised when a dataset directory cannot be ingested."""


def as_gray_image(img) -> np.ndarray:
    """Validate and return a 2-D uint8 image.

    Accepts any integer array-like with values in [0, 255]. Color (3-D)
    input is rejected rather than converted.
    """
    arr = np.asarray(img)
    if arr.ndim == 3:
        raise ValueError("color input is not supported; provide a single-channel image")
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got {arr.ndim} dimension(s)")
    if arr.size == 0:
        raise ValueError("image must contain at least one pixel")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"expected integer intensities, got dtype {arr.dtype}")
    if int(arr.min()) < 0 or int(arr.max()) > 255:
        raise ValueError("intensities must lie in [0, 255]")
    return arr.astype(np.uint8, copy=False)


def sample_padded(img, row: int, col: int) -> int:
    """Sample an image at signed coordinates with replicate-edge clamping.

    In-bounds coordinates return the stored pixel; out-of-bounds coordinates
    are clamped to the nearest edge.
    """
    arr = as_gray_image(img)
    r = min(max(row, 0), arr.shape[0] - 1)
    c = min(max(col, 0), arr.shape[1] - 1)
    return int(arr[r, c])


def pad_replicate(arr: np.ndarray, margin: int) -> np.ndarray:
    """Pad a 2-D array by `margin` on every side with edge replication."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if margin == 0:
        return np.asarray(arr)
    return np.pad(arr, margin, mode="edge")


def _read_tokens(data: bytes, pos: int, count: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated tokens, skipping '#' comments to end of line."""
    tokens: list[bytes] = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise PgmError("truncated file: header or payload ended early")
        start = pos
        while pos < n and data[pos] not in _WHITESPACE:
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _int_field(token: bytes, field: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise PgmError(f"malformed {field}: {token!r} is not an integer") from None


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a PGM byte stream (P2 ASCII or P5 binary, maxval <= 255).

    '#' comments are permitted between header tokens. Raw intensities are
    returned as stored; maxval is validated but not used for rescaling.
    """
    (magic,), pos = _read_tokens(data, 0, 1)
    if magic in (b"P3", b"P6"):
        raise PgmError(f"magic {magic.decode('ascii', 'replace')} is a color format; only grayscale P2/P5 is supported")
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"malformed magic: expected P2 or P5, got {magic!r}")
    (wtok, htok, mtok), pos = _read_tokens(data, pos, 3)
    width = _int_field(wtok, "width")
    height = _int_field(htok, "height")
    maxval = _int_field(mtok, "maxval")
    if width < 1:
        raise PgmError(f"malformed width: {width} (must be >= 1)")
    if height < 1:
        raise PgmError(f"malformed height: {height} (must be >= 1)")
    if not 1 <= maxval <= 255:
        raise PgmError(f"malformed maxval: {maxval} (must be in [1, 255])")

    count = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the header from the raster.
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise PgmError("malformed header: missing separator before binary payload")
        pos += 1
        payload = data[pos : pos + count]
        if len(payload) < count:
            raise PgmError(f"truncated payload: expected {count} bytes, got {len(payload)}")
        flat = np.frombuffer(payload, dtype=np.uint8)
    else:
        tokens, pos = _read_tokens(data, pos, count)
        values = [_int_field(t, "payload") for t in tokens]
        flat = np.asarray(values, dtype=np.int64)
    if int(flat.max(initial=0)) > maxval:
        raise PgmError(f"payload value {int(flat.max())} exceeds maxval {maxval}")
    return flat.reshape(height, width).astype(np.uint8)


def write_pgm(img, ascii: bool = False) -> bytes:
    """Encode an image as PGM bytes (binary P5 by default, ASCII P2 on request).

    Round-trips bit-exactly: read_pgm(write_pgm(img)) equals img.
    """
    arr = as_gray_image(img)
    h, w = arr.shape
    if ascii:
        lines = [f"P2\n{w} {h}\n255\n"]
        for row in arr:
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        return "".join(lines).encode("ascii")
    return f"P5\n{w} {h}\n255\n".encode("ascii") + arr.tobytes()


@dataclass(frozen=True)
class Sample:
    """One labeled image: pixel data, class index, and its source path."""

    image: np.ndarray
    class_index: int
    path: str


@dataclass(frozen=True)
class LabeledDataset:
    """Class-labeled image collection loaded from a directory tree."""

    classes: list[str]
    samples: list[Sample]

    def class_counts(self) -> list[int]:
        counts = [0] * len(self.classes)
        for s in self.samples:
            counts[s.class_index] += 1
        return counts


def load_dataset(root) -> LabeledDataset:
    """Load a `root/<class>/<image>.pgm` tree into a LabeledDataset.

    Classes are sorted lexicographically and samples by (class, filename),
    so the result is independent of filesystem enumeration order.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root is not a directory: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise DatasetError(f"dataset root has no class directories: {root}")
    classes = [p.name for p in class_dirs]
    samples: list[Sample] = []
    for idx, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.is_file() and p.suffix.lower() == ".pgm")
        if not files:
            raise DatasetError(f"class directory has no .pgm images: {cdir}")
        for f in files:
            try:
                img = read_pgm(f.read_bytes())
            except (OSError, PgmError) as exc:
                raise DatasetError(f"cannot read {f}: {exc}") from exc
            samples.append(Sample(image=img, class_index=idx, path=str(f)))
    return LabeledDataset(classes=classes, samples=samples)
