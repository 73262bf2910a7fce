"""Seeded synthetic texture dataset for desk-scale experiments and tests.

Each class is a layered random field: piecewise-constant blobs at a
class-specific length scale carry the coarse structure, a gentle shading
wave gives within-blob gradients, and a high-frequency dither plus light
speckle carry the fine structure. The fine layers dominate pixel-scale
comparisons on clean images but are destroyed by impulse noise, additive
noise, and blur, while the blob structure survives, so descriptors that
rely on regional medians keep separating the classes after degradation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .image import write_pgm
from .noise import normal_stream, separable_blur, stream_key, uniform_stream

__all__ = [
    "ClassRecipe",
    "default_recipes",
    "synthetic_texture",
    "write_synthetic_dataset",
]

_TAG = 0x53594E54  # stream domain tag for this module


@dataclass(frozen=True)
class ClassRecipe:
    """Generation parameters of one texture class.

    The blob and ring layers carry structure at scales that survive blur,
    additive noise, and impulse corruption; the dither and speckle layers
    live at pixel scale and are destroyed by all three.
    """

    name: str
    blob_scale: float  # smoothing radius of the level field, pixels
    blob_levels: int = 4
    blob_spread: float = 50.0  # half-range of the level values around 128
    ring_wavelength: float | None = None  # concentric waves, center random per sample
    ring_amplitude: float = 14.0
    shade_amplitude: float = 8.0
    shade_period: float = 24.0
    dither_amplitude: float = 3.0
    dither_period: float = 3.0
    dither_theta: float | None = None  # fixed micro-grating orientation; random when None
    speckle_sigma: float = 1.0


def default_recipes(n_classes: int = 5) -> list[ClassRecipe]:
    """One blob class plus a ring-wavelength ladder, distinct micro orientations.

    The mix is chosen so pixel-scale comparisons cannot recover the class
    once the fine layers are destroyed: ring classes share their local slope
    statistics and differ only in medium-range wave structure, which regional
    medians keep reading through noise.
    """
    waves = [7.0, 10.5, 15.0, 23.0, 34.0, 48.0, 60.0]
    if not 1 <= n_classes <= len(waves) + 1:
        raise ValueError(f"n_classes must be in [1, {len(waves) + 1}]")
    recipes = [ClassRecipe(name="class_0", blob_scale=2.0)]
    for i in range(1, n_classes):
        recipes.append(
            ClassRecipe(
                name=f"class_{i}",
                blob_scale=6.0,
                blob_spread=0.0,
                ring_wavelength=waves[i - 1],
                ring_amplitude=22.0,
            )
        )
    step = math.pi / (2 * max(1, n_classes - 1))
    return [replace(r, dither_theta=i * step) for i, r in enumerate(recipes)]


def _quantize_levels(field: np.ndarray, levels: int, spread: float) -> np.ndarray:
    """Quantile-quantize a field into evenly spaced gray levels around 128."""
    qs = np.quantile(field, np.arange(1, levels) / levels)
    idx = np.searchsorted(qs, field)
    values = np.linspace(128.0 - spread, 128.0 + spread, levels)
    return values[idx]


def synthetic_texture(recipe: ClassRecipe, size: int, key: int) -> np.ndarray:
    """One size x size sample of a class, fully determined by the stream key."""
    n = size * size
    coords = np.arange(size, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")

    base = normal_stream(stream_key(key, 1), n).reshape(size, size)
    blobs = _quantize_levels(separable_blur(base, recipe.blob_scale), recipe.blob_levels, recipe.blob_spread)

    u = uniform_stream(stream_key(key, 2), 7)
    shade = recipe.shade_amplitude * np.sin(
        2.0 * math.pi * (xx * math.cos(2.0 * math.pi * u[0]) + yy * math.sin(2.0 * math.pi * u[0]))
        / recipe.shade_period
        + 2.0 * math.pi * u[1]
    )

    rings = 0.0
    if recipe.ring_wavelength is not None:
        # Concentric waves around a random center: locally oriented, globally
        # isotropic, so the code histogram is stable across samples.
        cy, cx = size * u[2], size * u[3]
        radius = np.hypot(yy - cy, xx - cx)
        rings = recipe.ring_amplitude * np.sin(
            2.0 * math.pi * radius / recipe.ring_wavelength + 2.0 * math.pi * u[4]
        )

    theta = 2.0 * math.pi * u[5] if recipe.dither_theta is None else recipe.dither_theta
    dither = recipe.dither_amplitude * np.sin(
        2.0 * math.pi * (xx * math.cos(theta) + yy * math.sin(theta)) / recipe.dither_period
        + 2.0 * math.pi * u[6]
    )

    speckle = recipe.speckle_sigma * normal_stream(stream_key(key, 3), n).reshape(size, size)

    img = blobs + shade + rings + dither + speckle
    return np.clip(np.rint(img), 5, 250).astype(np.uint8)


def write_synthetic_dataset(
    root,
    n_classes: int = 5,
    per_class: int = 50,
    size: int = 64,
    seed: int = 0,
    train_fraction: float = 0.5,
    recipes: list[ClassRecipe] | None = None,
) -> Path:
    """Write a `root/<class>/img_###.pgm` tree plus a split manifest.

    The manifest holds one partition assigning the first ceil(fraction *
    per_class) images of every class to training, the rest to testing.
    Returns the manifest path.
    """
    root = Path(root)
    if recipes is None:
        recipes = default_recipes(n_classes)
    if len(recipes) != n_classes:
        raise ValueError("recipes length must equal n_classes")
    if per_class < 2:
        raise ValueError("per_class must be >= 2 so both split sides are nonempty")
    n_train = max(1, min(per_class - 1, math.ceil(train_fraction * per_class)))

    train_paths: list[str] = []
    test_paths: list[str] = []
    for c, recipe in enumerate(recipes):
        cdir = root / recipe.name
        cdir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            img = synthetic_texture(recipe, size, stream_key(_TAG, seed, c, i))
            rel = f"{recipe.name}/img_{i:03d}.pgm"
            (root / rel).write_bytes(write_pgm(img))
            (train_paths if i < n_train else test_paths).append(rel)

    manifest_path = root / "manifest.json"
    manifest = {"partitions": [{"train": train_paths, "test": test_paths}]}
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path
