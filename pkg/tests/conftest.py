import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rambp.synth import write_synthetic_dataset


def random_image(rng, height, width):
    return rng.integers(0, 256, (height, width), dtype=np.uint8)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Tiny 3-class dataset for experiment and CLI tests."""
    root = tmp_path_factory.mktemp("smallset") / "data"
    manifest = write_synthetic_dataset(root, n_classes=3, per_class=8, size=32, seed=11)
    return root, manifest


@pytest.fixture(scope="session")
def acceptance_dataset(tmp_path_factory):
    """The desk-scale trend dataset: 5 classes, 25 train / 25 test, 64x64."""
    root = tmp_path_factory.mktemp("deskset") / "data"
    manifest = write_synthetic_dataset(root, n_classes=5, per_class=50, size=64, seed=7)
    return root, manifest
