"""Scikit-learn style wrappers so the descriptors and the chi-square k-NN
classifier compose with pipelines, grid search, and the rest of the ecosystem.

Descriptor transformers are stateless: fit only validates parameters and
transform maps a sequence of grayscale images to a feature matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .baselines import lbp_descriptor, lbp_riu2_descriptor, mbp_descriptor
from .image import as_gray_image
from .metrics import knn_classify
from .pattern import rambp_descriptor
from .thresholds import check_max_window

__all__ = [
    "check_images",
    "RAMBPDescriptor",
    "LBPDescriptor",
    "LBPriu2Descriptor",
    "MBPDescriptor",
    "ChiSquareKNN",
    "DESCRIPTORS",
    "make_descriptor",
]


def check_images(X) -> list[np.ndarray]:
    """Validate a sequence (or stacked 3-D array) of grayscale images."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [as_gray_image(im) for im in X]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [as_gray_image(X)]
    try:
        items = list(X)
    except TypeError:
        raise ValueError("X must be a sequence of 2-D grayscale images") from None
    if not items:
        raise ValueError("X must contain at least one image")
    return [as_gray_image(im) for im in items]


class RAMBPDescriptor(TransformerMixin, BaseEstimator):
    """Adaptive median binary pattern histograms (256 bins per image)."""

    n_bins = 256

    def __init__(self, max_window: int = 5):
        self.max_window = max_window

    def fit(self, X, y=None):
        check_max_window(self.max_window)
        return self

    def transform(self, X) -> np.ndarray:
        check_max_window(self.max_window)
        images = check_images(X)
        return np.vstack([rambp_descriptor(im, self.max_window) for im in images])


class LBPDescriptor(TransformerMixin, BaseEstimator):
    """Classic radius-1 binary pattern histograms (256 bins per image)."""

    n_bins = 256

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([lbp_descriptor(im) for im in check_images(X)])


class LBPriu2Descriptor(TransformerMixin, BaseEstimator):
    """Rotation-invariant uniform binary pattern histograms (10 bins)."""

    n_bins = 10

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([lbp_riu2_descriptor(im) for im in check_images(X)])


class MBPDescriptor(TransformerMixin, BaseEstimator):
    """Median binary pattern histograms (512 bins per image)."""

    n_bins = 512

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([mbp_descriptor(im) for im in check_images(X)])


DESCRIPTORS = {
    "rambp": RAMBPDescriptor,
    "lbp": LBPDescriptor,
    "lbp_riu2": LBPriu2Descriptor,
    "mbp": MBPDescriptor,
}


def make_descriptor(name: str, max_window: int = 5):
    """Instantiate a descriptor transformer by its registry name."""
    try:
        cls = DESCRIPTORS[name]
    except KeyError:
        raise ValueError(f"unknown descriptor {name!r}; expected one of {sorted(DESCRIPTORS)}") from None
    if cls is RAMBPDescriptor:
        return cls(max_window=max_window)
    return cls()


class ChiSquareKNN(ClassifierMixin, BaseEstimator):
    """k-nearest-neighbor classifier on histogram features with chi-square distance.

    Distance ties keep training enumeration order; vote ties go to the tied
    class owning the single nearest member. k should be odd to keep votes
    decisive, but any k >= 1 is accepted.
    """

    def __init__(self, k: int = 1):
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D feature matrix")
        if y.shape[0] != X.shape[0]:
            raise ValueError("y length does not match X")
        if self.k < 1 or self.k > X.shape[0]:
            raise ValueError(f"k must be in [1, {X.shape[0]}], got {self.k}")
        self.X_ = X
        self.y_ = y
        self.classes_ = np.unique(y)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        return np.asarray([knn_classify(row, self.X_, self.y_, self.k) for row in X])
