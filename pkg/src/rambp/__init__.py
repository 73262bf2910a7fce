"""Noise-robust adaptive median binary pattern texture descriptors.

The package provides the descriptor pipeline (corrupted-pixel detection,
adaptive median thresholds, adaptive-radius binary patterns), reference
baselines, seeded noise models, chi-square k-NN classification, retrieval
scoring, and an experiment CLI. Estimator classes follow the scikit-learn
fit/transform/predict conventions.
"""

__version__ = "0.1.0"

from .baselines import lbp_descriptor, lbp_riu2_descriptor, mbp_descriptor, riu2_map
from .detection import BoundaryAnalysis, boundary_analysis, classify_image, classify_pixel
from .estimators import (
    ChiSquareKNN,
    LBPDescriptor,
    LBPriu2Descriptor,
    MBPDescriptor,
    RAMBPDescriptor,
    make_descriptor,
)
from .image import LabeledDataset, Sample, load_dataset, read_pgm, sample_padded, write_pgm
from .metrics import PrCurve, RankedRetrieval, chi_square, knn_classify, pr_curve, rank_references, recall_precision
from .noise import NoiseSpec, gaussian_blur, gaussian_noise, salt_pepper
from .pattern import patch_centers, rambp_code, rambp_code_image, rambp_descriptor
from .thresholds import ThresholdMap, adaptive_window_median, build_threshold_map

__all__ = [
    "__version__",
    "BoundaryAnalysis",
    "ChiSquareKNN",
    "LBPDescriptor",
    "LBPriu2Descriptor",
    "LabeledDataset",
    "MBPDescriptor",
    "NoiseSpec",
    "PrCurve",
    "RAMBPDescriptor",
    "RankedRetrieval",
    "Sample",
    "ThresholdMap",
    "adaptive_window_median",
    "boundary_analysis",
    "build_threshold_map",
    "chi_square",
    "classify_image",
    "classify_pixel",
    "gaussian_blur",
    "gaussian_noise",
    "knn_classify",
    "lbp_descriptor",
    "lbp_riu2_descriptor",
    "load_dataset",
    "make_descriptor",
    "mbp_descriptor",
    "patch_centers",
    "pr_curve",
    "rambp_code",
    "rambp_code_image",
    "rambp_descriptor",
    "rank_references",
    "read_pgm",
    "recall_precision",
    "riu2_map",
    "salt_pepper",
    "sample_padded",
    "write_pgm",
]
