"""Experiment protocols: noisy and noise-free classification, retrieval,
window-size sweeps, and their CSV/manifest outputs.

Every emitted number is a pure function of the dataset bytes and the
configuration. Noise seeds are derived per (noise parameter, trial, image)
from the master seed, so no two test images share a generator stream and a
rerun reproduces results byte for byte regardless of the worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import DESCRIPTORS, ChiSquareKNN, make_descriptor
from .image import LabeledDataset, load_dataset
from .metrics import PrCurve, pr_curve
from .noise import NoiseSpec, stream_key, uniform_stream

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "derive_noise_seed",
    "resolve_split",
    "extract_features",
    "run_noisy_classification",
    "run_noise_free_classification",
    "run_retrieval",
    "sweep_window_size",
    "write_features_csv",
    "write_results_csv",
    "write_pr_csv",
    "write_sweep_csv",
    "write_run_manifest",
]

_NOISE_TAG = 0x4E4F4953
_SPLIT_TAG = 0x53504C54
_KIND_IDS = {"salt_pepper": 1, "gaussian_noise": 2, "gaussian_blur": 3}

_SPLIT_KINDS = ("manifest", "random", "groups")
_CONFIG_KEYS = {
    "dataset_root",
    "descriptor",
    "max_window",
    "noise",
    "trials",
    "split",
    "k",
    "seed",
    "workers",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on besides the dataset bytes."""

    dataset_root: str
    descriptor: str = "rambp"
    max_window: int = 5
    noise: tuple[NoiseSpec, ...] = ()
    trials: int = 10
    split: dict = field(default_factory=lambda: {"kind": "random", "partitions": 1})
    k: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.descriptor not in DESCRIPTORS:
            raise ValueError(f"unknown descriptor {self.descriptor!r}; expected one of {sorted(DESCRIPTORS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be an odd integer >= 1, got {self.k}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        kind = self.split.get("kind")
        if kind not in _SPLIT_KINDS:
            raise ValueError(f"split kind must be one of {_SPLIT_KINDS}, got {kind!r}")
        if kind == "random" and int(self.split.get("partitions", 0)) < 1:
            raise ValueError("random split needs partitions >= 1")
        if kind in ("manifest", "groups") and not self.split.get("path"):
            raise ValueError(f"{kind} split needs a path")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "dataset_root" not in data:
            raise ValueError("config requires dataset_root")
        noise = tuple(
            spec if isinstance(spec, NoiseSpec) else NoiseSpec(**spec) for spec in data.get("noise", ())
        )
        kwargs = {k: v for k, v in data.items() if k != "noise"}
        return cls(noise=noise, **kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        noise = []
        for spec in self.noise:
            entry = {"kind": spec.kind, "seed": spec.seed}
            if spec.rho is not None:
                entry["rho"] = spec.rho
            if spec.sigma is not None:
                entry["sigma"] = spec.sigma
            noise.append(entry)
        return {
            "dataset_root": self.dataset_root,
            "descriptor": self.descriptor,
            "max_window": self.max_window,
            "noise": noise,
            "trials": self.trials,
            "split": dict(self.split),
            "k": self.k,
            "seed": self.seed,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class ResultTable:
    """Per-trial accuracies plus the mean accuracy per noise parameter."""

    rows: list[tuple[str, float, int, float]]
    aggregates: list[tuple[str, float, float]]

    def mean_accuracy(self, kind: str, parameter: float) -> float:
        for row_kind, param, acc in self.aggregates:
            if row_kind == kind and param == parameter:
                return acc
        raise KeyError(f"no aggregate for ({kind!r}, {parameter})")


def derive_noise_seed(master_seed: int, kind: str, parameter: float, trial: int, image_index: int) -> int:
    """Stable per-image seed: a pure function of the run coordinates."""
    param_bits = int(np.float64(parameter).view(np.uint64))
    return stream_key(_NOISE_TAG, master_seed, _KIND_IDS[kind], param_bits, trial, image_index)


def _seeded_permutation(key: int, n: int) -> np.ndarray:
    return np.argsort(uniform_stream(key, n), kind="stable")


def resolve_split(cfg: ExperimentConfig, ds: LabeledDataset) -> list[tuple[list[int], list[int]]]:
    """Materialize the configured split policy as (train, test) index lists."""
    kind = cfg.split["kind"]
    if kind == "manifest":
        return _manifest_partitions(cfg.split["path"], cfg.dataset_root, ds)
    if kind == "groups":
        return _group_partitions(cfg.split["path"], cfg.dataset_root, ds)
    partitions = []
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(ds.samples):
        by_class.setdefault(s.class_index, []).append(i)
    for p in range(int(cfg.split["partitions"])):
        train: list[int] = []
        test: list[int] = []
        for c, indices in sorted(by_class.items()):
            if len(indices) < 2:
                raise ValueError(f"class {ds.classes[c]!r} has {len(indices)} sample(s); cannot split 50/50")
            order = _seeded_permutation(stream_key(_SPLIT_TAG, cfg.seed, p, c), len(indices))
            half = len(indices) // 2
            train.extend(indices[j] for j in order[:half])
            test.extend(indices[j] for j in order[half:])
        partitions.append((sorted(train), sorted(test)))
    return partitions


def _relative_index(ds: LabeledDataset, root) -> dict[str, int]:
    root = Path(root)
    index = {}
    for i, s in enumerate(ds.samples):
        index[Path(s.path).relative_to(root).as_posix()] = i
    return index


def _lookup(index: dict[str, int], rel: str, source: str) -> int:
    try:
        return index[Path(rel).as_posix()]
    except KeyError:
        raise ValueError(f"{source} references unknown image {rel!r}") from None


def _manifest_partitions(path, root, ds: LabeledDataset) -> list[tuple[list[int], list[int]]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    parts = data.get("partitions")
    if not parts:
        raise ValueError(f"split manifest {path} has no partitions")
    index = _relative_index(ds, root)
    out = []
    for part in parts:
        train = [_lookup(index, rel, "split manifest") for rel in part["train"]]
        test = [_lookup(index, rel, "split manifest") for rel in part["test"]]
        if not train or not test:
            raise ValueError(f"split manifest {path} has an empty train or test side")
        out.append((train, test))
    return out


def _group_partitions(path, root, ds: LabeledDataset) -> list[tuple[list[int], list[int]]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    groups = data.get("groups")
    if not groups:
        raise ValueError(f"group manifest {path} has no groups mapping")
    index = _relative_index(ds, root)
    assignment: dict[int, str] = {}
    for rel, group in groups.items():
        assignment[_lookup(index, rel, "group manifest")] = str(group)
    if len(assignment) != len(ds.samples):
        raise ValueError("group manifest must assign every dataset image to a group")
    names = sorted(set(assignment.values()))
    if len(names) < 2:
        raise ValueError("group split needs at least two groups")
    out = []
    for held_out in names:
        test = sorted(i for i, g in assignment.items() if g == held_out)
        train = sorted(i for i, g in assignment.items() if g != held_out)
        out.append((train, test))
    return out


def _feature_job(args):
    image, spec_fields, name, max_window = args
    if spec_fields is not None:
        image = NoiseSpec(*spec_fields).apply(image)
    return make_descriptor(name, max_window).transform([image])[0]


def _run_jobs(jobs: list, workers: int) -> list[np.ndarray]:
    if workers <= 1 or len(jobs) <= 1:
        return [_feature_job(j) for j in jobs]
    chunk = max(1, len(jobs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_feature_job, jobs, chunksize=chunk))


def extract_features(images, descriptor: str, max_window: int = 5, workers: int = 1) -> np.ndarray:
    """Descriptor features of a sequence of images, order-preserving."""
    jobs = [(img, None, descriptor, max_window) for img in images]
    return np.vstack(_run_jobs(jobs, workers))


def _extract_noisy(images, specs, descriptor, max_window, workers) -> np.ndarray:
    jobs = [
        (img, (spec.kind, spec.rho, spec.sigma, spec.seed), descriptor, max_window)
        for img, spec in zip(images, specs)
    ]
    return np.vstack(_run_jobs(jobs, workers))


def _accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(predictions == np.asarray(labels)))


def run_noisy_classification(cfg: ExperimentConfig) -> ResultTable:
    """Train on clean images, test on seeded noisy copies, average over trials.

    When the split policy yields several partitions the first one is used;
    noise trials repeat over a fixed train/test assignment.
    """
    if not cfg.noise:
        raise ValueError("noisy classification needs at least one noise spec")
    ds = load_dataset(cfg.dataset_root)
    train_idx, test_idx = resolve_split(cfg, ds)[0]
    train_imgs = [ds.samples[i].image for i in train_idx]
    train_labels = np.asarray([ds.samples[i].class_index for i in train_idx])
    test_imgs = [ds.samples[i].image for i in test_idx]
    test_labels = np.asarray([ds.samples[i].class_index for i in test_idx])

    train_feats = extract_features(train_imgs, cfg.descriptor, cfg.max_window, cfg.workers)
    model = ChiSquareKNN(k=cfg.k).fit(train_feats, train_labels)

    rows = []
    aggregates = []
    for spec in cfg.noise:
        accs = []
        for t in range(cfg.trials):
            seeded = [
                spec.with_seed(derive_noise_seed(cfg.seed, spec.kind, spec.parameter, t, j))
                for j in range(len(test_imgs))
            ]
            feats = _extract_noisy(test_imgs, seeded, cfg.descriptor, cfg.max_window, cfg.workers)
            acc = _accuracy(model.predict(feats), test_labels)
            rows.append((spec.kind, spec.parameter, t, acc))
            accs.append(acc)
        aggregates.append((spec.kind, spec.parameter, float(np.mean(accs))))
    return ResultTable(rows=rows, aggregates=aggregates)


def run_noise_free_classification(cfg: ExperimentConfig) -> ResultTable:
    """Clean train/test accuracy per partition of the configured split."""
    ds = load_dataset(cfg.dataset_root)
    partitions = resolve_split(cfg, ds)
    feats = extract_features([s.image for s in ds.samples], cfg.descriptor, cfg.max_window, cfg.workers)
    labels = np.asarray([s.class_index for s in ds.samples])
    rows = []
    accs = []
    for p, (train_idx, test_idx) in enumerate(partitions):
        model = ChiSquareKNN(k=cfg.k).fit(feats[train_idx], labels[train_idx])
        acc = _accuracy(model.predict(feats[test_idx]), labels[test_idx])
        rows.append(("none", 0.0, p, acc))
        accs.append(acc)
    return ResultTable(rows=rows, aggregates=[("none", 0.0, float(np.mean(accs)))])


def run_retrieval(cfg: ExperimentConfig, ks) -> PrCurve:
    """Noisy queries against the clean database, PR averaged over trials.

    The configuration must carry exactly one noise spec; every dataset image
    serves both as a database entry (clean) and as a query (noisy).
    """
    if len(cfg.noise) != 1:
        raise ValueError("retrieval needs exactly one noise spec")
    spec = cfg.noise[0]
    ds = load_dataset(cfg.dataset_root)
    images = [s.image for s in ds.samples]
    labels = np.asarray([s.class_index for s in ds.samples])
    db_feats = extract_features(images, cfg.descriptor, cfg.max_window, cfg.workers)

    ks_arr = np.asarray(list(ks), dtype=np.int64)
    recall = np.zeros(ks_arr.size)
    precision = np.zeros(ks_arr.size)
    for t in range(cfg.trials):
        seeded = [
            spec.with_seed(derive_noise_seed(cfg.seed, spec.kind, spec.parameter, t, j))
            for j in range(len(images))
        ]
        q_feats = _extract_noisy(images, seeded, cfg.descriptor, cfg.max_window, cfg.workers)
        curve = pr_curve(q_feats, labels, db_feats, labels, ks_arr)
        recall += curve.recall
        precision += curve.precision
    return PrCurve(ks=ks_arr, recall=recall / cfg.trials, precision=precision / cfg.trials)


def sweep_window_size(cfg: ExperimentConfig, sizes) -> list[tuple[int, ResultTable]]:
    """Repeat the noisy protocol for each maximum window size."""
    out = []
    for size in sizes:
        if size < 3 or size % 2 == 0:
            raise ValueError(f"window sizes must be odd and >= 3, got {size}")
        out.append((int(size), run_noisy_classification(replace(cfg, max_window=int(size)))))
    return out


def _fmt(value: float) -> str:
    return repr(float(value))


def write_features_csv(path, paths, labels, features: np.ndarray) -> None:
    """One row per image: path, class index, then bins at 17 significant digits."""
    lines = []
    for p, label, row in zip(paths, labels, features):
        bins = ",".join(f"{v:.17g}" for v in row)
        lines.append(f"{p},{int(label)},{bins}")
    header = "path,class," + ",".join(f"bin_{i}" for i in range(features.shape[1]))
    Path(path).write_text(header + "\n" + "\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_results_csv(path, table: ResultTable) -> None:
    """Trial rows followed by aggregate rows (trial column = 'mean')."""
    lines = ["noise_kind,noise_param,trial,accuracy"]
    for kind, param, trial, acc in table.rows:
        lines.append(f"{kind},{_fmt(param)},{trial},{_fmt(acc)}")
    for kind, param, acc in table.aggregates:
        lines.append(f"{kind},{_fmt(param)},mean,{_fmt(acc)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_pr_csv(path, curve: PrCurve) -> None:
    lines = ["k,recall,precision"]
    for k, r, p in zip(curve.ks, curve.recall, curve.precision):
        lines.append(f"{int(k)},{_fmt(r)},{_fmt(p)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_sweep_csv(path, results: list[tuple[int, ResultTable]]) -> None:
    lines = ["max_window,noise_kind,noise_param,mean_accuracy"]
    for size, table in results:
        for kind, param, acc in table.aggregates:
            lines.append(f"{size},{kind},{_fmt(param)},{_fmt(acc)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_run_manifest(output_path, cfg: ExperimentConfig) -> None:
    """Echo the configuration and software version next to an output file."""
    manifest = {"config": cfg.to_dict(), "version": __version__}
    Path(str(output_path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
