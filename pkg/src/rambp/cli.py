"""Command-line interface for feature extraction, noise injection, and the
classification, retrieval, and window-sweep experiment protocols.

Every subcommand accepts `--config file.json` carrying the experiment
configuration; explicit flags override config values. Outputs are CSV files
with a JSON run manifest written next to them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .estimators import DESCRIPTORS
from .experiments import (
    ExperimentConfig,
    derive_noise_seed,
    extract_features,
    run_noise_free_classification,
    run_noisy_classification,
    run_retrieval,
    sweep_window_size,
    write_features_csv,
    write_pr_csv,
    write_results_csv,
    write_run_manifest,
    write_sweep_csv,
)
from .image import load_dataset, write_pgm
from .noise import NoiseSpec
from .synth import write_synthetic_dataset

__all__ = ["main"]


def _parse_ks(text: str) -> list[int]:
    """Accept '1:39:2' ranges (inclusive) or comma lists like '1,3,5'."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"bad k range {text!r}; use start:stop[:step]")
        start, stop, step = parts
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p]


def _parse_sizes(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def _parse_split(text: str) -> dict:
    kind, _, rest = text.partition(":")
    if kind == "random":
        return {"kind": "random", "partitions": int(rest or "1")}
    if kind in ("manifest", "groups"):
        if not rest:
            raise argparse.ArgumentTypeError(f"{kind} split needs a path, e.g. {kind}:splits.json")
        return {"kind": kind, "path": rest}
    raise argparse.ArgumentTypeError(f"unknown split {text!r}; use random:N, manifest:PATH, or groups:PATH")


def _add_experiment_flags(parser: argparse.ArgumentParser, with_noise: bool = True) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment config; flags override its values")
    parser.add_argument("--dataset", help="dataset root (one subdirectory per class, PGM images)")
    parser.add_argument("--descriptor", choices=sorted(DESCRIPTORS))
    parser.add_argument("--max-window", type=int, dest="max_window")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--split", type=_parse_split, help="random:N, manifest:PATH, or groups:PATH")
    parser.add_argument("--k", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    if with_noise:
        parser.add_argument("--noise-kind", choices=("salt_pepper", "gaussian_noise", "gaussian_blur"))
        parser.add_argument("--rho", type=float, nargs="+", help="salt-and-pepper densities to sweep")
        parser.add_argument("--sigma", type=float, nargs="+", help="Gaussian standard deviations to sweep")


def _noise_from_args(args) -> list[NoiseSpec] | None:
    kind = getattr(args, "noise_kind", None)
    if kind is None:
        if getattr(args, "rho", None) or getattr(args, "sigma", None):
            raise SystemExit("error: --rho/--sigma require --noise-kind")
        return None
    if kind == "salt_pepper":
        if not args.rho:
            raise SystemExit("error: salt_pepper needs --rho")
        return [NoiseSpec(kind=kind, rho=r) for r in args.rho]
    if not args.sigma:
        raise SystemExit(f"error: {kind} needs --sigma")
    return [NoiseSpec(kind=kind, sigma=s) for s in args.sigma]


def _build_config(args, need_noise: bool = False) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise SystemExit(f"error: config {args.config} must hold a JSON object")
    overrides = {
        "dataset_root": args.dataset,
        "descriptor": getattr(args, "descriptor", None),
        "max_window": getattr(args, "max_window", None),
        "trials": getattr(args, "trials", None),
        "split": getattr(args, "split", None),
        "k": getattr(args, "k", None),
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    noise = _noise_from_args(args)
    if noise is not None:
        data["noise"] = noise
    if "dataset_root" not in data or data["dataset_root"] is None:
        raise SystemExit("error: --dataset (or dataset_root in --config) is required")
    try:
        cfg = ExperimentConfig.from_dict(data)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None
    if need_noise and not cfg.noise:
        raise SystemExit("error: this command needs a noise spec (--noise-kind with --rho/--sigma)")
    return cfg


def _cmd_synth(args) -> int:
    manifest = write_synthetic_dataset(
        args.out,
        n_classes=args.classes,
        per_class=args.per_class,
        size=args.size,
        seed=args.seed,
    )
    print(f"wrote {args.classes} classes x {args.per_class} images under {args.out}")
    print(f"split manifest: {manifest}")
    return 0


def _cmd_extract(args) -> int:
    cfg = _build_config(args)
    ds = load_dataset(cfg.dataset_root)
    features = extract_features(
        [s.image for s in ds.samples], cfg.descriptor, cfg.max_window, cfg.workers
    )
    paths = [Path(s.path).relative_to(cfg.dataset_root).as_posix() for s in ds.samples]
    write_features_csv(args.out, paths, [s.class_index for s in ds.samples], features)
    write_run_manifest(args.out, cfg)
    print(f"wrote {features.shape[0]} x {features.shape[1]} features to {args.out}")
    return 0


def _cmd_noise(args) -> int:
    if args.kind == "salt_pepper":
        if args.rho is None:
            raise SystemExit("error: salt_pepper needs --rho")
        spec = NoiseSpec(kind=args.kind, rho=args.rho)
    else:
        if args.sigma is None:
            raise SystemExit(f"error: {args.kind} needs --sigma")
        spec = NoiseSpec(kind=args.kind, sigma=args.sigma)
    ds = load_dataset(args.input)
    out_root = Path(args.out)
    for j, sample in enumerate(ds.samples):
        seeded = spec.with_seed(derive_noise_seed(args.seed, spec.kind, spec.parameter, 0, j))
        rel = Path(sample.path).relative_to(args.input)
        target = out_root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(write_pgm(seeded.apply(sample.image)))
    print(f"wrote {len(ds.samples)} noisy images under {out_root}")
    return 0


def _cmd_classify(args) -> int:
    cfg = _build_config(args, need_noise=(args.mode == "noisy"))
    if args.mode == "noisy":
        table = run_noisy_classification(cfg)
    else:
        table = run_noise_free_classification(cfg)
    write_results_csv(args.out, table)
    write_run_manifest(args.out, cfg)
    for kind, param, acc in table.aggregates:
        print(f"{kind} param={param:g}: mean accuracy {acc:.4f}")
    return 0


def _cmd_retrieve(args) -> int:
    cfg = _build_config(args, need_noise=True)
    if len(cfg.noise) != 1:
        raise SystemExit("error: retrieval takes exactly one noise parameter")
    curve = run_retrieval(cfg, args.ks)
    write_pr_csv(args.out, curve)
    write_run_manifest(args.out, cfg)
    print(f"wrote PR curve ({len(curve.ks)} depths) to {args.out}")
    return 0


def _cmd_sweep_window(args) -> int:
    cfg = _build_config(args, need_noise=True)
    results = sweep_window_size(cfg, args.sizes)
    write_sweep_csv(args.out, results)
    write_run_manifest(args.out, cfg)
    for size, table in results:
        for kind, param, acc in table.aggregates:
            print(f"max_window={size} {kind} param={param:g}: mean accuracy {acc:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rambp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic class-labeled texture dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--per-class", type=int, default=50, dest="per_class")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("extract", help="extract descriptor features to CSV")
    _add_experiment_flags(p, with_noise=False)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("noise", help="apply a noise model to a dataset and write PGMs")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", required=True, choices=("salt_pepper", "gaussian_noise", "gaussian_blur"))
    p.add_argument("--rho", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_noise)

    p = sub.add_parser("classify", help="run the noisy or noise-free classification protocol")
    _add_experiment_flags(p)
    p.add_argument("--mode", choices=("noisy", "noise-free"), default="noisy")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("retrieve", help="noisy-query retrieval PR curve")
    _add_experiment_flags(p)
    p.add_argument("--ks", type=_parse_ks, default=_parse_ks("1:39:2"))
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("sweep-window", help="noisy protocol across maximum window sizes")
    _add_experiment_flags(p)
    p.add_argument("--sizes", type=_parse_sizes, default=[3, 5, 7])
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_sweep_window)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
