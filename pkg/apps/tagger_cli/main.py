"""
Tagger command-line entry point.

Subcommands:
    generate   Write a Shapes or TextureMNIST dataset as a TAGD container
    train      Train unsupervised or semi-supervised; writes a checkpoint and metrics
    eval       Per-iteration denoising cost, AMI and top-k error of a checkpoint
    visualize  Per-iteration panel images for one example, optionally with an ablated group

Exit codes: 0 success, 2 usage, config or data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from packages.autodiff import AutodiffError, DomainError, Stream, make_rng
from packages.data_foundry import (
    MAX_OBJECTS,
    SPRITES_PER_IMAGE,
    DataFoundryError,
    DatasetBundle,
    find_mnist_files,
    generate_shapes,
    generate_shapes_splits,
    generate_textured_mnist,
    generate_textured_mnist_splits,
    load_bundle,
    load_idx,
    save_bundle,
)
from packages.eval_suite import EvaluationError, EvaluationOptions, evaluate, format_report_tsv, write_report
from packages.ladder import LadderError
from packages.run_manifest import RunManifest, set_run_id
from packages.structured_logging import get_logger, setup_logging_from_settings
from packages.tag_mechanism import MaskInvariantError, TagError
from packages.tagger_settings import get_tagger_settings
from packages.train_engine import (
    ConfigLoadError,
    TrainConfig,
    TrainingDivergedError,
    build_train_config,
    load_checkpoint,
    load_labeled_indices,
    load_train_config,
    select_labeled_indices,
    train_semisupervised,
    train_unsupervised,
)
from packages.visualization import render_example

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DATASETS = ("shapes", "tmnist1", "tmnist2")


class UsageError(Exception):
    """Raised when flags are individually valid but do not fit together."""

    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagger", description="Iterative perceptual grouping")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="Generate a dataset container")
    gen.add_argument("--dataset", required=True, choices=DATASETS)
    gen.add_argument("--count", type=int, help="Examples; omit for the standard splits")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--objects", type=int, help="Sprites per Shapes image (default 3)")
    gen.add_argument("--mnist-dir", type=Path, help="Directory with the MNIST IDX files")
    gen.add_argument("--out", type=Path, required=True)

    train = commands.add_parser("train", help="Train a Tagger")
    train.add_argument("--config", type=Path, help="key=value training config")
    train.add_argument("--preset", help="Preset from config/presets.yml")
    train.add_argument("--data", type=Path, required=True)
    train.add_argument("--validation", type=Path, help="Held-out dataset container")
    train.add_argument(
        "--labels",
        default="none",
        help="'none' (unsupervised), 'auto' (draw label_budget examples) or a file of indices",
    )
    train.add_argument("--resume", type=Path, help="Checkpoint to continue from")
    train.add_argument("--metrics", type=Path, help="Metrics TSV (default: <out>.metrics.tsv)")
    train.add_argument("--out", type=Path, required=True, help="Checkpoint path")

    ev = commands.add_parser("eval", help="Evaluate a checkpoint")
    ev.add_argument("--checkpoint", type=Path, required=True)
    ev.add_argument("--data", type=Path, required=True)
    ev.add_argument("--iterations", type=int, help="T at test time (default: eval_iterations)")
    ev.add_argument("--groups", type=int, help="K at test time (default: trained K)")
    ev.add_argument("--ablate-group", type=int, help="Remove a group at the last iteration")
    ev.add_argument("--scoring", choices=("set", "per_class"), default="set")
    ev.add_argument("--batch-size", type=int)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--report", type=Path, help="Also write the report here")

    vis = commands.add_parser("visualize", help="Render the grouping of one example")
    vis.add_argument("--checkpoint", type=Path, required=True)
    vis.add_argument("--data", type=Path, required=True)
    vis.add_argument("--example-index", type=int, default=0)
    vis.add_argument("--ablate-group", type=int)
    vis.add_argument("--iterations", type=int)
    vis.add_argument("--groups", type=int)
    vis.add_argument("--seed", type=int, default=0)
    vis.add_argument("--format", choices=("png", "ppm"), default="png", dest="image_format")
    vis.add_argument("--scale", type=int, default=4)
    vis.add_argument("--out-dir", type=Path, required=True)
    return parser


def _arguments(args: argparse.Namespace) -> dict[str, Any]:
    return {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items() if v is not None}


def _split_path(out: Path, split: str) -> Path:
    return out.with_name(f"{out.stem}.{split}{out.suffix}")


def cmd_generate(args: argparse.Namespace, manifest: RunManifest) -> list[Path]:
    """Write one container, or one per split when ``--count`` is omitted."""
    if args.count is not None and args.count < 1:
        raise UsageError("--count must be >= 1")
    if args.objects is not None and args.dataset != "shapes":
        raise UsageError("--objects applies to --dataset shapes only")
    objects = SPRITES_PER_IMAGE if args.objects is None else args.objects
    if not 1 <= objects <= MAX_OBJECTS:
        raise UsageError(f"--objects must be in 1..{MAX_OBJECTS}")

    bundles: dict[str | None, DatasetBundle]
    if args.dataset == "shapes":
        if args.count is None:
            bundles = dict(generate_shapes_splits(args.seed, objects=objects))
        else:
            bundles = {None: generate_shapes(args.count, args.seed, objects=objects)}
    else:
        if args.mnist_dir is None:
            raise UsageError(f"--dataset {args.dataset} needs --mnist-dir with the MNIST IDX files")
        files = find_mnist_files(args.mnist_dir)
        digits = 1 if args.dataset == "tmnist1" else 2
        train_images, train_labels = load_idx(files["train_images"]), load_idx(files["train_labels"])
        if args.count is None:
            bundles = dict(
                generate_textured_mnist_splits(
                    digits,
                    train_images,
                    train_labels,
                    load_idx(files["test_images"]),
                    load_idx(files["test_labels"]),
                    args.seed,
                )
            )
        else:
            bundles = {
                None: generate_textured_mnist(args.count, digits, train_images, train_labels, args.seed)
            }

    written = []
    for split, bundle in bundles.items():
        path = args.out if split is None else _split_path(args.out, split)
        path.parent.mkdir(parents=True, exist_ok=True)
        written.append(save_bundle(path, bundle))
    for path in written:
        manifest.finished([str(p) for p in written]).write_alongside(path)
    return written


def _positive_override(value: int | None, default: int, flag: str) -> int:
    """Flag value when given, else the checkpoint's; an explicit value below 1 is an error."""
    if value is None:
        return default
    if value < 1:
        raise UsageError(f"{flag} must be >= 1, got {value}")
    return value


def _train_config(args: argparse.Namespace) -> TrainConfig:
    if args.config is not None:
        return load_train_config(args.config, preset=args.preset)
    return build_train_config(args.preset)


def cmd_train(args: argparse.Namespace, manifest: RunManifest) -> list[Path]:
    """Train, writing a checkpoint after every epoch plus a metrics file."""
    config = _train_config(args)
    dataset = load_bundle(args.data)
    validation = load_bundle(args.validation) if args.validation else None
    resume_from = load_checkpoint(args.resume) if args.resume else None
    metrics_path = args.metrics or args.out.with_name(args.out.name + ".metrics.tsv")
    common: dict[str, Any] = {
        "validation": validation,
        "checkpoint_path": args.out,
        "metrics_path": metrics_path,
        "resume_from": resume_from,
    }

    if args.labels == "none":
        result = train_unsupervised(config, dataset, **common)
    else:
        if args.labels == "auto":
            labeled = select_labeled_indices(
                dataset, config.label_budget, make_rng(config.seed, Stream.LABELS)
            )
        else:
            labeled = load_labeled_indices(args.labels)
        result = train_semisupervised(config, dataset, labeled, **common)

    written = [p for p in (result.checkpoint_path, metrics_path) if p is not None and Path(p).exists()]
    for path in written:
        manifest.finished([str(p) for p in written]).write_alongside(path)
    return [Path(p) for p in written]


def cmd_eval(args: argparse.Namespace, manifest: RunManifest) -> list[Path]:
    """Print the report on stdout; notices go to stderr."""
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = load_bundle(args.data)
    config = checkpoint.config
    options = EvaluationOptions(
        groups=_positive_override(args.groups, config.groups, "--groups"),
        iterations=_positive_override(args.iterations, config.eval_iterations, "--iterations"),
        corruption=config.corruption_spec,
        batch_size=_positive_override(args.batch_size, config.batch_size, "--batch-size"),
        seed=args.seed,
        eval_keep_sigma=config.eval_keep_sigma,
        ablate=args.ablate_group,
        scoring=args.scoring,
    )
    report = evaluate(checkpoint.params, dataset, options)
    sys.stdout.write(format_report_tsv(report))
    for notice in report.notices:
        print(f"notice: {notice}", file=sys.stderr)

    if args.report is None:
        return []
    path = write_report(report, args.report)
    manifest.finished([str(path)]).write_alongside(path)
    return [path]


def cmd_visualize(args: argparse.Namespace, manifest: RunManifest) -> list[Path]:
    checkpoint = load_checkpoint(args.checkpoint)
    dataset = load_bundle(args.data)
    config = checkpoint.config
    groups = _positive_override(args.groups, config.groups, "--groups")
    if args.ablate_group is not None and not 0 <= args.ablate_group < groups:
        raise UsageError(f"--ablate-group must lie in 0..{groups - 1}")
    if args.scale < 1:
        raise UsageError("--scale must be >= 1")
    written = render_example(
        checkpoint.params,
        dataset,
        args.example_index,
        args.out_dir,
        groups=groups,
        iterations=_positive_override(args.iterations, config.eval_iterations, "--iterations"),
        corruption=config.corruption_spec,
        seed=args.seed,
        ablate=args.ablate_group,
        eval_keep_sigma=config.eval_keep_sigma,
        image_format=args.image_format,
        scale=args.scale,
    )
    finished = manifest.finished([str(p) for p in written])
    for path in written:
        finished.write_alongside(path)
    return written


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "visualize": cmd_visualize,
}

NUMERIC_ERRORS = (ArithmeticError, DomainError, MaskInvariantError)
USAGE_ERRORS = (
    UsageError,
    AutodiffError,
    ConfigLoadError,
    DataFoundryError,
    EvaluationError,
    LadderError,
    TagError,
    ValueError,
    OSError,
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        settings = get_tagger_settings(force_reload=True)
    except ValidationError as e:
        print(f"error: invalid TAGGER_* environment: {e}", file=sys.stderr)
        return EXIT_USAGE
    setup_logging_from_settings(settings)

    config_path = getattr(args, "config", None)
    try:
        manifest = RunManifest.for_config(
            args.command,
            config_path,
            seed=getattr(args, "seed", None),
            inputs=[
                str(getattr(args, name))
                for name in ("data", "validation", "checkpoint", "resume", "mnist_dir")
                if getattr(args, name, None) is not None
            ],
            arguments=_arguments(args),
        )
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    set_run_id(str(manifest.run_id))
    logger.info("command_started", command=args.command, arguments=manifest.arguments)

    try:
        written = COMMANDS[args.command](args, manifest)
    except TrainingDivergedError as e:
        logger.error("training_diverged", error=str(e), last_checkpoint=str(e.last_checkpoint))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except NUMERIC_ERRORS as e:
        logger.error("numeric_failure", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except USAGE_ERRORS as e:
        logger.error("command_failed", command=args.command, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logger.info("command_completed", command=args.command, outputs=[str(p) for p in written])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
