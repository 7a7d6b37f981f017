"""Command-line entry point.

Subcommands: run (one experiment), sweep (a directory of configs), table
(combine emitted bundles), validate (check an embedding file), and
gen-synthetic (write a self-contained synthetic dataset).

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from pathlib import Path

from .data import load_dataset
from .errors import ConfigError, DataError
from .harness import (ExperimentConfig, SweepOutcome, aggregate_bundles,
                      run_experiment, sweep)
from .report import (emit_outputs, emit_sweep_outputs, format_combined_md,
                     load_bundle)
from .synthetic import SyntheticSpec, write_synthetic


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldstart",
        description="Cold-start anomaly detection over embedding files: "
                    "zero-shot scoring, stream-adapted centers, and "
                    "streaming AUROC evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--out", default=None, help="override the config output_dir")
    p_run.add_argument("--seeds", default=None,
                       help="comma-separated stream seeds; runs one experiment per "
                            "seed and writes an aggregate.json with mean/std")
    p_run.add_argument("--no-figure", action="store_true",
                       help="skip rendering curves.png")

    p_sweep = sub.add_parser("sweep", help="run every *.json config in a directory")
    p_sweep.add_argument("--config-dir", required=True)
    p_sweep.add_argument("--out", required=True, help="sweep output directory")
    p_sweep.add_argument("--workers", type=int, default=None)

    p_table = sub.add_parser("table", help="combine emitted summary.json bundles")
    p_table.add_argument("--bundles", required=True,
                         help="glob over summary.json files")
    p_table.add_argument("--out", default=None, help="write markdown here "
                         "instead of stdout")

    p_val = sub.add_parser("validate", help="check an embedding file")
    p_val.add_argument("--dataset", required=True)

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic embedding file")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--classes", type=int, default=10)
    p_gen.add_argument("--dim", type=int, default=32)
    p_gen.add_argument("--seed", type=int, default=7)
    p_gen.add_argument("--oos-classes", type=int, default=5)
    p_gen.add_argument("--train-per-class", type=int, default=60)
    p_gen.add_argument("--test-per-class", type=int, default=30)
    p_gen.add_argument("--oos-pool-size", type=int, default=150)
    p_gen.add_argument("--oos-test-size", type=int, default=150)
    p_gen.add_argument("--cluster-std", type=float, default=0.6)
    p_gen.add_argument("--descriptor-noise", type=float, default=1.0)
    p_gen.add_argument("--oos-spread", type=float, default=1.0)
    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.out:
        config = ExperimentConfig(
            dataset_path=config.dataset_path, detectors=config.detectors,
            stream=config.stream, metric=config.metric,
            eval_fractions=config.eval_fractions, eval_stride=config.eval_stride,
            output_dir=Path(args.out))
    out_dir = config.output_dir
    if out_dir is None:
        raise ConfigError("no output directory: set output_dir in the config or pass --out")
    figure = not args.no_figure
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        if not seeds:
            raise ConfigError(f"no seeds parsed from {args.seeds!r}")
        bundles = []
        for seed in seeds:
            bundle = run_experiment(config.with_seed(seed))
            emit_outputs(bundle, out_dir / f"seed_{seed}", figure=figure)
            bundles.append(bundle)
            print(f"seed {seed}: done ({bundle.stream_length} steps)")
        agg = aggregate_bundles(bundles)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "aggregate.json").write_text(
            json.dumps(agg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {out_dir / 'aggregate.json'}")
        return 0
    bundle = run_experiment(config)
    paths = emit_outputs(bundle, out_dir, figure=figure)
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def _cmd_sweep(args) -> int:
    config_dir = Path(args.config_dir)
    files = sorted(config_dir.glob("*.json"))
    if not files:
        raise ConfigError(f"no *.json configs in {config_dir}")
    configs = []
    labels = []
    parse_failures = []
    for f in files:
        labels_name = f.stem
        try:
            configs.append(ExperimentConfig.from_file(f))
            labels.append(labels_name)
        except (ConfigError, DataError) as exc:
            parse_failures.append((labels_name, str(exc)))
    outcomes = list(sweep(configs, labels=labels, workers=args.workers)) if configs else []
    for name, err in parse_failures:
        outcomes.append(SweepOutcome(label=name, config=None, bundle=None, error=err))
    paths = emit_sweep_outputs(outcomes, args.out)
    failed = [oc for oc in outcomes if not oc.ok]
    for oc in outcomes:
        status = "ok" if oc.ok else f"ERROR: {oc.error}"
        print(f"{oc.label}: {status}")
    for p in paths.values():
        print(f"wrote {p}")
    return 3 if failed else 0


def _cmd_table(args) -> int:
    files = sorted(glob.glob(args.bundles, recursive=True))
    if not files:
        raise DataError(f"no bundle files match {args.bundles!r}")
    bundles = [load_bundle(f) for f in files]
    text = format_combined_md(bundles)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_validate(args) -> int:
    ds = load_dataset(args.dataset)
    splits = {name: len(ds.split(name)) for name in ("train_pool", "oos_pool", "test")}
    oos_test = sum(1 for it in ds.split("test") if it.is_oos)
    print(f"ok: {args.dataset}")
    print(f"  encoder={ds.header.encoder} domain={ds.header.domain} dim={ds.header.dim}")
    print(f"  classes={len(ds.descriptors)}")
    print(f"  train_pool={splits['train_pool']} oos_pool={splits['oos_pool']} "
          f"test={splits['test']} (oos in test: {oos_test})")
    return 0


def _cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(
        classes=args.classes, dim=args.dim, seed=args.seed,
        oos_classes=args.oos_classes, train_per_class=args.train_per_class,
        test_per_class=args.test_per_class, oos_pool_size=args.oos_pool_size,
        oos_test_size=args.oos_test_size, cluster_std=args.cluster_std,
        descriptor_noise=args.descriptor_noise, oos_spread=args.oos_spread)
    ds = write_synthetic(spec, args.out)
    print(f"wrote {args.out}: {len(ds.descriptors)} classes, "
          f"{len(ds.items)} items, dim={ds.header.dim}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "table": _cmd_table,
    "validate": _cmd_validate,
    "gen-synthetic": _cmd_gen_synthetic,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
