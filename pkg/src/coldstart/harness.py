"""End-to-end streaming evaluation.

At each evaluated time step t the harness fits every configured detector
on the first t stream observations and scores the entire test set,
producing one AUROC per step plus prefix-averaged summaries. The loop is
exact but never naive:

* zero-shot scores are computed once (the curve is constant by
  construction);
* the nearest-observation detector keeps a running minimum distance per
  test item, updated with the single new observation each step;
* adaptation re-runs per step but reuses the cached nearest-descriptor
  assignment of every observation (descriptors never move), so only the
  filter threshold and the per-class re-estimation are recomputed.

Equivalence of these shortcuts with full per-step refitting is enforced
by the test suite.
"""

from __future__ import annotations

import concurrent.futures
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__ as _VERSION
from . import vectors
from .data import Dataset, StreamSpec, build_stream, load_dataset
from .detectors import (AdaptationMethod, TauPolicy, adapt, descriptor_matrix)
from .errors import ConfigError, DataError
from .metrics import Auc2Summary, AucCurve, auroc_scores, summarize

DEFAULT_FRACTIONS = (0.10, 0.25, 0.50, 1.00)
DETECTOR_NAMES = ("zs", "dn2", "coldfusion")


@dataclass(frozen=True)
class DetectorSpec:
    """One detector entry of an experiment config."""

    name: str
    tau: TauPolicy = field(default_factory=TauPolicy.none)
    adaptation: AdaptationMethod = field(default_factory=AdaptationMethod)
    label: str | None = None

    def __post_init__(self) -> None:
        if self.name not in DETECTOR_NAMES:
            raise ConfigError(
                f"unknown detector {self.name!r}, expected one of {DETECTOR_NAMES}")

    def display_label(self) -> str:
        if self.label:
            return self.label
        if self.name != "coldfusion":
            return self.name
        suffix = "" if self.adaptation.kind == "median" else f"[{self.adaptation.kind}]"
        return f"coldfusion{suffix}"

    @classmethod
    def coldfusion(cls, tau: TauPolicy | None = None,
                   adaptation: AdaptationMethod | None = None,
                   label: str | None = None) -> "DetectorSpec":
        """Canonical adapted detector: 90th-percentile filter, median pass."""
        return cls(name="coldfusion",
                   tau=tau if tau is not None else TauPolicy.percentile(90.0),
                   adaptation=adaptation if adaptation is not None else AdaptationMethod(),
                   label=label)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "label": self.display_label(),
            "tau": {"mode": self.tau.mode, "percent": self.tau.percent},
            "adaptation": {
                "kind": self.adaptation.kind,
                "max_iters": self.adaptation.max_iters,
                "kmeans_seed": self.adaptation.kmeans_seed,
                "recompute_tau_each_iter": self.adaptation.recompute_tau_each_iter,
            },
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "DetectorSpec":
        if not isinstance(raw, dict) or "name" not in raw:
            raise ConfigError(f"detector entry must be an object with a name: {raw!r}")
        name = raw["name"]
        tau_raw = raw.get("tau")
        if tau_raw is None:
            tau = TauPolicy.percentile(90.0) if name == "coldfusion" else TauPolicy.none()
        else:
            try:
                tau = TauPolicy(mode=tau_raw.get("mode", "percentile"),
                                percent=float(tau_raw.get("percent", 90.0)))
            except (ValueError, AttributeError) as exc:
                raise ConfigError(f"bad tau policy {tau_raw!r}: {exc}") from None
        ad_raw = raw.get("adaptation") or {}
        try:
            adaptation = AdaptationMethod(
                kind=ad_raw.get("kind", "median"),
                max_iters=int(ad_raw.get("max_iters", 10)),
                kmeans_seed=int(ad_raw.get("kmeans_seed", 0)),
                recompute_tau_each_iter=bool(ad_raw.get("recompute_tau_each_iter", True)),
            )
        except ValueError as exc:
            raise ConfigError(f"bad adaptation method {ad_raw!r}: {exc}") from None
        try:
            return cls(name=name, tau=tau, adaptation=adaptation, label=raw.get("label"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: Path
    detectors: tuple[DetectorSpec, ...]
    stream: StreamSpec
    metric: str = vectors.L2
    eval_fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    eval_stride: int = 1
    output_dir: Path | None = None

    def __post_init__(self) -> None:
        if not self.detectors:
            raise ConfigError("config needs at least one detector")
        if self.metric not in vectors.METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.eval_stride < 1:
            raise ConfigError("eval_stride must be >= 1")
        for f in self.eval_fractions:
            if not 0.0 < f <= 1.0:
                raise ConfigError(f"eval fraction {f} outside (0, 1]")

    @classmethod
    def from_dict(cls, raw: dict[str, Any], base_dir: Path | None = None) -> "ExperimentConfig":
        if "dataset" not in raw:
            raise ConfigError("config missing 'dataset'")
        base = base_dir or Path(".")
        dataset_path = Path(raw["dataset"])
        if not dataset_path.is_absolute():
            dataset_path = base / dataset_path
        stream_raw = raw.get("stream") or {}
        if "seed" not in stream_raw:
            raise ConfigError("config stream missing 'seed'")
        stream = StreamSpec(
            seed=int(stream_raw["seed"]),
            contamination_r=float(stream_raw.get("contamination_r", 0.0)),
            length=None if stream_raw.get("length") is None else int(stream_raw["length"]),
            allow_test_oos_contamination=bool(
                stream_raw.get("allow_test_oos_contamination", False)),
        )
        detectors = tuple(DetectorSpec.from_dict(d) for d in raw.get("detectors", []))
        output_dir = raw.get("output_dir")
        if output_dir is not None:
            output_dir = Path(output_dir)
            if not output_dir.is_absolute():
                output_dir = base / output_dir
        return cls(
            dataset_path=dataset_path,
            detectors=detectors,
            stream=stream,
            metric=raw.get("metric", vectors.L2),
            eval_fractions=tuple(float(f) for f in raw.get("eval_fractions", DEFAULT_FRACTIONS)),
            eval_stride=int(raw.get("eval_stride", 1)),
            output_dir=output_dir,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from None
        return cls.from_dict(raw, base_dir=path.parent)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        stream = StreamSpec(seed=seed,
                            contamination_r=self.stream.contamination_r,
                            length=self.stream.length,
                            allow_test_oos_contamination=self.stream.allow_test_oos_contamination)
        return ExperimentConfig(
            dataset_path=self.dataset_path, detectors=self.detectors, stream=stream,
            metric=self.metric, eval_fractions=self.eval_fractions,
            eval_stride=self.eval_stride, output_dir=self.output_dir)


@dataclass(frozen=True)
class DetectorResult:
    label: str
    name: str
    settings: dict[str, Any]
    curve: AucCurve
    auc2: Auc2Summary
    seconds: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "name": self.name,
            "settings": self.settings,
            "curve": {"ts": list(self.curve.ts), "values": list(self.curve.values),
                      "horizon": self.curve.horizon},
            "auc2": {"fractions": list(self.auc2.fractions),
                     "scores": list(self.auc2.scores)},
            "seconds": self.seconds,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "DetectorResult":
        return cls(
            label=raw["label"], name=raw["name"], settings=raw["settings"],
            curve=AucCurve(ts=tuple(raw["curve"]["ts"]),
                           values=tuple(raw["curve"]["values"]),
                           horizon=raw["curve"]["horizon"]),
            auc2=Auc2Summary(fractions=tuple(raw["auc2"]["fractions"]),
                             scores=tuple(raw["auc2"]["scores"])),
            seconds=raw["seconds"],
        )


@dataclass(frozen=True)
class ResultBundle:
    dataset: str
    encoder: str
    domain: str
    dim: int
    metric: str
    seed: int
    contamination_r: float
    achieved_contamination: float
    stream_length: int
    eval_stride: int
    eval_fractions: tuple[float, ...]
    zs_baseline: float
    detectors: tuple[DetectorResult, ...]
    timings: dict[str, float]
    version: str = _VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "encoder": self.encoder,
            "domain": self.domain,
            "dim": self.dim,
            "metric": self.metric,
            "seed": self.seed,
            "contamination_r": self.contamination_r,
            "achieved_contamination": self.achieved_contamination,
            "stream_length": self.stream_length,
            "eval_stride": self.eval_stride,
            "eval_fractions": list(self.eval_fractions),
            "zs_baseline": self.zs_baseline,
            "detectors": [d.to_dict() for d in self.detectors],
            "timings": self.timings,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ResultBundle":
        return cls(
            dataset=raw["dataset"], encoder=raw["encoder"], domain=raw["domain"],
            dim=raw["dim"], metric=raw["metric"], seed=raw["seed"],
            contamination_r=raw["contamination_r"],
            achieved_contamination=raw["achieved_contamination"],
            stream_length=raw["stream_length"], eval_stride=raw["eval_stride"],
            eval_fractions=tuple(raw["eval_fractions"]),
            zs_baseline=raw["zs_baseline"],
            detectors=tuple(DetectorResult.from_dict(d) for d in raw["detectors"]),
            timings=raw["timings"], version=raw["version"],
        )


def eval_steps(stream_length: int, stride: int) -> list[int]:
    """Evaluated t values: 1, 1+stride, ...; the final step is always included."""
    ts = list(range(1, stream_length + 1, stride))
    if ts[-1] != stream_length:
        ts.append(stream_length)
    return ts


def run_experiment(config: ExperimentConfig) -> ResultBundle:
    """Execute one experiment: load, build the stream, evaluate each detector."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    dataset = load_dataset(config.dataset_path)
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stream = build_stream(dataset.items, config.stream)
    timings["stream"] = time.perf_counter() - t0
    horizon = len(stream)
    if horizon < 1:
        raise DataError("stream is empty; nothing to evaluate")

    test_items = dataset.split("test")
    if not test_items:
        raise DataError("dataset has no test split")
    x_test = np.stack([it.embedding for it in test_items])
    y_test = np.array([it.is_oos for it in test_items], dtype=bool)
    if not y_test.any() or y_test.all():
        raise DataError("test split needs both in-scope and out-of-scope items")

    desc = descriptor_matrix(dataset.descriptors)
    obs = stream.embeddings()
    ts = eval_steps(horizon, config.eval_stride)

    t0 = time.perf_counter()
    zs_values = vectors.min_distances(x_test, desc, config.metric)
    zs_baseline = auroc_scores(zs_values, y_test)
    timings["zs_baseline"] = time.perf_counter() - t0

    results = []
    for spec in config.detectors:
        t0 = time.perf_counter()
        values = _detector_curve(spec, dataset, desc, obs, x_test, y_test,
                                 ts, config.metric, zs_scores=zs_values,
                                 zs_auc=zs_baseline)
        seconds = time.perf_counter() - t0
        curve = AucCurve(ts=tuple(ts), values=tuple(values), horizon=horizon)
        results.append(DetectorResult(
            label=spec.display_label(), name=spec.name, settings=spec.to_dict(),
            curve=curve, auc2=summarize(curve, config.eval_fractions),
            seconds=seconds))
        timings[f"detector:{spec.display_label()}"] = seconds

    return ResultBundle(
        dataset=str(config.dataset_path),
        encoder=dataset.header.encoder,
        domain=dataset.header.domain,
        dim=dataset.header.dim,
        metric=config.metric,
        seed=config.stream.seed,
        contamination_r=config.stream.contamination_r,
        achieved_contamination=stream.anomaly_count() / horizon,
        stream_length=horizon,
        eval_stride=config.eval_stride,
        eval_fractions=config.eval_fractions,
        zs_baseline=zs_baseline,
        detectors=tuple(results),
        timings=timings,
    )


def _detector_curve(spec: DetectorSpec, dataset: Dataset, desc: np.ndarray,
                    obs: np.ndarray, x_test: np.ndarray, y_test: np.ndarray,
                    ts: list[int], metric: str, zs_scores: np.ndarray,
                    zs_auc: float) -> list[float]:
    if spec.name == "zs":
        # constant by construction: scored once, reused at every step
        return [zs_auc] * len(ts)
    if spec.name == "dn2":
        return _dn2_curve(obs, x_test, y_test, ts, metric)
    return _coldfusion_curve(spec, dataset, desc, obs, x_test, y_test, ts, metric)


def _dn2_curve(obs, x_test, y_test, ts, metric) -> list[float]:
    eval_at = set(ts)
    running_min = np.full(x_test.shape[0], np.inf)
    values = []
    for t in range(1, obs.shape[0] + 1):
        step_dist = vectors.pairwise_distances(x_test, obs[t - 1:t], metric)[:, 0]
        running_min = np.minimum(running_min, step_dist)
        if t in eval_at:
            values.append(auroc_scores(running_min, y_test))
    return values


def _coldfusion_curve(spec, dataset, desc, obs, x_test, y_test, ts, metric) -> list[float]:
    assign_idx, assign_dist = vectors.nearest_indices(obs, desc, metric)
    values = []
    for t in ts:
        model = adapt(dataset.descriptors, obs[:t], tau=spec.tau,
                      method=spec.adaptation, metric=metric,
                      precomputed=(assign_idx[:t], assign_dist[:t]))
        scores = vectors.min_distances(x_test, model.centers, metric)
        values.append(auroc_scores(scores, y_test))
    return values


@dataclass(frozen=True)
class SweepOutcome:
    label: str
    config: ExperimentConfig | None
    bundle: ResultBundle | None
    error: str | None

    @property
    def ok(self) -> bool:
        return self.bundle is not None


def sweep(configs: Sequence[ExperimentConfig], labels: Sequence[str] | None = None,
          workers: int | None = None,
          runner: Callable[[ExperimentConfig], ResultBundle] = run_experiment,
          ) -> list[SweepOutcome]:
    """Run many configs; one failure never aborts the rest."""
    if not configs:
        raise ConfigError("sweep needs at least one config")
    labels = list(labels) if labels is not None else [f"config-{i}" for i in range(len(configs))]
    if len(labels) != len(configs):
        raise ConfigError("labels must match configs")
    workers = workers or min(4, len(configs))

    def one(pair) -> SweepOutcome:
        label, config = pair
        try:
            return SweepOutcome(label=label, config=config, bundle=runner(config), error=None)
        except Exception as exc:  # noqa: BLE001 - isolate per-config failures
            return SweepOutcome(label=label, config=config, bundle=None,
                                error=f"{type(exc).__name__}: {exc}")

    if workers == 1:
        return [one(p) for p in zip(labels, configs)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, zip(labels, configs)))


def aggregate_bundles(bundles: Sequence[ResultBundle]) -> dict[str, Any]:
    """Mean/std of each detector's auc2 scores across seeds."""
    if not bundles:
        raise ConfigError("nothing to aggregate")
    fractions = bundles[0].eval_fractions
    out: dict[str, Any] = {
        "seeds": [b.seed for b in bundles],
        "eval_fractions": list(fractions),
        "detectors": {},
    }
    labels = [d.label for d in bundles[0].detectors]
    for label in labels:
        per_seed = []
        for b in bundles:
            match = [d for d in b.detectors if d.label == label]
            if len(match) != 1 or match[0].auc2.fractions != fractions:
                raise ConfigError(f"bundles disagree on detector {label!r}")
            per_seed.append(match[0].auc2.scores)
        arr = np.asarray(per_seed, dtype=np.float64)
        out["detectors"][label] = {
            "auc2_mean": [float(v) for v in arr.mean(axis=0)],
            "auc2_std": [float(v) for v in arr.std(axis=0)],
            "auc2_per_seed": [[float(v) for v in row] for row in per_seed],
        }
    return out
