"""Synthetic embedding datasets for self-contained testing.

In-scope classes are isotropic Gaussian clusters; descriptors are the
cluster means plus noise (so zero-shot scoring is deliberately imperfect
and adaptation has something to recover); out-of-scope items come from
separate, unseen Gaussian clusters (novel topics). Defaults are tuned so
the adapted detector beats both the zero-shot and the nearest-observation
baselines by a comfortable margin on the default stream protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import (Dataset, DatasetHeader, LabeledItem, SPLIT_OOS, SPLIT_TEST,
                   SPLIT_TRAIN, write_dataset)
from .detectors import ClassDescriptor


@dataclass(frozen=True)
class SyntheticSpec:
    classes: int = 10
    dim: int = 32
    seed: int = 7
    oos_classes: int = 5
    train_per_class: int = 60
    test_per_class: int = 30
    oos_pool_size: int = 150
    oos_test_size: int = 150
    cluster_std: float = 0.6
    descriptor_noise: float = 1.0
    oos_spread: float = 1.0

    def __post_init__(self) -> None:
        if self.classes < 1 or self.dim < 1 or self.oos_classes < 1:
            raise ValueError("classes, dim and oos_classes must be positive")


def build_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministic in-memory dataset for the given spec (PCG64-seeded)."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    means = rng.normal(0.0, 1.0, size=(spec.classes, spec.dim))
    desc_vecs = means + spec.descriptor_noise * rng.normal(
        0.0, 1.0, size=(spec.classes, spec.dim))
    descriptors = [
        ClassDescriptor(class_id=k, name=f"topic-{k:02d}", embedding=desc_vecs[k])
        for k in range(spec.classes)
    ]

    items: list[LabeledItem] = []

    def cluster_sample(center: np.ndarray) -> np.ndarray:
        return center + spec.cluster_std * rng.normal(0.0, 1.0, size=spec.dim)

    serial = 0
    for k in range(spec.classes):
        for _ in range(spec.train_per_class):
            items.append(LabeledItem(
                item_id=f"train-{serial:05d}", split=SPLIT_TRAIN, class_id=k,
                embedding=cluster_sample(means[k])))
            serial += 1
    serial = 0
    for k in range(spec.classes):
        for _ in range(spec.test_per_class):
            items.append(LabeledItem(
                item_id=f"test-ins-{serial:05d}", split=SPLIT_TEST, class_id=k,
                embedding=cluster_sample(means[k])))
            serial += 1

    oos_means = spec.oos_spread * rng.normal(0.0, 1.0, size=(spec.oos_classes, spec.dim))
    for i in range(spec.oos_pool_size):
        items.append(LabeledItem(
            item_id=f"oos-pool-{i:05d}", split=SPLIT_OOS, class_id=None,
            embedding=cluster_sample(oos_means[i % spec.oos_classes])))
    for i in range(spec.oos_test_size):
        items.append(LabeledItem(
            item_id=f"test-oos-{i:05d}", split=SPLIT_TEST, class_id=None,
            embedding=cluster_sample(oos_means[i % spec.oos_classes])))

    header = DatasetHeader(format_version=1, dim=spec.dim,
                           encoder="synthetic-gaussian", domain="synthetic")
    return Dataset(header=header, descriptors=descriptors, items=items)


def write_synthetic(spec: SyntheticSpec, path: str | Path) -> Dataset:
    """Build and serialize a synthetic dataset; returns the built dataset."""
    ds = build_synthetic(spec)
    write_dataset(path, ds.header, ds.descriptors, ds.items)
    return ds
