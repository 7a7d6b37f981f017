"""Embedding-file ingestion and deterministic contaminated-stream construction.

File format (UTF-8, one JSON object per line):

    line 1   {"format_version": 1, "dim": <int>, "encoder": <str>, "domain": <str>}
    then     {"kind": "descriptor", "class_id": <int>, "name": <str>, "vector": [...]}
    and      {"kind": "item", "item_id": <str>, "split": "train_pool"|"oos_pool"|"test",
              "label": <int or "oos">, "vector": [...], "text": <optional str>}

Vectors are decimal floats with round-trip precision and load as float64.
Labels are consumed only here and by the evaluation metrics; detectors
never see them.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .detectors import ClassDescriptor
from .errors import DataError
from .rng import SplitMix64

SPLIT_TRAIN = "train_pool"
SPLIT_OOS = "oos_pool"
SPLIT_TEST = "test"
SPLITS = (SPLIT_TRAIN, SPLIT_OOS, SPLIT_TEST)
OOS_LABEL = "oos"


@dataclass(frozen=True)
class DatasetHeader:
    format_version: int
    dim: int
    encoder: str
    domain: str


@dataclass(frozen=True, eq=False)
class LabeledItem:
    """An embedded query with ground truth used only for streams and metrics."""

    item_id: str
    split: str
    class_id: int | None  # None marks an out-of-scope item
    embedding: np.ndarray
    text: str | None = None

    @property
    def is_oos(self) -> bool:
        return self.class_id is None


@dataclass(frozen=True, eq=False)
class Dataset:
    header: DatasetHeader
    descriptors: list[ClassDescriptor]
    items: list[LabeledItem]

    def split(self, name: str) -> list[LabeledItem]:
        return [it for it in self.items if it.split == name]


@dataclass(frozen=True)
class StreamSpec:
    """Seed + contamination ratio (percent) + optional explicit length.

    length=None derives the longest stream that consumes the in-scope
    train pool at the requested ratio. allow_test_oos_contamination lets
    datasets without a dedicated oos_pool draw contaminants from test OOS
    items (warned, because it leaks stream items into the evaluation set).
    """

    seed: int
    contamination_r: float = 0.0
    length: int | None = None
    allow_test_oos_contamination: bool = False


@dataclass(frozen=True, eq=False)
class ObservationStream:
    items: list[LabeledItem]
    spec: StreamSpec

    def __len__(self) -> int:
        return len(self.items)

    def embeddings(self) -> np.ndarray:
        if not self.items:
            return np.empty((0, 0), dtype=np.float64)
        return np.stack([it.embedding for it in self.items])

    def anomaly_count(self) -> int:
        return sum(1 for it in self.items if it.is_oos)


def _parse_vector(raw, dim: int, lineno: int, owner: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise DataError(f"line {lineno}: {owner}: vector must be a nonempty array")
    vec = np.asarray(raw, dtype=np.float64)
    if vec.ndim != 1 or vec.size != dim:
        raise DataError(
            f"line {lineno}: {owner}: vector length {vec.size} != header dim {dim}")
    if not np.isfinite(vec).all():
        raise DataError(f"line {lineno}: non-finite value in {owner}")
    return vec


def load_dataset(path: str | Path) -> Dataset:
    """Parse and validate an embedding file.

    Enforces: one header with format_version 1, uniform dimension, finite
    vectors, contiguous class ids 0..K-1, at least one descriptor, splits
    from the known set, in-scope labels that reference real classes,
    train_pool strictly in-scope and oos_pool strictly out-of-scope.
    """
    path = Path(path)
    descriptors: list[ClassDescriptor] = []
    items: list[LabeledItem] = []
    header: DatasetHeader | None = None
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: malformed JSON: {exc.msg}") from None
            if header is None:
                header = _parse_header(rec, lineno)
                continue
            kind = rec.get("kind")
            if kind == "descriptor":
                descriptors.append(_parse_descriptor(rec, header.dim, lineno))
            elif kind == "item":
                items.append(_parse_item(rec, header.dim, lineno))
            else:
                raise DataError(f"line {lineno}: unknown record kind {kind!r}")
    if header is None:
        raise DataError(f"{path}: empty file, expected a header line")
    if not descriptors:
        raise DataError(f"{path}: no class descriptors")
    ids = sorted(d.class_id for d in descriptors)
    if ids != list(range(len(descriptors))):
        raise DataError(f"{path}: class ids must be contiguous 0..K-1, got {ids}")
    k = len(descriptors)
    for it in items:
        if it.class_id is not None and not 0 <= it.class_id < k:
            raise DataError(
                f"item {it.item_id}: label {it.class_id} references no descriptor (K={k})")
    descriptors.sort(key=lambda d: d.class_id)
    return Dataset(header=header, descriptors=descriptors, items=items)


def _parse_header(rec, lineno: int) -> DatasetHeader:
    for key in ("format_version", "dim", "encoder", "domain"):
        if key not in rec:
            raise DataError(f"line {lineno}: header missing {key!r}")
    if rec["format_version"] != 1:
        raise DataError(f"line {lineno}: unsupported format_version {rec['format_version']!r}")
    dim = rec["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise DataError(f"line {lineno}: dim must be a positive integer, got {dim!r}")
    return DatasetHeader(format_version=1, dim=dim,
                         encoder=str(rec["encoder"]), domain=str(rec["domain"]))


def _parse_descriptor(rec, dim: int, lineno: int) -> ClassDescriptor:
    class_id = rec.get("class_id")
    if not isinstance(class_id, int) or class_id < 0:
        raise DataError(f"line {lineno}: descriptor class_id must be a nonnegative int")
    name = rec.get("name")
    if not isinstance(name, str):
        raise DataError(f"line {lineno}: descriptor name must be a string")
    vec = _parse_vector(rec.get("vector"), dim, lineno, f"descriptor {name!r}")
    return ClassDescriptor(class_id=class_id, name=name, embedding=vec)


def _parse_item(rec, dim: int, lineno: int) -> LabeledItem:
    item_id = rec.get("item_id")
    if not isinstance(item_id, str) or not item_id:
        raise DataError(f"line {lineno}: item_id must be a nonempty string")
    split = rec.get("split")
    if split not in SPLITS:
        raise DataError(f"line {lineno}: unknown split tag {split!r}, expected one of {SPLITS}")
    label = rec.get("label")
    if label == OOS_LABEL:
        class_id = None
    elif isinstance(label, int):
        class_id = label
    else:
        raise DataError(f"line {lineno}: label must be an int or {OOS_LABEL!r}, got {label!r}")
    if split == SPLIT_TRAIN and class_id is None:
        raise DataError(f"line {lineno}: train_pool item {item_id} must be in-scope")
    if split == SPLIT_OOS and class_id is not None:
        raise DataError(f"line {lineno}: oos_pool item {item_id} must be labeled {OOS_LABEL!r}")
    vec = _parse_vector(rec.get("vector"), dim, lineno, f"item {item_id}")
    text = rec.get("text")
    if text is not None and not isinstance(text, str):
        raise DataError(f"line {lineno}: text must be a string when present")
    return LabeledItem(item_id=item_id, split=split, class_id=class_id,
                       embedding=vec, text=text)


def write_dataset(path: str | Path, header: DatasetHeader,
                  descriptors: list[ClassDescriptor],
                  items: list[LabeledItem]) -> None:
    """Serialize a dataset in the line-JSON format (deterministic bytes)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "format_version": header.format_version,
            "dim": header.dim,
            "encoder": header.encoder,
            "domain": header.domain,
        }) + "\n")
        for d in sorted(descriptors, key=lambda d: d.class_id):
            fh.write(json.dumps({
                "kind": "descriptor",
                "class_id": d.class_id,
                "name": d.name,
                "vector": [float(v) for v in d.embedding],
            }) + "\n")
        for it in items:
            rec = {
                "kind": "item",
                "item_id": it.item_id,
                "split": it.split,
                "label": OOS_LABEL if it.class_id is None else it.class_id,
                "vector": [float(v) for v in it.embedding],
            }
            if it.text is not None:
                rec["text"] = it.text
            fh.write(json.dumps(rec) + "\n")


def anomaly_quota(contamination_r: float, length: int) -> int:
    """round(r/100 * T) on the exact rational value (half-to-even)."""
    if contamination_r < 0:
        raise DataError(f"contamination ratio must be >= 0, got {contamination_r}")
    return round(Fraction(contamination_r) * length / 100)


def default_stream_length(n_train: int, n_oos: int, contamination_r: float) -> int:
    """Longest T that consumes the in-scope pool at ratio r, capped by pools."""
    if not 0 <= contamination_r < 100:
        raise DataError(f"contamination ratio must be in [0, 100), got {contamination_r}")
    t = int(Fraction(n_train) / (1 - Fraction(contamination_r) / 100))
    while t > 0:
        quota = anomaly_quota(contamination_r, t)
        if t - quota <= n_train and quota <= n_oos:
            return t
        t -= 1
    raise DataError("pools are too small to build any stream")


def build_stream(items: list[LabeledItem], spec: StreamSpec) -> ObservationStream:
    """Deterministically sample and shuffle a contaminated observation stream.

    Draw order from SplitMix64(seed): the out-of-scope sample (without
    replacement), then the in-scope sample (without replacement), then a
    Fisher-Yates shuffle of the concatenated list. The same spec over the
    same dataset reconstructs the identical sequence on any platform.
    """
    train = [it for it in items if it.split == SPLIT_TRAIN]
    oos = [it for it in items if it.split == SPLIT_OOS]
    borrowed_from_test = False
    if not oos and spec.contamination_r > 0 and spec.allow_test_oos_contamination:
        oos = [it for it in items if it.split == SPLIT_TEST and it.is_oos]
        borrowed_from_test = True
        warnings.warn(
            "no oos_pool split: drawing stream contaminants from test OOS items; "
            "those observations leak into the evaluation set", stacklevel=2)

    if spec.length is not None:
        if spec.length < 1:
            raise DataError(f"stream length must be positive, got {spec.length}")
        length = spec.length
    else:
        length = default_stream_length(len(train), len(oos), spec.contamination_r)

    quota = anomaly_quota(spec.contamination_r, length)
    n_ins = length - quota
    if n_ins > len(train):
        raise DataError(
            f"stream needs {n_ins} in-scope items but train_pool has {len(train)}")
    if quota > len(oos):
        hint = "" if oos or not spec.contamination_r else \
            " (oos_pool is empty; set allow_test_oos_contamination to draw from test OOS)"
        raise DataError(
            f"stream needs {quota} out-of-scope items but pool has {len(oos)}{hint}")

    rng = SplitMix64(spec.seed)
    picked = [oos[i] for i in rng.sample_indices(len(oos), quota)]
    picked += [train[i] for i in rng.sample_indices(len(train), n_ins)]
    rng.shuffle(picked)

    if not borrowed_from_test:
        leaked = [it.item_id for it in picked if it.split == SPLIT_TEST]
        if leaked:
            raise DataError(f"test items leaked into the stream: {leaked[:3]}")
    return ObservationStream(items=picked, spec=spec)
