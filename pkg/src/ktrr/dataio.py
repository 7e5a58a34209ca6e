"""Dataset loading, normalization, and subsampling.

Two on-disk formats: CSV with one sample per row and an integer label column,
and the big-endian IDX container used for MNIST-style image files. Loaded
matrices hold one sample per column with values normalized into [0, 1];
labels are reindexed to 0..c-1.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Dataset",
    "first_k_classes",
    "load_csv",
    "load_idx",
    "save_csv",
    "subsample_per_class",
]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    """m x n sample matrix (columns are samples) plus ground-truth labels."""

    X: np.ndarray
    truth: np.ndarray
    names: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.X.ndim != 2:
            raise ValueError(f"X must be an m x n matrix, got shape {self.X.shape}")
        if self.truth.shape != (self.X.shape[1],):
            raise ValueError(
                f"truth length {self.truth.shape} does not match n={self.X.shape[1]}"
            )
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains non-finite values")

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.truth).size)


def _normalize_unit(X: np.ndarray):
    """Rescale to [0, 1] by global min/max; identity if already inside."""
    lo = float(X.min())
    hi = float(X.max())
    if 0.0 <= lo and hi <= 1.0:
        return X, (lo, hi)
    if hi > lo:
        return (X - lo) / (hi - lo), (lo, hi)
    return np.zeros_like(X), (lo, hi)  # constant matrix out of range


def _dense_labels(raw: np.ndarray) -> np.ndarray:
    _, dense = np.unique(raw, return_inverse=True)
    return dense.astype(np.int64)


def load_csv(path, label_column: int = -1) -> Dataset:
    """Rows are samples; one column (default: last) holds the integer label.

    A non-numeric first row is treated as a header and skipped. Values are
    globally min-max scaled into [0, 1] unless they already fit. Labels are
    reindexed to a dense 0..c-1 range; the original values are kept in meta.
    """
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if lineno == 1:
                try:
                    [float(v) for v in row]
                except ValueError:
                    header = [v.strip() for v in row]
                    continue
            parsed = []
            for colno, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {lineno}, column {colno}: "
                        f"cannot parse {cell.strip()!r} as a number"
                    ) from None
            rows.append((lineno, parsed))

    if not rows:
        raise ValueError(f"{path}: no samples")
    width = len(rows[0][1])
    if width < 2:
        raise ValueError(f"{path}: rows need at least one feature and one label")
    for lineno, parsed in rows:
        if len(parsed) != width:
            raise ValueError(
                f"{path}: row {lineno} has {len(parsed)} columns, expected {width}"
            )

    table = np.array([parsed for _, parsed in rows], dtype=float)
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise ValueError(f"{path}: label column {label_column} out of range")
    raw_labels = table[:, col]
    if not np.array_equal(raw_labels, np.rint(raw_labels)):
        raise ValueError(f"{path}: label column {label_column} contains non-integers")
    features = np.delete(table, col, axis=1)

    X, original_range = _normalize_unit(features.T)
    truth = _dense_labels(raw_labels.astype(np.int64))
    meta = {
        "source": str(path),
        "format": "csv",
        "original_range": original_range,
        "original_labels": np.unique(raw_labels.astype(np.int64)).tolist(),
    }
    if header is not None:
        meta["header"] = header
    return Dataset(X=X, truth=truth, meta=meta)


def save_csv(ds: Dataset, path) -> None:
    """Mirror of load_csv: one row per sample, label appended as last column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for j in range(ds.n):
            writer.writerow([f"{v:.17g}" for v in ds.X[:, j]] + [int(ds.truth[j])])


def _read_idx_header(fh, path, expected_magic, expected_dims):
    head = fh.read(4 * (1 + expected_dims))
    if len(head) != 4 * (1 + expected_dims):
        raise ValueError(f"{path}: truncated IDX header")
    magic, *dims = struct.unpack(f">{1 + expected_dims}I", head)
    if magic != expected_magic:
        raise ValueError(
            f"{path}: bad IDX magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    return dims


def load_idx(images_path, labels_path) -> Dataset:
    """MNIST-container pair: uint8 images flattened to columns, scaled by 1/255."""
    with open(images_path, "rb") as fh:
        count, rows, cols = _read_idx_header(fh, images_path, IDX_IMAGES_MAGIC, 3)
        payload = fh.read(count * rows * cols)
        if len(payload) != count * rows * cols:
            raise ValueError(f"{images_path}: truncated IDX payload")
        pixels = np.frombuffer(payload, dtype=np.uint8)
    with open(labels_path, "rb") as fh:
        (label_count,) = _read_idx_header(fh, labels_path, IDX_LABELS_MAGIC, 1)
        raw = fh.read(label_count)
        if len(raw) != label_count:
            raise ValueError(f"{labels_path}: truncated IDX payload")
        labels = np.frombuffer(raw, dtype=np.uint8)
    if count != label_count:
        raise ValueError(
            f"image count {count} does not match label count {label_count}"
        )

    X = pixels.reshape(count, rows * cols).T.astype(float) / 255.0
    meta = {
        "source": str(images_path),
        "labels_source": str(labels_path),
        "format": "idx",
        "image_shape": (rows, cols),
        "original_range": (0.0, 255.0),
        "original_labels": np.unique(labels).tolist(),
    }
    return Dataset(X=X, truth=_dense_labels(labels), meta=meta)


def subsample_per_class(ds: Dataset, per_class: int, seed: int = 0) -> Dataset:
    """Pick per_class samples of every class uniformly without replacement.

    Selection order follows the original sample order, both within classes
    and globally. Classes with fewer than per_class samples are taken whole
    and listed under meta['short_classes'].
    """
    if per_class < 1:
        raise ValueError(f"per_class must be positive, got {per_class}")
    rng = np.random.default_rng(seed)
    keep = []
    short = []
    for c in np.unique(ds.truth):
        idx = np.flatnonzero(ds.truth == c)
        if idx.size <= per_class:
            if idx.size < per_class:
                short.append(int(c))
            keep.append(idx)
        else:
            keep.append(np.sort(rng.choice(idx, size=per_class, replace=False)))
    sel = np.sort(np.concatenate(keep))
    meta = dict(ds.meta, subsampled_per_class=per_class)
    if short:
        meta["short_classes"] = short
    return replace(ds, X=ds.X[:, sel], truth=ds.truth[sel],
                   names=None if ds.names is None else tuple(ds.names[i] for i in sel),
                   meta=meta)


def first_k_classes(ds: Dataset, k: int) -> Dataset:
    """Keep only the first k classes, ordered by first appearance in truth.

    Label values are left as they are (metrics never care about the names),
    so k = num_classes returns the dataset unchanged apart from meta.
    """
    classes, first_pos = np.unique(ds.truth, return_index=True)
    if not 1 <= k <= classes.size:
        raise ValueError(f"k must be in [1, {classes.size}], got {k}")
    by_appearance = classes[np.argsort(first_pos, kind="stable")]
    kept = by_appearance[:k]
    mask = np.isin(ds.truth, kept)
    meta = dict(ds.meta, kept_classes=[int(c) for c in kept])
    return replace(ds, X=ds.X[:, mask], truth=ds.truth[mask],
                   names=None if ds.names is None else
                   tuple(nm for nm, m in zip(ds.names, mask) if m),
                   meta=meta)
