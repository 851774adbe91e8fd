"""Dataset ingestion (CSV/ARFF), the 70/30 split, and train-fitted scaling.

Loading is strict: missing values, malformed rows, and single-class label
columns are rejected with the offending line number. Non-numeric feature
columns are integer-coded by first appearance; label strings map to
0..C-1 in sorted order so the coding is stable across runs.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable input data (CLI exit code 2)."""


@dataclass
class DatasetMeta:
    name: str
    n_samples: int
    n_features: int
    n_classes: int


@dataclass
class Dataset:
    X: np.ndarray  # (n, d) float64
    y: np.ndarray  # (n,) int labels in 0..C-1
    label_names: list[str]  # sorted original label strings, index = class id
    feature_names: list[str]
    label_column: str
    meta: DatasetMeta


@dataclass
class Split:
    train: np.ndarray
    test: np.ndarray


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray  # population std, zero-variance columns forced to 1


def _parse_numeric(cell: str):
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def _build_dataset(rows, feature_names, label_column, name) -> Dataset:
    n = len(rows)
    d = len(feature_names)
    if d < 1:
        raise DataError("no feature columns")
    columns = list(zip(*[r[0] for r in rows]))
    X = np.empty((n, d), dtype=np.float64)
    for j, col in enumerate(columns):
        numeric = [_parse_numeric(c) for c in col]
        if all(v is not None for v in numeric):
            X[:, j] = numeric
        else:
            # categorical column: integer codes by first appearance
            codes: dict[str, int] = {}
            for i, c in enumerate(col):
                if c not in codes:
                    codes[c] = len(codes)
                X[i, j] = codes[c]
    labels = [r[1] for r in rows]
    label_names = sorted(set(labels))
    if len(label_names) < 2:
        raise DataError(f"label column {label_column!r} has a single class {label_names[0]!r}")
    label_index = {s: i for i, s in enumerate(label_names)}
    y = np.array([label_index[s] for s in labels], dtype=np.int64)
    meta = DatasetMeta(name=name, n_samples=n, n_features=d, n_classes=len(label_names))
    return Dataset(X=X, y=y, label_names=label_names, feature_names=list(feature_names),
                   label_column=label_column, meta=meta)


def _load_csv(path, label_col=None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_col is None:
            label_idx = len(header) - 1
        else:
            if label_col not in header:
                raise DataError(f"{path}: label column {label_col!r} not in header {header}")
            label_idx = header.index(label_col)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            row = [c.strip() for c in row]
            for j, cell in enumerate(row):
                if cell == "" or cell.lower() in ("nan", "inf", "-inf", "?"):
                    raise DataError(f"{path}:{lineno}: missing value in column {header[j]!r}")
            features = [c for i, c in enumerate(row) if i != label_idx]
            rows.append((features, row[label_idx]))
    if not rows:
        raise DataError(f"{path}: no data rows")
    name = str(path).rsplit("/", 1)[-1]
    return _build_dataset(rows, feature_names, header[label_idx], name)


def _load_arff(path, label_col=None) -> Dataset:
    """Minimal ARFF subset: numeric/real/integer and nominal attributes."""
    attributes: list[tuple[str, list[str] | None]] = []
    data_rows: list[tuple[list[str], int]] = []
    in_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if not in_data and line.lower().startswith("@relation"):
                continue
            if not in_data and line.lower().startswith("@attribute"):
                body = line[len("@attribute"):].strip()
                if body.startswith("'"):
                    end = body.index("'", 1)
                    attr_name = body[1:end]
                    rest = body[end + 1:].strip()
                else:
                    parts = body.split(None, 1)
                    if len(parts) != 2:
                        raise DataError(f"{path}:{lineno}: malformed @attribute line")
                    attr_name, rest = parts
                rest = rest.strip()
                if rest.startswith("{"):
                    if not rest.endswith("}"):
                        raise DataError(f"{path}:{lineno}: unterminated nominal specification")
                    values = [v.strip().strip("'") for v in rest[1:-1].split(",")]
                    attributes.append((attr_name, values))
                elif rest.lower() in ("numeric", "real", "integer"):
                    attributes.append((attr_name, None))
                else:
                    raise DataError(f"{path}:{lineno}: unsupported attribute type {rest!r}")
                continue
            if line.lower().startswith("@data"):
                in_data = True
                continue
            if not in_data:
                raise DataError(f"{path}:{lineno}: unexpected line before @data")
            if line.startswith("{"):
                raise DataError(f"{path}:{lineno}: sparse ARFF rows are not supported")
            data_rows.append(([c.strip().strip("'") for c in line.split(",")], lineno))
    if not attributes:
        raise DataError(f"{path}: no @attribute declarations")
    if not data_rows:
        raise DataError(f"{path}: no data rows")
    names = [a[0] for a in attributes]
    if label_col is None:
        label_idx = len(attributes) - 1
    else:
        if label_col not in names:
            raise DataError(f"{path}: label column {label_col!r} not among attributes {names}")
        label_idx = names.index(label_col)
    rows = []
    for cells, lineno in data_rows:
        if len(cells) != len(attributes):
            raise DataError(f"{path}:{lineno}: expected {len(attributes)} fields, got {len(cells)}")
        for j, cell in enumerate(cells):
            if cell == "" or cell == "?":
                raise DataError(f"{path}:{lineno}: missing value in attribute {names[j]!r}")
            nominal = attributes[j][1]
            if nominal is not None and cell not in nominal:
                raise DataError(f"{path}:{lineno}: value {cell!r} not declared for attribute {names[j]!r}")
            if nominal is None and _parse_numeric(cell) is None:
                raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} in numeric attribute {names[j]!r}")
        features = [c for i, c in enumerate(cells) if i != label_idx]
        rows.append((features, cells[label_idx]))
    feature_names = [n for i, n in enumerate(names) if i != label_idx]
    name = str(path).rsplit("/", 1)[-1]
    return _build_dataset(rows, feature_names, names[label_idx], name)


def load_dataset(path, fmt=None, label_col=None) -> Dataset:
    """Load a CSV (header row required) or ARFF file into a Dataset.

    fmt is "csv" or "arff"; when None it is taken from the file extension.
    The label column is the last column unless label_col names another.
    """
    if fmt is None:
        lower = str(path).lower()
        fmt = "arff" if lower.endswith(".arff") else "csv"
    if fmt == "csv":
        return _load_csv(path, label_col)
    if fmt == "arff":
        return _load_arff(path, label_col)
    raise DataError(f"unknown format {fmt!r} (expected csv or arff)")


def save_dataset_csv(ds: Dataset, path) -> None:
    """Canonical CSV writer; floats via repr so a reload is bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ds.feature_names + [ds.label_column])
        for i in range(ds.meta.n_samples):
            writer.writerow([repr(float(v)) for v in ds.X[i]] + [ds.label_names[ds.y[i]]])


def train_test_split(ds: Dataset, rng) -> Split:
    """Uniform random permutation; first floor(0.7 n) rows train, rest test.

    Unstratified. A class absent from the training side is reported as a
    warning and training proceeds (such classes are never predicted
    correctly).
    """
    n = ds.meta.n_samples
    if n < 4:
        raise DataError(f"dataset too small to split: n={n}")
    perm = rng.permutation(n)
    n_train = int(np.floor(0.7 * n))
    split = Split(train=perm[:n_train], test=perm[n_train:])
    present = np.unique(ds.y[split.train])
    if len(present) < ds.meta.n_classes:
        missing = sorted(set(range(ds.meta.n_classes)) - set(present.tolist()))
        names = ", ".join(ds.label_names[c] for c in missing)
        warnings.warn(f"classes absent from the training split: {names}", stacklevel=2)
    return split


def scaler_fit(ds: Dataset, train_indices) -> Scaler:
    """Per-feature mean and population std over the training rows only."""
    rows = ds.X[np.asarray(train_indices)]
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)  # ddof=0, population
    std = np.where(std == 0.0, 1.0, std)
    return Scaler(mean=mean, std=std)


def scaler_transform(scaler: Scaler, X) -> np.ndarray:
    return (np.asarray(X, dtype=np.float64) - scaler.mean) / scaler.std
