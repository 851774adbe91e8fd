"""Synthetic dataset builders used by the self tests and the demo scripts."""

import numpy as np

from .data import Dataset, DatasetMeta


def _dataset_from_arrays(X, y, name) -> Dataset:
    classes = sorted(set(int(c) for c in y))
    label_names = [str(c) for c in classes]
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[int(c)] for c in y], dtype=np.int64)
    meta = DatasetMeta(name=name, n_samples=X.shape[0], n_features=X.shape[1], n_classes=len(classes))
    return Dataset(
        X=np.asarray(X, dtype=np.float64),
        y=y_idx,
        label_names=label_names,
        feature_names=[f"f{j}" for j in range(X.shape[1])],
        label_column="label",
        meta=meta,
    )


def make_separable_two_class(n=500, n_features=4, margin=0.2, seed=0) -> Dataset:
    """Linearly separable 2-class points with a guaranteed margin."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=n_features)
    w /= np.linalg.norm(w)
    X = np.empty((n, n_features))
    y = np.empty(n, dtype=np.int64)
    kept = 0
    while kept < n:
        batch = rng.normal(size=(2 * n, n_features))
        proj = batch @ w
        ok = np.abs(proj) >= margin
        take = min(n - kept, int(ok.sum()))
        X[kept:kept + take] = batch[ok][:take]
        y[kept:kept + take] = (proj[ok][:take] > 0).astype(np.int64)
        kept += take
    return _dataset_from_arrays(X, y, f"separable2c_n{n}_seed{seed}")


def make_gaussian_clusters(n_classes=26, n_features=16, n_per_class=30, center_scale=2.5, seed=0) -> Dataset:
    """Well-separated Gaussian clusters, one per class (letter-style surrogate)."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=center_scale, size=(n_classes, n_features))
    X = np.vstack([centers[c] + rng.normal(size=(n_per_class, n_features)) for c in range(n_classes)])
    y = np.repeat(np.arange(n_classes), n_per_class)
    perm = rng.permutation(len(y))
    return _dataset_from_arrays(X[perm], y[perm], f"clusters{n_classes}x{n_per_class}_seed{seed}")


def make_constant_features(n=40, n_features=3, seed=0) -> Dataset:
    """Degenerate all-constant features; training accuracy can never move."""
    rng = np.random.default_rng(seed)
    X = np.ones((n, n_features))
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1  # both classes present
    return _dataset_from_arrays(X, y, f"constant_n{n}")
