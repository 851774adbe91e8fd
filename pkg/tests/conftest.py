import numpy as np
import pytest

from afsearch.data import Dataset, DatasetMeta


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def dataset_from_arrays(X, y, name="inline") -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes = sorted(set(int(c) for c in y))
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[int(c)] for c in y], dtype=np.int64)
    return Dataset(
        X=X,
        y=y_idx,
        label_names=[str(c) for c in classes],
        feature_names=[f"f{j}" for j in range(X.shape[1])],
        label_column="label",
        meta=DatasetMeta(name=name, n_samples=X.shape[0], n_features=X.shape[1], n_classes=len(classes)),
    )
