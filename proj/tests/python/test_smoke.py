import json
import os
import random
from pathlib import Path

import pytest

import plknn

DATA = Path(os.environ.get("PLKNN_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def blobs(seed, per_class=20, d=3, classes=3):
    rng = random.Random(seed)
    X, y = [], []
    for c in range(classes):
        for _ in range(per_class):
            X.append([rng.gauss(4.0 * c, 1.0) for _ in range(d)])
            y.append(c)
    return X, y


def test_distances():
    assert plknn.euclidean_distance([0, 0], [3, 4]) == 5.0
    assert plknn.manhattan_distance([0, 0], [3, 4]) == 7.0
    with pytest.raises(plknn.ContractError):
        plknn.manhattan_distance([0], [1, 2])


@pytest.mark.parametrize("method", ["plknn", "smknn", "lmknn", "knn"])
def test_fit_predict_roundtrip(method):
    X, y = blobs(1)
    model = plknn.fit(method, X, y, k=3)
    assert model.method == method
    assert model.n_features == 3 and model.n_classes == 3
    assert model.predict(X) == y
    out = model.predict_one(X[0])
    if not out["fallback"]:
        assert abs(sum(out["scores"]) - 1.0) < 1e-9
    again = plknn.Model.loads(model.dumps())
    assert again.dumps() == model.dumps()
    assert again.predict(X) == model.predict(X)


def test_centroids_and_errors():
    X, y = blobs(2)
    assert len(plknn.fit("plknn", X, y).centroids) == 3
    assert plknn.fit("knn", X, y, k=1).centroids is None
    with pytest.raises(plknn.ConfigError):
        plknn.fit("svm", X, y)
    with pytest.raises(plknn.ContractError):
        plknn.fit("plknn", X, y).predict_one([1.0, 2.0])


def test_tune_k_separable():
    X, y = blobs(3)
    Xv, yv = blobs(4)
    assert plknn.tune_k(X, y, Xv, yv, 50) == 1


def test_statistics():
    assert plknn.wilcoxon([1, 2, 3, 4, 5], [0] * 5)["p_value"] == 0.0625
    assert plknn.wilcoxon([1, 2, 3, 4, 5, 6], [0] * 6, method="exact")["p_value"] == 0.03125
    assert abs(plknn.nemenyi_cd(4, 11) - 1.414) <= 0.001
    assert plknn.friedman_ranks([[0.9, 0.8], [0.7, 0.7]]) == [1.25, 1.75]


def test_splits_partition():
    y = [0] * 50 + [1] * 50
    folds = plknn.stratified_splits(y, folds=3, seed=2022)
    assert len(folds) == 3
    for train, val, test in folds:
        assert sorted(train + val + test) == list(range(100))
        assert (len(train), len(val), len(test)) == (70, 15, 15)
    assert folds == plknn.stratified_splits(y, folds=3, seed=2022)


@pytest.mark.skipif(not (DATA / "wine.csv").exists(), reason="wine.csv not present")
def test_wine_and_benchmark(tmp_path):
    wine = plknn.load_dataset(str(DATA / "wine.csv"))
    assert len(wine["X"]) == 178 and len(wine["X"][0]) == 13 and len(wine["classes"]) == 3

    config = tmp_path / "bench.json"
    config.write_text(json.dumps({
        "folds": 3, "kmax": 10, "scaling": "minmax",
        "datasets": [{"name": "WN", "path": str(DATA / "wine.csv")}],
    }))
    result = plknn.run_benchmark(config, tmp_path / "out")
    assert result["failures"] == {}
    assert "WN" in result["summary"]
    for name in ("results.csv", "summary.txt", "wilcoxon.csv", "nemenyi.svg", "provenance.txt"):
        assert (tmp_path / "out" / name).exists()
