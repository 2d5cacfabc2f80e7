"""Parameterless k-NN (PL-kNN), its SMKNN/LMKNN/k-NN baselines and the evaluation tools."""

from ._plknn import (
    ConfigError,
    ContractError,
    FitError,
    IngestError,
    Model,
    ModelFormatError,
    SplitError,
    __version__,
    euclidean_distance,
    fit,
    friedman_ranks,
    load_dataset,
    manhattan_distance,
    nemenyi_cd,
    run_benchmark,
    stratified_splits,
    tune_k,
    wilcoxon,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "FitError",
    "IngestError",
    "Model",
    "ModelFormatError",
    "SplitError",
    "__version__",
    "euclidean_distance",
    "fit",
    "friedman_ranks",
    "load_dataset",
    "manhattan_distance",
    "nemenyi_cd",
    "run_benchmark",
    "stratified_splits",
    "tune_k",
    "wilcoxon",
]
