"""Voice-based screening features and classifiers (native core)."""

from ._core import (
    Error,
    analyse_file,
    config_hash,
    config_keys,
    config_text,
    cross_validate,
    extract,
    higuchi_fd,
    mann_whitney_u,
    permutation_entropy,
    read_dataset,
    run,
    segment,
    shannon_entropy,
    stratified_kfold,
    synth_corpus,
)

__all__ = [
    "Error",
    "analyse_file",
    "config_hash",
    "config_keys",
    "config_text",
    "cross_validate",
    "extract",
    "higuchi_fd",
    "mann_whitney_u",
    "permutation_entropy",
    "read_dataset",
    "run",
    "segment",
    "shannon_entropy",
    "stratified_kfold",
    "synth_corpus",
]
