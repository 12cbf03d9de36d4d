"""Transition data ingestion, preprocessing and parameter estimation."""

from .data import (
    EstimatedModel,
    TransitionDataset,
    estimate_parameters,
    path_dataset,
    preprocess,
    read_clustering,
    read_transitions,
    visit_counts,
)

__all__ = [
    "EstimatedModel",
    "TransitionDataset",
    "estimate_parameters",
    "path_dataset",
    "preprocess",
    "read_clustering",
    "read_transitions",
    "visit_counts",
]
