"""Reusable experiment steps: train a model on the non-held-out folds of a
manifest and score it on the held-out one. The experiment scripts and the
acceptance suite both run through these helpers.
"""

from __future__ import annotations

from .config import RunConfig
from .data import Dataset, FoldAssignment, ingest, make_folds
from .inference import evaluate
from .model import TriModalModel
from .templates import parse_template
from .trainer import train


def train_on_fold(
    manifest_path,
    template_text: str,
    config: RunConfig,
    test_fold: int = 0,
    fold_seed: int = 0,
    test_template_text: str = "The sound belongs to {label}\n",
) -> tuple[TriModalModel, Dataset, FoldAssignment, list[str]]:
    """Ingest, split off `test_fold`, train on the rest; returns everything
    needed to evaluate."""
    dataset, manifest = ingest(manifest_path, parse_template(template_text), config.preprocess)
    folds = make_folds(manifest, k=4, seed=fold_seed)
    train_ds, _ = dataset.split_by_fold(folds, test_fold)
    model, lines = train(train_ds, config, template_text, test_template_text)
    return model, dataset, folds, lines


def held_out_accuracy(model, dataset: Dataset, folds: FoldAssignment, test_fold: int = 0) -> float:
    return evaluate(model, dataset, folds, test_fold).accuracy
