"""Downstream adaptation: template-based tuning of the full tri-modal model,
encoder-only tuning with a classifier head, and the multi-label / multi-task
baselines that fuse auxiliary annotations into discrete targets.
"""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig
from .data import Dataset
from .dsp import TARGET_RATE, AudioSegment
from .encoders import AudioEncoder
from .errors import ConfigError, ContractError
from .layers import Linear
from .model import TriModalModel
from .optim import AdamW
from .templates import AUX_FIELDS
from .tensor import (
    Tensor,
    absval,
    add,
    backward,
    concat,
    log_softmax_rows,
    mean,
    mul,
    neg,
    no_grad,
    relu,
    reshape,
    softplus,
    sub,
    tsum,
)
from .trainer import continue_training


def softmax_ce(logits: Tensor, targets: list[int]) -> Tensor:
    """Mean cross entropy of row logits against integer class targets."""
    n, k = logits.shape
    picked = np.zeros((n, k))
    picked[np.arange(n), targets] = -1.0 / n
    return tsum(mul(log_softmax_rows(logits), Tensor(picked)))


def binary_ce_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean element-wise binary cross entropy in the numerically stable form
    relu(z) - z*y + log(1 + exp(-|z|))."""
    t = Tensor(np.asarray(targets, dtype=np.float64))
    return mean(add(sub(relu(logits), mul(logits, t)), softplus(neg(absval(logits)))))


def _task_stream(task: str) -> int:
    return int.from_bytes(task.encode("utf-8"), "little") % (2**31)


class ClassifierModel:
    """Audio encoder plus one or more linear heads over discrete targets.

    kind "category": one softmax head. kind "multitask": one head per task,
    category mandatory. kind "multilabel": a single wide head over the fused
    dictionary (categories first), trained with per-dimension binary CE and
    read out by argmax restricted to the category dimensions.
    """

    def __init__(self, config: RunConfig, kind: str, task_classes: dict[str, list[str]],
                 train_source_ids: tuple[str, ...] = ()):
        if kind not in ("category", "multitask", "multilabel"):
            raise ConfigError(f"unknown classifier kind {kind!r}")
        if kind == "multilabel":
            if "multilabel" not in task_classes or "n_categories" not in task_classes:
                raise ConfigError("multilabel classifier needs the fused dictionary and n_categories")
        elif "category" not in task_classes:
            raise ConfigError("classifier needs a category task")
        self.config = config
        self.kind = kind
        self.task_classes = {k: list(v) for k, v in task_classes.items()}
        self.train_source_ids = tuple(train_source_ids)
        seed = config.encoder.seed
        self.encoder = AudioEncoder(config.encoder, config.preprocess, np.random.default_rng([seed, 0]))
        self.heads: dict[str, Linear] = {}
        for task in sorted(t for t in self.task_classes if t != "n_categories"):
            width = len(self.task_classes[task])
            rng = np.random.default_rng([seed, 10, _task_stream(task)])
            self.heads[task] = Linear(rng, config.encoder.d, width, f"head.{task}")

    @property
    def n_categories(self) -> int:
        if self.kind == "multilabel":
            return int(self.task_classes["n_categories"][0])
        return len(self.task_classes["category"])

    @property
    def class_labels(self) -> list[str]:
        if self.kind == "multilabel":
            return self.task_classes["multilabel"][: self.n_categories]
        return self.task_classes["category"]

    def parameters(self, freeze_encoder: bool = False) -> dict[str, Tensor]:
        out = {} if freeze_encoder else dict(self.encoder.params())
        for head in self.heads.values():
            out.update(head.params())
        return out

    def head_logits(self, segments: list[AudioSegment], task: str, kernels=None) -> Tensor:
        if kernels is None:
            kernels = self.encoder.build_kernels()
        rows = []
        for seg in segments:
            emb = self.encoder.encode(seg, kernels).vector
            rows.append(reshape(emb, (1, emb.size)))
        stacked = concat(rows, axis=0) if len(rows) > 1 else rows[0]
        return self.heads[task](stacked)

    def predict_labels(self, segments: list[AudioSegment]) -> list[str]:
        task = "multilabel" if self.kind == "multilabel" else "category"
        with no_grad():
            logits = self.head_logits(segments, task).values
        if self.kind == "multilabel":
            logits = logits[:, : self.n_categories]  # never return an auxiliary index
        labels = self.class_labels
        return [labels[int(i)] for i in np.argmax(logits, axis=1)]

    def load_values(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = set(params) - set(arrays)
        extra = set(arrays) - set(params)
        if missing or extra:
            raise ConfigError(f"checkpoint/classifier mismatch: missing={sorted(missing)}, extra={sorted(extra)}")
        for name, tensor in params.items():
            tensor.values = np.asarray(arrays[name], dtype=np.float64).copy()


def _copy_encoder_weights(dst: AudioEncoder, src: AudioEncoder) -> None:
    src_params = src.params()
    for name, tensor in dst.params().items():
        if name not in src_params:
            raise ConfigError(f"pretrained encoder lacks parameter {name}")
        if src_params[name].values.shape != tensor.values.shape:
            raise ConfigError(
                f"pretrained parameter {name} has shape {src_params[name].values.shape}, expected {tensor.values.shape}"
            )
        tensor.values = src_params[name].values.copy()


def train_classifier(model: ClassifierModel, dataset: Dataset, config: RunConfig,
                     freeze_encoder: bool = False) -> list[float]:
    """Cross-entropy training shared by encoder tuning and both baselines.

    Returns per-epoch mean losses. Samples missing an auxiliary annotation
    are excluded from that task's loss term only.
    """
    params = model.parameters(freeze_encoder)
    if not params:
        raise ConfigError("nothing to train")
    frozen_before = None
    if freeze_encoder:
        frozen_before = {k: v.values.copy() for k, v in model.encoder.params().items()}
    optimizer = AdamW(list(params.values()), lr=config.train.lr, weight_decay=config.train.weight_decay)
    rng = np.random.default_rng(config.train.seed)
    n = len(dataset.samples)
    trace: list[float] = []
    for _ in range(config.train.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.train.batch_size):
            idx = order[start : start + config.train.batch_size].tolist()
            batch = [dataset.samples[i] for i in idx]
            kernels = model.encoder.build_kernels()
            loss = _classifier_batch_loss(model, batch, kernels)
            if loss is None:
                continue
            backward(loss)
            optimizer.step()
            model.encoder.wavelet.clamp()
            losses.append(float(loss.values))
        trace.append(math.fsum(losses) / len(losses) if losses else float("nan"))
    model.train_source_ids = tuple(sorted(set(model.train_source_ids) | dataset.source_ids()))
    if freeze_encoder:
        for k, v in model.encoder.params().items():
            if not np.array_equal(v.values, frozen_before[k]):
                raise ContractError(f"frozen encoder parameter {k} changed during head-only tuning")
    return trace


def _classifier_batch_loss(model: ClassifierModel, batch, kernels) -> Tensor | None:
    segments = [s.segment for s in batch]
    if model.kind == "multilabel":
        dictionary = model.task_classes["multilabel"]
        dim_index = {entry: i for i, entry in enumerate(dictionary)}
        targets = np.zeros((len(batch), len(dictionary)))
        for r, sample in enumerate(batch):
            targets[r, dim_index[sample.vessel_type]] = 1.0
            for f in AUX_FIELDS:
                v = getattr(sample.record, f)
                if v is not None and f"{f}={v}" in dim_index:
                    targets[r, dim_index[f"{f}={v}"]] = 1.0
        logits = model.head_logits(segments, "multilabel", kernels)
        return binary_ce_logits(logits, targets)

    total = None
    for task in sorted(model.heads):
        classes = model.task_classes[task]
        class_index = {c: i for i, c in enumerate(classes)}
        rows, targets = [], []
        for i, sample in enumerate(batch):
            value = sample.vessel_type if task == "category" else getattr(sample.record, task)
            if value is None:
                continue  # annotation missing: skip this sample for this task only
            rows.append(i)
            targets.append(class_index[value])
        if not rows:
            continue
        logits = model.head_logits([segments[i] for i in rows], task, kernels)
        term = softmax_ce(logits, targets)
        total = term if total is None else add(total, term)
    return total


def uart_tune(model: TriModalModel, dataset: Dataset, config: RunConfig, log_path=None) -> list[str]:
    """Continue contrastive training on a new dataset without touching the
    model structure; templates may differ, the tokenizer is kept."""
    if config.encoder.d != model.config.encoder.d:
        raise ConfigError(
            f"embedding dim mismatch: checkpoint d={model.config.encoder.d}, config d={config.encoder.d}"
        )
    lines = continue_training(dataset, model, config, log_path=log_path)
    model.class_labels = dataset.vessel_types()
    return lines


def encoder_tune(pretrained, dataset: Dataset, config: RunConfig,
                 freeze_encoder: bool = False) -> tuple[ClassifierModel, list[float]]:
    """Drop the text and spectrogram encoders; attach a category head to the
    (pretrained or fresh) audio encoder and train with softmax CE."""
    labels = dataset.vessel_types()
    if len(labels) < 2:
        raise ConfigError(f"classification needs at least 2 classes, got {labels}")
    model = ClassifierModel(config, "category", {"category": labels})
    if pretrained is not None:
        source = pretrained.audio_encoder if isinstance(pretrained, TriModalModel) else pretrained
        _copy_encoder_weights(model.encoder, source)
    trace = train_classifier(model, dataset, config, freeze_encoder=freeze_encoder)
    return model, trace


def multilabel_baseline(dataset: Dataset, config: RunConfig) -> tuple[ClassifierModel, list[float]]:
    """One wide head over the fused annotation dictionary with multi-hot targets."""
    categories = dataset.vessel_types()
    aux_entries = sorted(
        {
            f"{f}={getattr(s.record, f)}"
            for s in dataset.samples
            for f in AUX_FIELDS
            if getattr(s.record, f) is not None
        }
    )
    dictionary = categories + aux_entries
    if not dictionary:
        raise ConfigError("empty label dictionary")
    model = ClassifierModel(
        config,
        "multilabel",
        {"multilabel": dictionary, "n_categories": [len(categories)]},
    )
    trace = train_classifier(model, dataset, config)
    return model, trace


def multitask_baseline(dataset: Dataset, tasks: list[str], config: RunConfig) -> tuple[ClassifierModel, list[float]]:
    """Shared audio encoder with one linear head per task; losses are summed.

    Inference uses only the category head, so auxiliary tasks never alter the
    inference pathway.
    """
    if "category" not in tasks:
        raise ConfigError("multitask baseline requires the category task")
    task_classes: dict[str, list[str]] = {}
    for task in tasks:
        if task == "category":
            task_classes[task] = dataset.vessel_types()
        else:
            if task not in AUX_FIELDS:
                raise ConfigError(f"unknown task {task!r}; expected category or one of {AUX_FIELDS}")
            values = sorted({getattr(s.record, task) for s in dataset.samples if getattr(s.record, task) is not None})
            if not values:
                raise ConfigError(f"no annotations present for task {task!r}")
            task_classes[task] = values
    model = ClassifierModel(config, "multitask" if len(tasks) > 1 else "category", task_classes)
    trace = train_classifier(model, dataset, config)
    return model, trace
