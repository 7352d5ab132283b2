"""Contrastive-loss identities, anomaly filtering, logits, and epoch behavior."""

import math

import numpy as np
import pytest

from helpers import check_grad, tiny_run_config
from tricl.bpe import train_bpe
from tricl.config import RunConfig
from tricl.data import Dataset, TrainSample
from tricl.dsp import AudioSegment
from tricl.encoders import Embedding
from tricl.errors import ContractError, DegenerateBatchError
from tricl.model import TriModalModel
from tricl.optim import AdamW
from tricl.templates import AnnotationRecord
from tricl.tensor import Tensor, backward
from tricl.trainer import (
    anomaly_filter,
    batch_loss,
    compute_logits,
    contrastive_loss,
    cosine_similarity,
    stack_embeddings,
    train_epoch,
)


def emb(values, modality="audio"):
    return Embedding(Tensor(np.asarray(values, dtype=np.float64)), modality)


class TestAnomalyFilter:
    def test_clean_batch_unchanged(self):
        batch = {
            "audio": [emb([1.0, 0.0]), emb([0.0, 1.0])],
            "text": [emb([1.0, 1.0], "text"), emb([2.0, 0.0], "text")],
        }
        filtered, kept = anomaly_filter(batch)
        assert kept == [0, 1]
        assert filtered["audio"] is not batch["audio"] and len(filtered["audio"]) == 2

    def test_zero_norm_in_one_modality_drops_sample_everywhere(self):
        batch = {
            "audio": [emb([1.0]), emb([1.0]), emb([1.0]), emb([1.0])],
            "text": [emb([1.0], "text"), emb([0.0], "text"), emb([1.0], "text"), emb([1.0], "text")],
            "spec": [emb([1.0], "spec")] * 4,
        }
        filtered, kept = anomaly_filter(batch)
        assert kept == [0, 2, 3]
        assert all(len(v) == 3 for v in filtered.values())

    def test_all_zero_batch_degenerates(self):
        batch = {"audio": [emb([0.0]), emb([0.0])], "text": [emb([1.0], "text")] * 2}
        with pytest.raises(DegenerateBatchError):
            anomaly_filter(batch)

    def test_removal_is_all_or_none(self):
        rng = np.random.default_rng(0)
        batch = {
            "audio": [emb(rng.standard_normal(4)) for _ in range(6)],
            "text": [emb(rng.standard_normal(4), "text") for _ in range(6)],
        }
        batch["audio"][2] = emb(np.zeros(4))
        batch["text"][4] = emb(np.zeros(4), "text")
        filtered, kept = anomaly_filter(batch)
        assert kept == [0, 1, 3, 5]
        assert len(filtered["audio"]) == len(filtered["text"]) == 4


class TestCosine:
    def test_identical_vectors(self):
        assert cosine_similarity(emb([2.0, 1.0]), emb([2.0, 1.0])) == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        assert cosine_similarity(emb([1.0, 0.0]), emb([0.0, 1.0])) == 0.0

    def test_45_degrees(self):
        assert cosine_similarity(emb([1.0, 1.0]), emb([1.0, 0.0])) == pytest.approx(0.70710678, abs=1e-8)

    def test_zero_norm_rejected(self):
        with pytest.raises(ContractError):
            cosine_similarity(emb([0.0, 0.0]), emb([1.0, 0.0]))


class TestLogits:
    def test_zero_scale_gives_raw_cosines(self):
        rng = np.random.default_rng(1)
        xs = [emb(rng.standard_normal(5)) for _ in range(3)]
        ys = [emb(rng.standard_normal(5), "text") for _ in range(3)]
        logits = compute_logits(xs, ys, 0.0)
        for i in range(3):
            for j in range(3):
                assert logits.values[i, j] == pytest.approx(cosine_similarity(xs[i], ys[j]), abs=1e-12)

    def test_orthonormal_matched_batch_is_scaled_identity(self):
        eye = [emb(row) for row in np.eye(4)]
        logits = compute_logits(eye, [Embedding(e.vector, "text") for e in eye], Tensor(0.7, requires_grad=True))
        np.testing.assert_allclose(logits.values, np.exp(0.7) * np.eye(4), atol=1e-12)

    def test_bounded_by_exp_scale(self):
        rng = np.random.default_rng(2)
        xs = [emb(rng.standard_normal(6)) for _ in range(5)]
        ys = [emb(rng.standard_normal(6), "text") for _ in range(5)]
        s = 1.3
        logits = compute_logits(xs, ys, s)
        assert np.abs(logits.values).max() <= math.exp(s) + 1e-12

    def test_size_mismatch_rejected(self):
        with pytest.raises(ContractError):
            compute_logits([emb([1.0, 0.0])], [emb([1.0, 0.0], "text"), emb([0.0, 1.0], "text")], 0.0)


class TestLossIdentities:
    def test_zero_logits_is_log_b(self):
        for b in (2, 4, 8):
            zero = Tensor(np.zeros((b, b)))
            loss = contrastive_loss(zero, zero, zero)
            assert abs(float(loss.values) - math.log(b)) < 1e-9

    def test_scaled_identity_loss_closed_form(self):
        s = 0.0
        logits = Tensor(s * np.eye(2))
        # CE of 2x2 zero logits: ln 2
        assert float(contrastive_loss(logits).values) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_identity_logits_decrease_monotonically_to_zero(self):
        prev = None
        for s in (0.0, 1.0, 2.0, 4.0, 8.0, 16.0):
            logits = Tensor(s * np.eye(4))
            val = float(contrastive_loss(logits).values)
            if prev is not None:
                assert val < prev
            prev = val
        assert prev < 1e-6

    def test_two_term_mode(self):
        rng = np.random.default_rng(3)
        logits = Tensor(rng.standard_normal((4, 4)))
        tri = contrastive_loss(logits, logits, logits)
        duo = contrastive_loss(logits)
        assert float(tri.values) == pytest.approx(float(duo.values), abs=1e-12)

    def test_permutation_invariance_bitwise(self):
        rng = np.random.default_rng(4)
        at, ts, sa = (rng.standard_normal((5, 5)) for _ in range(3))
        base = float(contrastive_loss(Tensor(at), Tensor(ts), Tensor(sa)).values)
        for seed in range(8):
            perm = np.random.default_rng(seed).permutation(5)
            swapped = [m[np.ix_(perm, perm)] for m in (at, ts, sa)]
            val = float(contrastive_loss(*(Tensor(m) for m in swapped)).values)
            assert val == base

    def test_loss_near_log_b_at_random_init(self):
        rng = np.random.default_rng(5)
        for b in (4, 8, 16):
            xs = [emb(rng.standard_normal(16)) for _ in range(b)]
            ys = [emb(rng.standard_normal(16), "text") for _ in range(b)]
            zs = [emb(rng.standard_normal(16), "spec") for _ in range(b)]
            at = compute_logits(xs, ys, 0.0)
            ts = compute_logits(ys, zs, 0.0)
            a_s = compute_logits(xs, zs, 0.0)
            val = float(contrastive_loss(at, ts, a_s).values)
            assert 0.5 * math.log(b) <= val <= 1.5 * math.log(b)

    def test_batch_of_one_rejected(self):
        with pytest.raises(ContractError):
            contrastive_loss(Tensor(np.zeros((1, 1))))

    def test_loss_gradients_match_fd(self):
        rng = np.random.default_rng(6)
        x = Tensor(rng.standard_normal((4, 6)), requires_grad=True)
        y = Tensor(rng.standard_normal((4, 6)), requires_grad=True)
        scale = Tensor(0.2, requires_grad=True)

        def build():
            return contrastive_loss(compute_logits(x, y, scale))

        check_grad(build, [x, y, scale], rtol=1e-4)


def make_dataset(n_sources=8, seed=0, n=800):
    cfg = tiny_run_config()
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n_sources):
        label = "Alpha" if i % 2 == 0 else "Bravo"
        tone = 500.0 if label == "Alpha" else 1500.0
        t = np.arange(n) / 16000
        wave = 0.4 * np.sin(2 * np.pi * tone * t + rng.uniform(0, 6.28)) + 0.02 * rng.standard_normal(n)
        segment = AudioSegment(wave, 16000, f"src{i}", 0)
        samples.append(
            TrainSample(
                segment=segment,
                sentence=f"The sound belongs to {label}.",
                vessel_type=label,
                source_id=f"src{i}",
                record=AnnotationRecord(label),
            )
        )
    return Dataset(samples, cfg.preprocess)


def make_model(config: RunConfig, dataset) -> TriModalModel:
    tokenizer = train_bpe([s.sentence for s in dataset.samples], config.train.vocab_size)
    return TriModalModel(config, tokenizer, "tmpl", "The sound belongs to {label}",
                         dataset.vessel_types())


class TestTrainEpoch:
    def test_loss_decreases_over_epochs(self):
        config = tiny_run_config(epochs=10, lr=3e-3)
        dataset = make_dataset()
        model = make_model(config, dataset)
        optimizer = AdamW(list(model.parameters().values()), lr=config.train.lr,
                          weight_decay=config.train.weight_decay)
        rng = np.random.default_rng(0)
        losses = [train_epoch(dataset, model, optimizer, config, rng).mean_loss for _ in range(10)]
        assert losses[-1] < losses[0]

    def test_identical_seed_identical_trace(self):
        def trace():
            config = tiny_run_config(epochs=3, lr=1e-3)
            dataset = make_dataset()
            model = make_model(config, dataset)
            optimizer = AdamW(list(model.parameters().values()), lr=config.train.lr)
            rng = np.random.default_rng(config.train.seed)
            return [train_epoch(dataset, model, optimizer, config, rng).mean_loss for _ in range(3)]

        assert trace() == trace()

    def test_zero_signal_sample_skipped_not_fatal(self):
        # an all-zero segment embeds to zero in every conv path at init (zero biases)
        config = tiny_run_config(epochs=1, batch_size=4)
        dataset = make_dataset(n_sources=4)
        dataset.samples[1].segment = AudioSegment(np.zeros(800), 16000, "src1", 0)
        model = make_model(config, dataset)
        loss = batch_loss(dataset, [0, 1, 2, 3], model)
        assert np.isfinite(float(loss.values))

    def test_learnable_scales_move(self):
        config = tiny_run_config(epochs=6, lr=3e-3)
        dataset = make_dataset()
        model = make_model(config, dataset)
        optimizer = AdamW(list(model.parameters().values()), lr=config.train.lr)
        rng = np.random.default_rng(0)
        for _ in range(6):
            train_epoch(dataset, model, optimizer, config, rng)
        multipliers = model.scales.multipliers()
        assert any(abs(v - 1.0) > 1e-4 for v in multipliers.values())
        assert all(v <= 100.0 for v in multipliers.values())

    def test_audio_text_mode_has_no_spec_encoder(self):
        config = tiny_run_config(modalities="audio_text")
        dataset = make_dataset(n_sources=4)
        model = make_model(config, dataset)
        assert model.spec_encoder is None
        names = set(model.parameters())
        assert "scale.ts" not in names and "scale.as" not in names
        loss = batch_loss(dataset, [0, 1, 2, 3], model)
        backward(loss)
        assert model.scales.scale_at.grad is not None


def test_stack_embeddings_shape():
    rows = [emb(np.arange(3.0) + i) for i in range(4)]
    assert stack_embeddings(rows).shape == (4, 3)
