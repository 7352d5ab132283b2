"""Encoder contracts: shared dimension, determinism, gradient flow, pooling."""

import numpy as np
import pytest

from helpers import check_grad, tiny_run_config
from tricl.bpe import tokenize, train_bpe
from tricl.dsp import AudioSegment, stft_spectrogram
from tricl.encoders import AudioEncoder, SpecEncoder, TextEncoder
from tricl.errors import ContractError
from tricl.tensor import Tensor, mul, tsum

CFG = tiny_run_config()
TOKENIZER = train_bpe(["The sound belongs to Alpha.", "The sound belongs to Bravo."], 280)


def make_segment(seed=0, n=800):
    rng = np.random.default_rng(seed)
    return AudioSegment(rng.uniform(-0.5, 0.5, n), 16000, f"s{seed}", 0)


def make_audio_encoder(seed=0):
    return AudioEncoder(CFG.encoder, CFG.preprocess, np.random.default_rng(seed))


def make_spec_encoder(seed=0):
    return SpecEncoder(CFG.encoder, "stft", np.random.default_rng(seed))


def make_text_encoder(seed=0):
    return TextEncoder(CFG.encoder, TOKENIZER.vocab_size, 32, np.random.default_rng(seed))


def spec_of(segment):
    p = CFG.preprocess
    return stft_spectrogram(segment, p.frame_length_ms, p.frame_shift_ms, p.fft_size)


def test_shared_embedding_dimension():
    segment = make_segment()
    d = CFG.encoder.d
    audio = make_audio_encoder().encode(segment)
    spec = make_spec_encoder().encode(spec_of(segment))
    text = make_text_encoder().encode(tokenize("The sound belongs to Alpha.", TOKENIZER))
    assert audio.vector.shape == spec.vector.shape == text.vector.shape == (d,)
    assert {audio.modality, spec.modality, text.modality} == {"audio", "spec", "text"}
    for e in (audio, spec, text):
        assert np.isfinite(e.vector.values).all()


def test_deterministic_forward():
    segment = make_segment(3)
    enc1, enc2 = make_audio_encoder(1), make_audio_encoder(1)
    v1 = enc1.encode(segment).vector.values
    v2 = enc2.encode(segment).vector.values
    assert np.array_equal(v1, v2)
    assert np.array_equal(v1, enc1.encode(segment).vector.values)


def test_audio_encoder_rejects_wrong_rate():
    enc = make_audio_encoder()
    with pytest.raises(ContractError, match="16000"):
        enc.encode(AudioSegment(np.zeros(800), 8000, "s", 0))


def test_spec_encoder_rejects_wrong_kind():
    enc = make_spec_encoder()
    spec = spec_of(make_segment())
    spec.kind = "mel"
    with pytest.raises(ContractError):
        enc.encode(spec)


def test_attention_weights_sum_to_one():
    enc = make_spec_encoder()
    spec = spec_of(make_segment(5))
    f, b = spec.grid.shape
    from tricl.tensor import reshape

    h = enc.conv(reshape(Tensor(spec.grid), (1, f, b)))
    _, weights = enc.pool(h, return_weights=True)
    for w in weights:
        np.testing.assert_allclose(w.values.sum(axis=1), 1.0, atol=1e-9)
        assert (w.values > 0).all()


def test_frame_permutation_changes_spec_embedding():
    enc = make_spec_encoder()
    spec = spec_of(make_segment(6))
    base = enc.encode(spec).vector.values.copy()
    permuted = spec.grid.copy()
    permuted[[0, 3]] = permuted[[3, 0]]
    spec2 = spec_of(make_segment(6))
    spec2.grid = permuted
    assert not np.allclose(enc.encode(spec2).vector.values, base)


def test_text_appending_token_changes_embedding():
    enc = make_text_encoder()
    short = tokenize("The sound belongs to Alpha", TOKENIZER)
    longer = tokenize("The sound belongs to Alpha.", TOKENIZER)
    assert len(longer) > len(short)
    a = enc.encode(short).vector.values
    b = enc.encode(longer).vector.values
    assert not np.allclose(a, b)


def test_text_identical_sequences_identical_embedding():
    enc = make_text_encoder()
    seq = tokenize("The sound belongs to Bravo.", TOKENIZER)
    assert np.array_equal(enc.encode(seq).vector.values, enc.encode(seq).vector.values)


def test_text_rejects_overlong_sequence():
    enc = TextEncoder(CFG.encoder, TOKENIZER.vocab_size, 4, np.random.default_rng(0))
    with pytest.raises(ContractError):
        enc.encode(tokenize("The sound belongs to Alpha.", TOKENIZER, max_len=32))


class TestGradientFlow:
    def test_audio_encoder_end_to_end(self):
        enc = make_audio_encoder(2)
        segment = make_segment(7, n=400)
        readout = Tensor(np.random.default_rng(8).standard_normal(CFG.encoder.d))

        def build():
            emb = enc.encode(segment)
            return tsum(mul(emb.vector, readout))

        # h below the relu-kink scale: zero-init biases leave pre-activations near 0
        params = list(enc.params().values())
        worst = check_grad(build, params, h=1e-6, rtol=1e-3, probe_per_param=3, rng=np.random.default_rng(0))
        assert worst <= 1e-3

    def test_spec_encoder_end_to_end(self):
        enc = make_spec_encoder(3)
        spec = spec_of(make_segment(9, n=400))
        readout = Tensor(np.random.default_rng(10).standard_normal(CFG.encoder.d))

        def build():
            return tsum(mul(enc.encode(spec).vector, readout))

        check_grad(build, list(enc.params().values()), h=1e-6, rtol=1e-3, probe_per_param=3,
                   rng=np.random.default_rng(1))

    def test_text_encoder_end_to_end(self):
        enc = make_text_encoder(4)
        seq = tokenize("The sound belongs to Alpha.", TOKENIZER)
        readout = Tensor(np.random.default_rng(11).standard_normal(CFG.encoder.d))

        def build():
            return tsum(mul(enc.encode(seq).vector, readout))

        check_grad(build, list(enc.params().values()), h=1e-6, rtol=1e-3, probe_per_param=3,
                   rng=np.random.default_rng(2))
