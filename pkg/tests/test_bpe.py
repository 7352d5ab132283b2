import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tricl.bpe import EOS_ID, PAD_ID, SOS_ID, BpeTokenizer, TokenSequence, tokenize, train_bpe
from tricl.errors import ConfigError, ContractError
from tricl.templates import DEFAULT_TRAIN_TEMPLATE, AnnotationRecord, render_template

CORPUS = [
    render_template(DEFAULT_TRAIN_TEMPLATE, AnnotationRecord("Fishboat", "close", "shallow")),
    render_template(DEFAULT_TRAIN_TEMPLATE, AnnotationRecord("RORO", "far", "deep", wind="windy")),
    render_template(DEFAULT_TRAIN_TEMPLATE, AnnotationRecord("Musselboat", location="the harbour")),
    "The sound belongs to Naturalnoise.",
]


def test_most_frequent_pair_merged_first():
    tok = train_bpe(["aaaa", "aaaa"], 260)
    assert list(tok.merges) == [(ord("a"), ord("a"))]


def test_round_trip_over_corpus():
    tok = train_bpe(CORPUS, 400)
    for sentence in CORPUS:
        assert tok.decode(tok.encode(sentence)) == sentence


@given(st.text(max_size=60))
@settings(max_examples=60, deadline=None)
def test_byte_fallback_handles_any_unicode(text):
    tok = train_bpe(CORPUS, 300)
    assert tok.decode(tok.encode(text)) == text


def test_vocab_size_too_small():
    with pytest.raises(ConfigError):
        train_bpe(CORPUS, 259)


def test_empty_corpus_rejected():
    with pytest.raises(ConfigError):
        train_bpe([], 300)


def test_training_is_deterministic():
    a = train_bpe(CORPUS, 350)
    b = train_bpe(CORPUS, 350)
    assert a.merges == b.merges


def test_serialization_round_trip(tmp_path):
    tok = train_bpe(CORPUS, 330)
    path = tmp_path / "tok.txt"
    tok.save(path)
    again = BpeTokenizer.load(path)
    assert again.merges == tok.merges
    assert again.vocab == tok.vocab


def test_tokenize_brackets_with_specials():
    tok = train_bpe(CORPUS, 300)
    seq = tokenize(CORPUS[0], tok)
    assert seq.ids[0] == SOS_ID and seq.ids[-1] == EOS_ID


def test_tokenize_empty_sentence():
    tok = train_bpe(CORPUS, 300)
    assert tokenize("", tok).ids == [SOS_ID, EOS_ID]


def test_truncation_keeps_eos():
    tok = train_bpe(CORPUS, 300)
    long_sentence = " ".join(CORPUS) * 3
    assert len(tok.encode(long_sentence)) + 2 > 77
    seq = tokenize(long_sentence, tok, max_len=77)
    assert len(seq) == 77 and seq.ids[-1] == EOS_ID and seq.ids[0] == SOS_ID


def test_specials_reserved_and_distinct():
    assert len({SOS_ID, EOS_ID, PAD_ID}) == 3
    tok = train_bpe(CORPUS, 300)
    for merge_id in tok.merges.values():
        assert merge_id > PAD_ID


def test_token_sequence_contract():
    with pytest.raises(ContractError):
        TokenSequence([SOS_ID, 65])
    with pytest.raises(ContractError):
        TokenSequence([65, EOS_ID])
