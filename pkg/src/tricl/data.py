"""Dataset ingestion: JSONL manifests, WAV loading, 30 s / 15 s segmentation,
and the source-grouped stratified 4-fold protocol.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PreprocessConfig
from .dsp import (
    TARGET_RATE,
    AudioSegment,
    Spectrogram,
    mel_spectrogram,
    read_wav,
    resample_to_16k,
    stft_spectrogram,
)
from .errors import DataError, ProtocolError
from .templates import AUX_FIELDS, AnnotationRecord, TemplateSpec, render_template

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestRecord:
    audio_path: Path
    source_id: str
    vessel_type: str
    sample_rate_hz: int
    distance: str | None = None
    depth: str | None = None
    location: str | None = None
    wind: str | None = None

    def annotation(self) -> AnnotationRecord:
        return AnnotationRecord(
            vessel_type=self.vessel_type,
            distance=self.distance,
            depth=self.depth,
            location=self.location,
            wind=self.wind,
        )


@dataclass
class DatasetManifest:
    records: list[ManifestRecord]

    def source_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.source_id, None)
        return list(seen)

    def vessel_type_of(self, source_id: str) -> str:
        for r in self.records:
            if r.source_id == source_id:
                return r.vessel_type
        raise DataError(f"unknown source_id {source_id!r}")


def load_manifest(path) -> DatasetManifest:
    """Parse a JSON-Lines manifest; paths are resolved relative to the file."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    base = path.parent
    records = []
    source_types: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path} row {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(row, dict):
            raise DataError(f"{path} row {lineno}: expected an object")
        for required in ("audio", "source_id", "vessel_type", "sample_rate_hz"):
            if not row.get(required):
                raise DataError(f"{path} row {lineno}: missing required field {required!r}")
        audio_path = base / row["audio"]
        if not audio_path.exists():
            raise DataError(f"{path} row {lineno}: audio file not found: {audio_path}")
        aux = {}
        for f in AUX_FIELDS:
            v = row.get(f)
            if v is not None:
                if not isinstance(v, str) or not v:
                    raise DataError(f"{path} row {lineno}: field {f!r} must be a nonempty string")
                aux[f] = v
        rec = ManifestRecord(
            audio_path=audio_path,
            source_id=str(row["source_id"]),
            vessel_type=str(row["vessel_type"]),
            sample_rate_hz=int(row["sample_rate_hz"]),
            **aux,
        )
        prev = source_types.setdefault(rec.source_id, rec.vessel_type)
        if prev != rec.vessel_type:
            raise DataError(f"{path} row {lineno}: source {rec.source_id!r} has conflicting vessel types")
        records.append(rec)
    if not records:
        raise DataError(f"{path}: manifest is empty")
    return DatasetManifest(records)


def segment_audio(
    samples: np.ndarray,
    source_id: str,
    segment_seconds: float = 30.0,
    overlap_seconds: float = 15.0,
    sample_rate_hz: int = TARGET_RATE,
) -> list[AudioSegment]:
    """Cut into fixed windows at offsets 0, step, 2*step, ... where
    step = segment - overlap; recordings shorter than one window yield none."""
    seg_len = int(round(segment_seconds * sample_rate_hz))
    step = int(round((segment_seconds - overlap_seconds) * sample_rate_hz))
    if step <= 0:
        raise DataError(f"segment step must be positive (segment={segment_seconds}s, overlap={overlap_seconds}s)")
    n = len(samples)
    if n < seg_len:
        log.warning("recording %s too short for one %.0fs segment; skipped", source_id, segment_seconds)
        return []
    count = (n - seg_len) // step + 1
    return [
        AudioSegment(samples[k * step : k * step + seg_len], sample_rate_hz, source_id, k)
        for k in range(count)
    ]


@dataclass(frozen=True)
class FoldAssignment:
    mapping: dict[str, int]
    k: int

    def fold_of(self, source_id: str) -> int:
        return self.mapping[source_id]

    def sources_in(self, fold: int) -> list[str]:
        return [s for s, f in self.mapping.items() if f == fold]


def make_folds(manifest: DatasetManifest, k: int = 4, seed: int = 0) -> FoldAssignment:
    """Assign each source to one fold, stratified by vessel type.

    Sources are shuffled within each type and dealt round-robin with a global
    counter, so folds stay balanced and every fold is nonempty when there are
    at least k sources.
    """
    sources = manifest.source_ids()
    if len(sources) < k:
        raise ProtocolError(f"need at least {k} sources for {k} folds, have {len(sources)}")
    by_type: dict[str, list[str]] = {}
    for s in sources:
        by_type.setdefault(manifest.vessel_type_of(s), []).append(s)
    rng = np.random.default_rng(seed)
    mapping: dict[str, int] = {}
    counter = 0
    for vessel_type in sorted(by_type):
        group = sorted(by_type[vessel_type])
        rng.shuffle(group)
        for s in group:
            mapping[s] = counter % k
            counter += 1
    return FoldAssignment(mapping=mapping, k=k)


@dataclass
class TrainSample:
    segment: AudioSegment
    sentence: str
    vessel_type: str
    source_id: str
    record: AnnotationRecord
    spec: Spectrogram | None = field(default=None, repr=False)  # cached encoder input


@dataclass
class Dataset:
    samples: list[TrainSample]
    preprocess: PreprocessConfig

    def __len__(self) -> int:
        return len(self.samples)

    def spectrogram(self, sample: TrainSample) -> Spectrogram:
        if sample.spec is None:
            p = self.preprocess
            if p.spec_input == "mel":
                sample.spec = mel_spectrogram(
                    sample.segment, p.n_mels, p.frame_length_ms, p.frame_shift_ms, p.fft_size, p.log_magnitude
                )
            else:
                sample.spec = stft_spectrogram(
                    sample.segment, p.frame_length_ms, p.frame_shift_ms, p.fft_size, p.log_magnitude
                )
        return sample.spec

    def select(self, indices) -> "Dataset":
        return Dataset([self.samples[i] for i in indices], self.preprocess)

    def source_ids(self) -> set[str]:
        return {s.source_id for s in self.samples}

    def vessel_types(self) -> list[str]:
        return sorted({s.vessel_type for s in self.samples})

    def split_by_fold(self, folds: FoldAssignment, test_fold: int) -> tuple["Dataset", "Dataset"]:
        train_idx = [i for i, s in enumerate(self.samples) if folds.fold_of(s.source_id) != test_fold]
        test_idx = [i for i, s in enumerate(self.samples) if folds.fold_of(s.source_id) == test_fold]
        train, test = self.select(train_idx), self.select(test_idx)
        leaked = train.source_ids() & test.source_ids()
        if leaked:
            raise ProtocolError(f"sources straddle the fold boundary: {sorted(leaked)}")
        return train, test


def stratified_source_subset(dataset: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Keep a seeded per-class fraction of sources (at least one per class)."""
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    by_type: dict[str, list[str]] = {}
    for s in dataset.samples:
        group = by_type.setdefault(s.vessel_type, [])
        if s.source_id not in group:
            group.append(s.source_id)
    rng = np.random.default_rng(seed)
    keep: set[str] = set()
    for vessel_type in sorted(by_type):
        sources = sorted(by_type[vessel_type])
        rng.shuffle(sources)
        keep.update(sources[: max(1, round(fraction * len(sources)))])
    return dataset.select([i for i, s in enumerate(dataset.samples) if s.source_id in keep])


def iter_triples(manifest: DatasetManifest, template: TemplateSpec, preprocess: PreprocessConfig):
    """Lazily yield (AudioSegment, Spectrogram, sentence) per segment."""
    for rec in manifest.records:
        samples, rate = read_wav(rec.audio_path)
        if rate != rec.sample_rate_hz:
            raise DataError(f"{rec.audio_path}: header rate {rate} != manifest rate {rec.sample_rate_hz}")
        if rate != TARGET_RATE:
            samples = resample_to_16k(samples, rate)
        sentence = render_template(template, rec.annotation())
        for segment in segment_audio(
            samples, rec.source_id, preprocess.segment_seconds, preprocess.overlap_seconds
        ):
            if preprocess.spec_input == "mel":
                spec = mel_spectrogram(
                    segment,
                    preprocess.n_mels,
                    preprocess.frame_length_ms,
                    preprocess.frame_shift_ms,
                    preprocess.fft_size,
                    preprocess.log_magnitude,
                )
            else:
                spec = stft_spectrogram(
                    segment,
                    preprocess.frame_length_ms,
                    preprocess.frame_shift_ms,
                    preprocess.fft_size,
                    preprocess.log_magnitude,
                )
            yield segment, spec, sentence


def ingest(manifest_path, template: TemplateSpec, preprocess: PreprocessConfig) -> tuple[Dataset, DatasetManifest]:
    """Load every recording, segment it, and render its sentence.

    Spectrograms are computed lazily by Dataset.spectrogram and cached on the
    sample, since they are constant across training epochs.
    """
    manifest = load_manifest(manifest_path)
    samples: list[TrainSample] = []
    for rec in manifest.records:
        raw, rate = read_wav(rec.audio_path)
        if rate != rec.sample_rate_hz:
            raise DataError(f"{rec.audio_path}: header rate {rate} != manifest rate {rec.sample_rate_hz}")
        if rate != TARGET_RATE:
            raw = resample_to_16k(raw, rate)
        annotation = rec.annotation()
        sentence = render_template(template, annotation)
        for segment in segment_audio(raw, rec.source_id, preprocess.segment_seconds, preprocess.overlap_seconds):
            samples.append(
                TrainSample(
                    segment=segment,
                    sentence=sentence,
                    vessel_type=rec.vessel_type,
                    source_id=rec.source_id,
                    record=annotation,
                )
            )
    if not samples:
        raise DataError("no segments produced; recordings shorter than the segment length?")
    return Dataset(samples, preprocess), manifest
