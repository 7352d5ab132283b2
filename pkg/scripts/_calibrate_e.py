"""Scratch sweep: wind-noise partition design — aux anchors explain away the
noisy stratum, label-only training conflates it with class structure."""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from tricl.config import RunConfig
from tricl.data import ingest, make_folds
from tricl.inference import evaluate
from tricl.synth import AuxFieldSpec, ClassSpec, SynthSpec, synth_generate
from tricl.templates import DEFAULT_TRAIN_TEMPLATE, parse_template
from tricl.trainer import train

AUX_TMPL = "\n".join(c.text for c in DEFAULT_TRAIN_TEMPLATE.clauses)
LABEL_TMPL = "The sound belongs to {label}"

def cfg(seed, epochs, lr=1e-3, modalities="tri"):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64, "log_magnitude": True},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": 8, "epochs": epochs, "lr": lr, "seed": seed,
                  "vocab_size": 300, "modalities": modalities},
    })

def design(f0_gap, wind_noise, missing):
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", 300.0, (1.0, 0.5, 0.25)),
            ClassSpec("Bravo", 300.0 + f0_gap, (1.0, 0.5, 0.25)),
        ],
        aux_fields={
            "wind": AuxFieldSpec(("calm", "windy"), missing_rate=missing,
                                 effects={"windy": {"noise": wind_noise}}),
        },
        samples_per_class=24, duration_seconds=2.0, noise_level=0.02, seed=0,
    )

def run(tag, spec, tmpl, arm, seed, epochs):
    manifest_path = synth_generate(spec, f"/tmp/cal_{tag}")
    c = cfg(seed, epochs)
    dataset, manifest = ingest(manifest_path, parse_template(tmpl), c.preprocess)
    folds = make_folds(manifest, 4, seed=0)
    train_ds, _ = dataset.split_by_fold(folds, 0)
    t0 = time.time()
    model, _ = train(train_ds, c, tmpl, LABEL_TMPL)
    acc = evaluate(model, dataset, folds, 0).accuracy
    print(f"{tag} {arm} seed={seed} ep={epochs}: acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
    return acc

for tag, gap, wn, miss in (("wind60", 60.0, 0.30, 0.2), ("wind40", 40.0, 0.35, 0.2)):
    spec = design(gap, wn, miss)
    for seed in (0, 1, 2):
        for epochs in (40,):
            run(tag, spec, AUX_TMPL, "aux  ", seed, epochs)
            run(tag, spec, LABEL_TMPL, "label", seed, epochs)
