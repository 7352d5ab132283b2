"""Scratch sweep: overfitting-regime confusable pair (weak cue + heavy noise +
missing-annotation mixing), where aux supervision should regularize."""
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

def design(noise, missing, h_contrast):
    hi, lo = 0.5 + h_contrast / 2, 0.5 - h_contrast / 2
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 300.0, "far": 480.0}, (1.0, lo, hi), f0_field="distance"),
            ClassSpec("Bravo", {"close": 300.0, "far": 480.0}, (1.0, hi, lo), f0_field="distance"),
        ],
        aux_fields={
            "distance": AuxFieldSpec(("close", "far"), missing_rate=missing,
                                     effects={"far": {"gain": 0.45, "lowpass": 0.88}}),
            "depth": AuxFieldSpec(("shallow", "deep"), missing_rate=missing,
                                  effects={"deep": {"tilt": 1.2}}),
        },
        samples_per_class=24, duration_seconds=2.0, noise_level=noise, seed=0,
    )

def run(tag, spec, tmpl, arm, seed, epochs, modalities="tri"):
    manifest_path = synth_generate(spec, f"/tmp/cal_{tag}")
    c = cfg(seed, epochs, modalities=modalities)
    dataset, manifest = ingest(manifest_path, parse_template(tmpl), c.preprocess)
    folds = make_folds(manifest, 4, seed=0)
    train_ds, _ = dataset.split_by_fold(folds, 0)
    t0 = time.time()
    model, lines = train(train_ds, c, tmpl, LABEL_TMPL)
    acc = evaluate(model, dataset, folds, 0).accuracy
    print(f"{tag} {arm} seed={seed} ep={epochs}: acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
    return acc

for tag, noise, missing, contrast in (("n12", 0.12, 0.25, 0.5), ("n20", 0.20, 0.25, 0.6)):
    spec = design(noise, missing, contrast)
    for seed in (0, 1, 2):
        for epochs in (60,):
            run(tag, spec, AUX_TMPL, "aux  ", seed, epochs)
            run(tag, spec, LABEL_TMPL, "label", seed, epochs)
