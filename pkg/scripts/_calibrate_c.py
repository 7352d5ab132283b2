"""Scratch sweep: confusable-pair designs where aux clauses should beat label-only."""
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

def cfg(seed, epochs, lr, modalities="tri"):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64, "log_magnitude": True},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": 8, "epochs": epochs, "lr": lr, "seed": seed,
                  "vocab_size": 300, "modalities": modalities},
    })

def design_xor(missing):
    # class = XOR(fundamental, distance); depth tilt adds nuisance variance
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 300.0, "far": 510.0}, (1.0, 0.5, 0.25), f0_field="distance"),
            ClassSpec("Bravo", {"close": 510.0, "far": 300.0}, (1.0, 0.5, 0.25), f0_field="distance"),
        ],
        aux_fields={
            "distance": AuxFieldSpec(("close", "far"), missing_rate=missing,
                                     effects={"far": {"gain": 0.5, "lowpass": 0.85}}),
            "depth": AuxFieldSpec(("shallow", "deep"), missing_rate=missing,
                                  effects={"deep": {"tilt": 1.5}}),
        },
        samples_per_class=24, duration_seconds=2.0, noise_level=0.03, seed=0,
    )

def design_subtle(missing):
    # shared f0-by-distance; class cue is harmonic balance only
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 300.0, "far": 480.0}, (1.0, 0.12, 0.5), f0_field="distance"),
            ClassSpec("Bravo", {"close": 300.0, "far": 480.0}, (1.0, 0.5, 0.12), f0_field="distance"),
        ],
        aux_fields={
            "distance": AuxFieldSpec(("close", "far"), missing_rate=missing,
                                     effects={"far": {"gain": 0.45, "lowpass": 0.88}}),
        },
        samples_per_class=24, duration_seconds=2.0, noise_level=0.03, seed=0,
    )

def run(tag, spec, arm_tmpl, arm_name, seed, epochs, lr=1e-3, modalities="tri"):
    out = f"/tmp/cal_{tag}"
    manifest_path = synth_generate(spec, out)
    c = cfg(seed, epochs, lr, modalities)
    dataset, manifest = ingest(manifest_path, parse_template(arm_tmpl), c.preprocess)
    folds = make_folds(manifest, 4, seed=0)
    train_ds, _ = dataset.split_by_fold(folds, 0)
    t0 = time.time()
    model, lines = train(train_ds, c, arm_tmpl, LABEL_TMPL)
    acc = evaluate(model, dataset, folds, 0).accuracy
    print(f"{tag} {arm_name} seed={seed} ep={epochs}: acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
    return acc

for tag, spec_fn in (("xor30", lambda: design_xor(0.3)), ("sub30", lambda: design_subtle(0.3))):
    for seed in (0, 1, 2):
        for epochs in (30, 60):
            run(tag, spec_fn(), AUX_TMPL, "aux", seed, epochs)
            run(tag, spec_fn(), LABEL_TMPL, "label", seed, epochs)
