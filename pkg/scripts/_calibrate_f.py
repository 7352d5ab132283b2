"""Scratch sweep: strictly-more-information aux arm (high missing rate) on
XOR tasks whose stratum cue is subtle."""
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

def cfg(seed, epochs, lr=1e-3):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64, "log_magnitude": True},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": 8, "epochs": epochs, "lr": lr, "seed": seed, "vocab_size": 300},
    })

def design_g():
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 280.0, "far": 430.0}, (1.0, 0.2, 0.6), f0_field="distance"),
            ClassSpec("Bravo", {"close": 280.0, "far": 430.0}, (1.0, 0.6, 0.2), f0_field="distance"),
        ],
        aux_fields={"distance": AuxFieldSpec(("close", "far"), missing_rate=0.45,
                                             effects={"far": {"gain": 0.55, "lowpass": 0.9}})},
        samples_per_class=24, duration_seconds=2.0, noise_level=0.05, seed=0,
    )

def design_h():
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 300.0, "far": 480.0}, (1.0, 0.5, 0.25), f0_field="distance"),
            ClassSpec("Bravo", {"close": 480.0, "far": 300.0}, (1.0, 0.5, 0.25), f0_field="distance"),
        ],
        aux_fields={"distance": AuxFieldSpec(("close", "far"), missing_rate=0.45,
                                             effects={"far": {"gain": 0.75}})},
        samples_per_class=24, duration_seconds=2.0, noise_level=0.05, seed=0,
    )

def design_i():
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 300.0, "far": 480.0}, (1.0, 0.5, 0.25), f0_field="distance"),
            ClassSpec("Bravo", {"close": 480.0, "far": 300.0}, (1.0, 0.5, 0.25), f0_field="distance"),
        ],
        aux_fields={"distance": AuxFieldSpec(("close", "far"), missing_rate=0.45,
                                             effects={"far": {"gain": 0.8, "lowpass": 0.92}})},
        samples_per_class=24, duration_seconds=2.0, noise_level=0.05, seed=0,
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

for tag, spec_fn in (("G", design_g), ("H", design_h), ("I", design_i)):
    spec = spec_fn()
    for seed in (0, 1, 2):
        run(tag, spec, AUX_TMPL, "aux  ", seed, 50)
        run(tag, spec, LABEL_TMPL, "label", seed, 50)
