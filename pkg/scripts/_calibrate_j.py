"""Scratch: aux-first template (class token adjacent to [EOS]) vs label-only,
plus bi-modal arm, on the shared-f0 harmonic-balance pair."""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from tricl.data import ingest, make_folds
from tricl.inference import evaluate
from tricl.presets import experiment_run_config
from tricl.synth import AuxFieldSpec, ClassSpec, SynthSpec, synth_generate
from tricl.templates import parse_template
from tricl.trainer import train

AUXFIRST_TMPL = ("Recorded in {distance} distance,\n"
                 "with {depth} channel depth,\n"
                 "under {wind} wind,\n"
                 "the sound belongs to {label}\n")
LABEL_TMPL = "The sound belongs to {label}\n"
TEST_TMPL = "the sound belongs to {label}\n"

def design(gain=0.6, lowpass=0.92, noise=0.04, missing=0.45):
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 280.0, "far": 430.0}, (1.0, 0.2, 0.6), f0_field="distance"),
            ClassSpec("Bravo", {"close": 280.0, "far": 430.0}, (1.0, 0.6, 0.2), f0_field="distance"),
        ],
        aux_fields={"distance": AuxFieldSpec(("close", "far"), missing_rate=missing,
                                             effects={"far": {"gain": gain, "lowpass": lowpass}})},
        samples_per_class=24, duration_seconds=2.0, noise_level=noise, seed=0,
    )

def run(tag, spec, tmpl, test_tmpl, arm, seed, epochs, modalities="tri"):
    manifest_path = synth_generate(spec, f"/tmp/cal_{tag}")
    c = experiment_run_config(seed=seed, epochs=epochs, modalities=modalities)
    dataset, manifest = ingest(manifest_path, parse_template(tmpl), c.preprocess)
    folds = make_folds(manifest, 4, seed=0)
    train_ds, _ = dataset.split_by_fold(folds, 0)
    t0 = time.time()
    model, _ = train(train_ds, c, tmpl, test_tmpl)
    acc = evaluate(model, dataset, folds, 0).accuracy
    print(f"{tag} {arm} seed={seed} ep={epochs}: acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
    return acc

spec = design()
for epochs in (40, 70):
    for seed in (0, 1, 2):
        run("J", spec, AUXFIRST_TMPL, TEST_TMPL, "auxfirst", seed, epochs)
        run("J", spec, LABEL_TMPL, LABEL_TMPL, "label   ", seed, epochs)
        run("J", spec, AUXFIRST_TMPL, TEST_TMPL, "auxbi   ", seed, epochs, modalities="audio_text")
