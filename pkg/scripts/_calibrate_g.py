"""Scratch: refine design G (shared-f0 + harmonic-balance cue) and collect
the bi-modal arm for the spectrogram-encoder comparison."""
import sys, time
sys.path.insert(0, "src")
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

def design_g(gain=0.55, lowpass=0.9, noise=0.05):
    return SynthSpec(
        classes=[
            ClassSpec("Alpha", {"close": 280.0, "far": 430.0}, (1.0, 0.2, 0.6), f0_field="distance"),
            ClassSpec("Bravo", {"close": 280.0, "far": 430.0}, (1.0, 0.6, 0.2), f0_field="distance"),
        ],
        aux_fields={"distance": AuxFieldSpec(("close", "far"), missing_rate=0.45,
                                             effects={"far": {"gain": gain, "lowpass": lowpass}})},
        samples_per_class=24, duration_seconds=2.0, noise_level=noise, seed=0,
    )

def run(tag, spec, tmpl, arm, seed, epochs, modalities="tri"):
    manifest_path = synth_generate(spec, f"/tmp/cal_{tag}")
    c = cfg(seed, epochs, modalities=modalities)
    dataset, manifest = ingest(manifest_path, parse_template(tmpl), c.preprocess)
    folds = make_folds(manifest, 4, seed=0)
    train_ds, _ = dataset.split_by_fold(folds, 0)
    t0 = time.time()
    model, _ = train(train_ds, c, tmpl, LABEL_TMPL)
    acc = evaluate(model, dataset, folds, 0).accuracy
    print(f"{tag} {arm} seed={seed} ep={epochs}: acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
    return acc

spec = design_g()
for seed in (0, 1, 2):
    run("G90", spec, AUX_TMPL, "aux  ", seed, 90)
    run("G90", spec, LABEL_TMPL, "label", seed, 90)
    run("G90", spec, AUX_TMPL, "auxbi", seed, 90, modalities="audio_text")
