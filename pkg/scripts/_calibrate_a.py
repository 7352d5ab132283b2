"""Scratch calibration: criterion-4-style end-to-end runs (3-class, held-out fold)."""
import sys, time
sys.path.insert(0, "src")
from tricl.config import RunConfig
from tricl.data import ingest, make_folds
from tricl.inference import evaluate
from tricl.synth import synth_generate, three_class_spec
from tricl.templates import DEFAULT_TRAIN_TEMPLATE, parse_template
from tricl.trainer import train

TMPL = "\n".join(c.text for c in DEFAULT_TRAIN_TEMPLATE.clauses)
TEST_TMPL = "The sound belongs to {label}"

def cfg(seed, epochs, lr):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": 8, "epochs": epochs, "lr": lr, "seed": seed, "vocab_size": 300},
    })

manifest_path = synth_generate(three_class_spec(seed=0, samples_per_class=24), "/tmp/cal_three")
for seed in (0, 1, 2):
    for lr, epochs in ((1e-3, 40),):
        c = cfg(seed, epochs, lr)
        dataset, manifest = ingest(manifest_path, DEFAULT_TRAIN_TEMPLATE, c.preprocess)
        folds = make_folds(manifest, 4, seed=0)
        train_ds, _ = dataset.split_by_fold(folds, 0)
        t0 = time.time()
        model, lines = train(train_ds, c, TMPL, TEST_TMPL)
        acc = evaluate(model, dataset, folds, 0).accuracy
        print(f"CRIT4 seed={seed} lr={lr} epochs={epochs}: acc={acc:.3f} "
              f"loss={lines[-1].split()[1]} t={time.time()-t0:.0f}s", flush=True)
