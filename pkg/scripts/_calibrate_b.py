"""Scratch calibration: criterion-5/6 — confusable pair, aux vs label-only vs bi-modal."""
import sys, time
sys.path.insert(0, "src")
from tricl.config import RunConfig
from tricl.data import ingest, make_folds
from tricl.inference import evaluate
from tricl.synth import confusable_pair_spec, synth_generate
from tricl.templates import DEFAULT_TRAIN_TEMPLATE, parse_template
from tricl.trainer import train

AUX_TMPL = "\n".join(c.text for c in DEFAULT_TRAIN_TEMPLATE.clauses)
LABEL_TMPL = "The sound belongs to {label}"

def cfg(seed, epochs, lr, modalities="tri"):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": 8, "epochs": epochs, "lr": lr, "seed": seed,
                  "vocab_size": 300, "modalities": modalities},
    })

manifest_path = synth_generate(confusable_pair_spec(seed=0, samples_per_class=24), "/tmp/cal_conf")
EPOCHS, LR = 40, 1e-3
for seed in (0, 1, 2):
    for arm, tmpl, modal in (("aux_tri", AUX_TMPL, "tri"),
                             ("label_tri", LABEL_TMPL, "tri"),
                             ("aux_bi", AUX_TMPL, "audio_text")):
        c = cfg(seed, EPOCHS, LR, modal)
        dataset, manifest = ingest(manifest_path, parse_template(tmpl), c.preprocess)
        folds = make_folds(manifest, 4, seed=0)
        train_ds, _ = dataset.split_by_fold(folds, 0)
        t0 = time.time()
        model, lines = train(train_ds, c, tmpl, LABEL_TMPL)
        acc = evaluate(model, dataset, folds, 0).accuracy
        print(f"CRIT56 seed={seed} arm={arm}: acc={acc:.3f} "
              f"loss={lines[-1].split()[1]} t={time.time()-t0:.0f}s", flush=True)
