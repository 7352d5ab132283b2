"""Scratch: few-shot transfer — encoder tuning from a contrastive-pretrained
checkpoint vs random init, 10% of target labels."""
import sys, time
sys.path.insert(0, "src")
from tricl.config import RunConfig
from tricl.data import ingest, make_folds, stratified_source_subset
from tricl.inference import evaluate
from tricl.synth import AuxFieldSpec, ClassSpec, SynthSpec, synth_generate, three_class_spec
from tricl.templates import DEFAULT_TRAIN_TEMPLATE, parse_template
from tricl.trainer import train
from tricl.tuning import encoder_tune

AUX_TMPL = "\n".join(c.text for c in DEFAULT_TRAIN_TEMPLATE.clauses)
LABEL_TMPL = "The sound belongs to {label}"

def cfg(seed, epochs, lr=1e-3, batch=8):
    return RunConfig.from_dict({
        "preprocess": {"segment_seconds": 2.0, "overlap_seconds": 1.0,
                       "n_scales": 12, "fmin_hz": 200, "fmax_hz": 4000, "wavelet_hop": 1600,
                       "frame_length_ms": 100, "frame_shift_ms": 50,
                       "spec_input": "mel", "n_mels": 64, "log_magnitude": True},
        "encoder": {"d": 64, "seed": seed},
        "train": {"batch_size": batch, "epochs": epochs, "lr": lr, "seed": seed, "vocab_size": 300},
    })

def target_spec(noise=0.06):
    return SynthSpec(
        classes=[
            ClassSpec("Delta", 340.0, (1.0, 0.4, 0.3)),
            ClassSpec("Echo", 450.0, (0.5, 1.0, 0.2)),
            ClassSpec("Foxtrot", 620.0, (1.0, 0.2, 0.5)),
        ],
        samples_per_class=24, duration_seconds=2.0, noise_level=noise, seed=7,
    )

# one pretrained tri-modal model on the aux-annotated 3-class task
pre_manifest = synth_generate(three_class_spec(seed=0, samples_per_class=24), "/tmp/cal_pre")
pc = cfg(0, 40)
pre_ds, pre_man = ingest(pre_manifest, DEFAULT_TRAIN_TEMPLATE, pc.preprocess)
t0 = time.time()
pretrained, _ = train(pre_ds, pc, AUX_TMPL, LABEL_TMPL)
print(f"pretrain done t={time.time()-t0:.0f}s", flush=True)

tgt_manifest = synth_generate(target_spec(), "/tmp/cal_tgt")
for seed in (0, 1, 2):
    for tune_epochs in (25,):
        c = cfg(seed, tune_epochs, batch=4)
        dataset, manifest = ingest(tgt_manifest, parse_template(LABEL_TMPL), c.preprocess)
        folds = make_folds(manifest, 4, seed=0)
        train_ds, _ = dataset.split_by_fold(folds, 0)
        few = stratified_source_subset(train_ds, 0.1, seed=seed)
        for arm, src in (("pre ", pretrained), ("rand", None)):
            t0 = time.time()
            clf, trace = encoder_tune(src, few, c)
            acc = evaluate(clf, dataset, folds, 0).accuracy
            print(f"CRIT7 {arm} seed={seed} ep={tune_epochs} n_train={len(few.samples)}: "
                  f"acc={acc:.3f} t={time.time()-t0:.0f}s", flush=True)
