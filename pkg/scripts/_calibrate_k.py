"""Scratch: hardened few-shot transfer (closer target classes, more noise)."""
import sys, time
sys.path.insert(0, "src")
from tricl.data import ingest, make_folds, stratified_source_subset
from tricl.inference import evaluate
from tricl.presets import AUX_TEMPLATE_TEXT, LABEL_TEMPLATE_TEXT, experiment_run_config
from tricl.synth import ClassSpec, SynthSpec, synth_generate, three_class_spec
from tricl.templates import parse_template
from tricl.trainer import train
from tricl.tuning import encoder_tune

def target_spec(noise):
    return SynthSpec(
        classes=[
            ClassSpec("Delta", 340.0, (1.0, 0.4, 0.3)),
            ClassSpec("Echo", 430.0, (0.5, 1.0, 0.2)),
            ClassSpec("Foxtrot", 540.0, (1.0, 0.2, 0.5)),
        ],
        samples_per_class=24, duration_seconds=2.0, noise_level=noise, seed=7,
    )

pre_manifest = synth_generate(three_class_spec(seed=0, samples_per_class=24), "/tmp/cal_pre2")
pc = experiment_run_config(seed=0, epochs=40)
pre_ds, _ = ingest(pre_manifest, parse_template(AUX_TEMPLATE_TEXT), pc.preprocess)
t0 = time.time()
pretrained, _ = train(pre_ds, pc, AUX_TEMPLATE_TEXT, LABEL_TEMPLATE_TEXT)
print(f"pretrain done t={time.time()-t0:.0f}s", flush=True)

for noise in (0.08, 0.12):
    tgt_manifest = synth_generate(target_spec(noise), f"/tmp/cal_tgt_{noise}")
    for seed in (0, 1, 2):
        c = experiment_run_config(seed=seed, epochs=25, batch_size=4)
        dataset, manifest = ingest(tgt_manifest, parse_template(LABEL_TEMPLATE_TEXT), c.preprocess)
        folds = make_folds(manifest, 4, seed=0)
        train_ds, _ = dataset.split_by_fold(folds, 0)
        few = stratified_source_subset(train_ds, 0.1, seed=seed)
        accs = {}
        for arm, src in (("pre ", pretrained), ("rand", None)):
            clf, _ = encoder_tune(src, few, c)
            accs[arm] = evaluate(clf, dataset, folds, 0).accuracy
            print(f"CRIT7 noise={noise} {arm} seed={seed}: acc={accs[arm]:.3f}", flush=True)
