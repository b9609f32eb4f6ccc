"""Generate a small labeled dataset, train a compact residual network with
focal loss, and read the full metric report.

Run:  python demos/04_training_on_synthetic.py   (about half a minute on CPU)
"""

from ecglearn import (BatchLoader, ModelSpec, OptimizerConfig, TaskKind,
                      build, evaluate, focal_loss, generate_synthetic_dataset,
                      ptbxl_split, split_indices, summarize_parameters,
                      train_model)

manifest, records = generate_synthetic_dataset(
    2, 48, TaskKind.MULTICLASS, seed=5, length=1200)
idx = split_indices(manifest, ptbxl_split(manifest))
print(f"dataset: {len(manifest)} records, splits "
      f"train={len(idx['train'])} val={len(idx['val'])} test={len(idx['test'])}")


def loader(which, training):
    return BatchLoader([records[i] for i in idx[which]], manifest.task,
                       batch_size=16, segment_len=256, normalization="zscore",
                       seed=1, training=training)


model = build(ModelSpec("ResNet18_1D", manifest.task, {"base_width": 8}), seed=2)
_, total = summarize_parameters(model)
print(f"model: ResNet18_1D (base width 8), {total:,} parameters")

cfg = OptimizerConfig(lr=1e-3, batch_size=16, epochs=12, patience=6)
result = train_model(model, loader("train", True), loader("val", False),
                     focal_loss, cfg,
                     log=lambda msg: print(f"  {msg}"))
print(f"best validation F1 {result.best_val_f1:.3f} at epoch {result.best_epoch}")

report = evaluate(model, loader("test", False))
print("\ntest-split report:")
for name in ("accuracy", "f1", "map", "gmean", "auc",
             "sensitivity", "specificity", "ppv"):
    print(f"  {name:12s} {getattr(report, name):.3f}")
