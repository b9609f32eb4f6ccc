"""Run orchestration: wiring configs to datasets, models, training, reports.

Every command writes into a run directory: the resolved config snapshot
(config.json), per-epoch history (history.csv), the best checkpoint
(best.ckpt), and the test-split metric report (metrics.json). Re-running a
snapshot under its recorded seed reproduces history and parameters
bit-for-bit. Output never touches the input dataset directory.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
from pathlib import Path

import numpy as np

from .config import RunConfig, config_from_dict, config_to_dict
from .dataio import (BatchLoader, DatasetManifest, SplitPlan, load_manifest,
                     load_records, split_indices)
from .errors import ConfigError, EcglearnError
from .learn import (class_weights_from_counts, evaluate, focal_loss,
                    history_row_names, train_model, weighted_bce)
from .models import Model, ModelSpec, build
from .signal import FilterSpec
from .transfer import (FineTuneMode, adapt_head, finetune, load_checkpoint,
                       save_checkpoint)

__all__ = ["default_output_root", "prepare_run_dir", "resolve_data",
           "run_train", "run_finetune", "run_evaluate", "run_sweep",
           "run_report", "RADIAL_KEYS"]

OUTPUT_ROOT_ENV = "ECGLEARN_RUNS"
RADIAL_KEYS = ("auc", "sensitivity", "specificity", "ppv")


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def prepare_run_dir(cfg: RunConfig, name_hint: str) -> Path:
    out = Path(cfg.out_dir) if cfg.out_dir else default_output_root() / name_hint
    if out.exists() and any(out.iterdir()):
        raise ConfigError(f"run directory {out} already exists and is not empty")
    out.mkdir(parents=True, exist_ok=True)
    return out


class ResolvedData:
    def __init__(self, cfg: RunConfig):
        dataset_dir = Path(cfg.manifest)
        self.dataset_dir = dataset_dir
        self.manifest: DatasetManifest = load_manifest(dataset_dir)
        self.records = load_records(self.manifest, dataset_dir)
        plan = SplitPlan(train_folds=frozenset(cfg.split.train_folds),
                         val_folds=frozenset(cfg.split.val_folds),
                         test_folds=frozenset(cfg.split.test_folds))
        self.indices = split_indices(self.manifest, plan)
        pp = cfg.preprocess
        self.filter_spec = None
        if pp.filter is not None:
            self.filter_spec = FilterSpec(fs=self.manifest.fs,
                                          order=pp.filter.order,
                                          low_cut=pp.filter.low_cut,
                                          high_cut=pp.filter.high_cut)
        self._cfg = cfg

    def loader(self, split: str, training: bool) -> BatchLoader:
        idx = self.indices[split]
        if not idx:
            raise ConfigError(f"split {split!r} selects no records")
        pp = self._cfg.preprocess
        return BatchLoader(
            [self.records[i] for i in idx], self.manifest.task,
            batch_size=self._cfg.optimizer.batch_size,
            segment_len=pp.segment_len, normalization=pp.normalization,
            filter_spec=self.filter_spec, max_len=pp.max_len,
            augment=self._cfg.augment if training else None,
            seed=self._cfg.seed, training=training)


def resolve_data(cfg: RunConfig) -> ResolvedData:
    return ResolvedData(cfg)


def _make_loss(cfg: RunConfig, data: ResolvedData):
    if cfg.loss.kind == "focal":
        return lambda logits, y: focal_loss(logits, y, gamma=cfg.loss.gamma,
                                            alpha=cfg.loss.alpha)
    train_labels = np.stack(
        [data.records[i].labels.values for i in data.indices["train"]])
    weights = class_weights_from_counts(train_labels)
    return lambda logits, y: weighted_bce(logits, y, weights)


def _write_history(path: Path, history: list[dict]):
    names = history_row_names()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in history:
            writer.writerow([repr(row[n]) if isinstance(row[n], float) else row[n]
                             for n in names])


def _finish_run(run_dir: Path, cfg: RunConfig, model: Model, result,
                data: ResolvedData, provenance: dict) -> Path:
    _write_history(run_dir / "history.csv", result.history)
    provenance = {**provenance, "epochs": len(result.history),
                  "best_epoch": result.best_epoch,
                  "best_val_f1": result.best_val_f1}
    save_checkpoint(model, provenance, run_dir / "best.ckpt", seed=cfg.seed)
    test_report = evaluate(model, data.loader("test", training=False))
    payload = {"split": "test", **test_report.to_dict()}
    (run_dir / "metrics.json").write_text(json.dumps(payload, indent=2,
                                                     sort_keys=True) + "\n")
    return run_dir


def _snapshot(cfg: RunConfig, run_dir: Path, extra: dict | None = None):
    data = config_to_dict(cfg)
    data["out_dir"] = str(run_dir)
    if extra:
        data = {**data, "_invocation": extra}
    (run_dir / "config.json").write_text(
        json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_train(cfg: RunConfig, log=None) -> Path:
    """Train from scratch per the config; returns the run directory."""
    data = resolve_data(cfg)
    run_dir = prepare_run_dir(cfg, f"train-{cfg.model.architecture}")
    _snapshot(cfg, run_dir)
    spec = ModelSpec(cfg.model.architecture, data.manifest.task,
                     cfg.model.hyperparams)
    model = build(spec, cfg.seed)
    result = train_model(model, data.loader("train", training=True),
                         data.loader("val", training=False),
                         _make_loss(cfg, data), cfg.optimizer, log=log)
    return _finish_run(run_dir, cfg, model, result, data,
                       {"source": data.manifest.name, "seed": cfg.seed})


def run_finetune(cfg: RunConfig, checkpoint_path: str | Path,
                 mode: FineTuneMode, log=None) -> Path:
    """Adapt a pretrained checkpoint's head to this dataset and fine-tune.

    The config's architecture and hyperparameters must match the checkpoint;
    mismatches fail before any training starts.
    """
    ckpt = load_checkpoint(checkpoint_path)
    if cfg.model.architecture.lower() != ckpt.spec.architecture.lower():
        raise ConfigError(
            f"config architecture {cfg.model.architecture!r} does not match "
            f"checkpoint architecture {ckpt.spec.architecture!r}")
    merged = {**ckpt.spec.hyperparams, **cfg.model.hyperparams}
    if merged != ckpt.spec.hyperparams:
        raise ConfigError(
            "config hyperparams conflict with the checkpoint; fine-tuning "
            f"must reuse {ckpt.spec.hyperparams}")
    data = resolve_data(cfg)
    run_dir = prepare_run_dir(cfg, f"finetune-{ckpt.spec.architecture}")
    _snapshot(cfg, run_dir, extra={"from_checkpoint": str(checkpoint_path),
                                   "mode": FineTuneMode(mode).value})
    model = adapt_head(ckpt, data.manifest.task, seed=cfg.seed)
    result = finetune(model, mode, data.loader("train", training=True),
                      data.loader("val", training=False),
                      _make_loss(cfg, data), cfg.optimizer, log=log)
    provenance = {"source": data.manifest.name,
                  "pretrained_on": ckpt.provenance.get("source", "none"),
                  "finetune_mode": FineTuneMode(mode).value, "seed": cfg.seed}
    return _finish_run(run_dir, cfg, model, result, data, provenance)


def run_evaluate(checkpoint_path: str | Path, cfg: RunConfig,
                 split: str = "test") -> dict:
    """Evaluate a checkpoint on a dataset split; returns the report dict."""
    ckpt = load_checkpoint(checkpoint_path)
    data = resolve_data(cfg)
    if ckpt.spec.task != data.manifest.task:
        raise ConfigError(
            f"checkpoint task {ckpt.spec.task.to_dict()} does not match "
            f"dataset task {data.manifest.task.to_dict()}")
    model = ckpt.to_model()
    report = evaluate(model, data.loader(split, training=False))
    return {"split": split, **report.to_dict()}


def run_sweep(base_cfg: RunConfig, grid: dict[str, list], log=None) -> Path:
    """Cartesian sweep of dotted-path overrides, sequential, shared seed.

    Each combination trains in its own subdirectory. Failures are recorded in
    the leaderboard and the sweep continues. The leaderboard is sorted by
    best validation F1, descending.
    """
    if not grid:
        raise ConfigError("sweep grid is empty")
    sweep_dir = prepare_run_dir(base_cfg, "sweep")
    keys = sorted(grid)
    rows = []
    for combo_idx, values in enumerate(itertools.product(*(grid[k] for k in keys))):
        overrides = dict(zip(keys, values))
        data = config_to_dict(base_cfg)
        for key, value in overrides.items():
            node = data
            parts = key.split(".")
            for p in parts[:-1]:
                node = node[p]
            node[parts[-1]] = value
        data["out_dir"] = str(sweep_dir / f"run-{combo_idx:03d}")
        row = {"run": f"run-{combo_idx:03d}",
               **{k: repr(v) for k, v in overrides.items()}}
        try:
            cfg = config_from_dict(RunConfig, data)
            run_dir = run_train(cfg, log=log)
            history = list(csv.DictReader(open(run_dir / "history.csv")))
            best_val_f1 = max(float(r["val_f1"]) for r in history)
            test = json.loads((run_dir / "metrics.json").read_text())
            row.update(status="ok", val_f1=best_val_f1, test_f1=test["f1"])
        except EcglearnError as e:
            row.update(status=f"failed: {e}", val_f1=float("-inf"),
                       test_f1=float("nan"))
        rows.append(row)
        if log:
            log(f"{row['run']}: {row['status']}")

    rows.sort(key=lambda r: -r["val_f1"])
    columns = ["run", *keys, "status", "val_f1", "test_f1"]
    with open(sweep_dir / "leaderboard.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    return sweep_dir


def run_report(run_dirs: list[str | Path], out_dir: str | Path,
               log=None) -> Path:
    """Aggregate completed runs into a metric table plus radial-plot data.

    Emits report.md and report.csv (rows = runs; columns = accuracy, F1, MAP,
    G-mean) and one radial-<run>.json per run with the comparison axes
    (AUC, sensitivity, specificity, PPV). Incomplete run directories are
    skipped with a warning.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = []
    for rd in run_dirs:
        rd = Path(rd)
        metrics_path = rd / "metrics.json"
        if not metrics_path.exists():
            if log:
                log(f"warning: {rd} has no metrics.json; skipped")
            continue
        metrics = json.loads(metrics_path.read_text())
        cfg = {}
        if (rd / "config.json").exists():
            cfg = json.loads((rd / "config.json").read_text())
        name = rd.name
        table.append({
            "run": name,
            "architecture": cfg.get("model", {}).get("architecture", "?"),
            "accuracy": metrics["accuracy"], "f1": metrics["f1"],
            "map": metrics["map"], "gmean": metrics["gmean"],
        })
        radial = {k: metrics[k] for k in RADIAL_KEYS}
        (out / f"radial-{name}.json").write_text(
            json.dumps(radial, indent=2, sort_keys=True) + "\n")

    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["run", "architecture", "accuracy",
                                                "f1", "map", "gmean"])
        writer.writeheader()
        writer.writerows(table)

    lines = ["| Run | Architecture | Acc | F1 | MAP | GM |",
             "|---|---|---|---|---|---|"]
    for row in table:
        lines.append(f"| {row['run']} | {row['architecture']} "
                     f"| {row['accuracy']:.4f} | {row['f1']:.4f} "
                     f"| {row['map']:.4f} | {row['gmean']:.4f} |")
    (out / "report.md").write_text("\n".join(lines) + "\n")
    return out
