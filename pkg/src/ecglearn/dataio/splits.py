"""Split protocols: fixed fold conventions and stratified k-fold assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SplitError
from ..seeding import substream
from .manifest import DatasetManifest

__all__ = ["SplitPlan", "ptbxl_split", "split_indices", "stratified_kfold"]


@dataclass(frozen=True)
class SplitPlan:
    train_folds: frozenset[int]
    val_folds: frozenset[int]
    test_folds: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "train_folds", frozenset(self.train_folds))
        object.__setattr__(self, "val_folds", frozenset(self.val_folds))
        object.__setattr__(self, "test_folds", frozenset(self.test_folds))
        groups = [self.train_folds, self.val_folds, self.test_folds]
        total = sum(len(g) for g in groups)
        if len(self.train_folds | self.val_folds | self.test_folds) != total:
            raise SplitError("train/val/test folds must be disjoint")
        if not all(groups):
            raise SplitError("every split needs at least one fold")

    def all_folds(self) -> frozenset[int]:
        return self.train_folds | self.val_folds | self.test_folds


def ptbxl_split(manifest: DatasetManifest) -> SplitPlan:
    """The 10-fold benchmark convention: folds 1-8 train, 9 validation, 10 test."""
    folds = set(int(f) for f in manifest.folds())
    if not folds:
        raise SplitError("manifest has no records")
    bad = folds - set(range(1, 11))
    if bad:
        raise SplitError(f"fold ids outside 1..10: {sorted(bad)}")
    return SplitPlan(train_folds=frozenset(range(1, 9)),
                     val_folds=frozenset({9}), test_folds=frozenset({10}))


def split_indices(manifest: DatasetManifest, plan: SplitPlan) -> dict[str, list[int]]:
    """Row indices per split; every record must land in exactly one split."""
    folds = manifest.folds()
    unassigned = set(int(f) for f in folds) - set(plan.all_folds())
    if unassigned:
        raise SplitError(f"records carry folds not covered by the plan: "
                         f"{sorted(unassigned)}")
    out = {"train": [], "val": [], "test": []}
    for i, f in enumerate(folds):
        f = int(f)
        if f in plan.train_folds:
            out["train"].append(i)
        elif f in plan.val_folds:
            out["val"].append(i)
        else:
            out["test"].append(i)
    return out


def stratified_kfold(label_matrix: np.ndarray, k: int = 10, seed: int = 0,
                     class_names: tuple[str, ...] | None = None) -> np.ndarray:
    """Assign fold ids 1..k so every class is represented in every fold.

    Greedy iterative stratification: classes are processed rarest first, and
    each record goes to the fold with the fewest examples of that class
    (ties broken by smallest fold total, then by seeded randomness). For
    disjoint single-label data this yields per-class fold counts that differ
    by at most one. Requires >= k positives per class.
    """
    labels = np.asarray(label_matrix)
    n, n_classes = labels.shape
    counts = labels.sum(axis=0)
    for c in range(n_classes):
        if counts[c] < k:
            name = class_names[c] if class_names else f"class {c}"
            raise SplitError(
                f"{name} has only {int(counts[c])} positive examples; "
                f"stratified {k}-fold needs at least {k}")

    rng = substream(seed, "stratified_kfold")
    assignment = np.zeros(n, dtype=np.int64)  # 0 = unassigned
    per_class = np.zeros((k, n_classes), dtype=np.int64)
    totals = np.zeros(k, dtype=np.int64)

    def assign(idx: int, fold: int):
        assignment[idx] = fold + 1
        per_class[fold] += labels[idx]
        totals[fold] += 1

    order = np.argsort(counts, kind="stable")  # rarest class first
    for c in order:
        members = [i for i in np.flatnonzero(labels[:, c]) if assignment[i] == 0]
        members = [members[j] for j in rng.permutation(len(members))]
        for idx in members:
            jitter = rng.random(k)
            fold = min(range(k), key=lambda f: (per_class[f, c], totals[f], jitter[f]))
            assign(idx, fold)
    # records with no active labels balance fold totals
    for idx in np.flatnonzero(assignment == 0):
        jitter = rng.random(k)
        fold = min(range(k), key=lambda f: (totals[f], jitter[f]))
        assign(idx, fold)

    for c in range(n_classes):
        fold_counts = np.array([
            labels[assignment == f + 1, c].sum() for f in range(k)])
        if fold_counts.min() < 1:
            name = class_names[c] if class_names else f"class {c}"
            raise SplitError(
                f"could not place {name} in every fold (label overlap is too "
                "adversarial); counts per fold: " + str(fold_counts.tolist()))
    return assignment
