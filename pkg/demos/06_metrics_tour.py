"""The evaluation metric suite on worked examples you can check by hand.

Run:  python demos/06_metrics_tour.py
"""

import math

import numpy as np

from ecglearn import TaskKind, compute_metrics
from ecglearn.learn import auc_score, average_precision

print("=== average precision on a ranked list ===")
scores = np.array([6.0, 5.0, 4.0, 3.0, 2.0, 1.0])
relevance = np.array([1, 0, 1, 1, 0, 0])
ap = average_precision(scores, relevance)
print(f"relevance by rank {relevance.tolist()}")
print(f"AP = (1/1 + 2/3 + 3/4) / 3 = {ap:.4f}")

print("\n=== AUC with ties counted one half ===")
scores = np.array([1.0, 1.0, 0.0, 0.0])
targets = np.array([1, 0, 1, 0])
print(f"scores {scores.tolist()}, targets {targets.tolist()} "
      f"-> AUC {auc_score(scores, targets):.3f}")

print("\n=== a binary confusion worked through ===")
# 5 positives (4 found), 10 negatives (9 correct)
targets = np.array([1] * 5 + [0] * 10)[:, None]
pred = np.array([1, 1, 1, 1, 0] + [0] * 9 + [1])[:, None].astype(float)
report = compute_metrics(pred, targets, TaskKind.BINARY,
                         class_names=("positive",))
print(f"sensitivity {report.sensitivity:.2f}  specificity "
      f"{report.specificity:.2f}  ppv {report.ppv:.2f}")
print(f"G-mean = sqrt(0.8 * 0.9) = {math.sqrt(0.72):.4f} "
      f"(reported {report.gmean:.4f})")

print("\n=== multi-label report with an undefined class ===")
rng = np.random.default_rng(0)
scores = rng.random((8, 3))
targets = (rng.random((8, 3)) < 0.5).astype(np.int8)
targets[:, 2] = 0  # class c never occurs: AP/AUC undefined for it
report = compute_metrics(scores, targets, TaskKind.MULTILABEL,
                         class_names=("a", "b", "c"))
print(f"macro F1 {report.f1:.3f}, MAP {report.map:.3f} "
      f"(class c excluded), warnings:")
for w in report.warnings:
    print(f"  - {w}")
