"""Task descriptions and label vectors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DataError

__all__ = ["TaskKind", "TaskSpec", "LabelVector"]

_NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class TaskKind(str, Enum):
    MULTILABEL = "multilabel"
    MULTICLASS = "multiclass"
    BINARY = "binary"


@dataclass(frozen=True)
class TaskSpec:
    """Classification task shape: kind plus the ordered class vocabulary."""

    kind: TaskKind
    classes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", TaskKind(self.kind))
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.k < 1:
            raise DataError("task needs at least one class")
        if self.kind is TaskKind.BINARY and self.k != 1:
            raise DataError(f"binary task must have exactly 1 class, got {self.k}")
        if self.kind is TaskKind.MULTICLASS and self.k < 2:
            raise DataError("multiclass task needs >= 2 classes")
        if len(set(self.classes)) != self.k:
            raise DataError("class names must be unique")
        for name in self.classes:
            if not _NAME_RE.match(name):
                raise DataError(f"class name {name!r} contains unsupported characters")

    @property
    def k(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "classes": list(self.classes)}

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(kind=TaskKind(d["kind"]), classes=tuple(d["classes"]))


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Binary activation vector over a task's classes."""

    task: TaskSpec
    values: np.ndarray

    def __eq__(self, other) -> bool:
        return (isinstance(other, LabelVector) and self.task == other.task
                and np.array_equal(self.values, other.values))

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int8)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.task.k,):
            raise DataError(
                f"label vector shape {vals.shape} does not match k={self.task.k}")
        if not np.all((vals == 0) | (vals == 1)):
            raise DataError("label values must be 0/1")
        if self.task.kind is TaskKind.MULTICLASS and vals.sum() != 1:
            raise DataError("multiclass label must have exactly one active class")

    def active_classes(self) -> list[str]:
        return [c for c, v in zip(self.task.classes, self.values) if v]

    def encode(self) -> str:
        """Pipe-joined active class names; empty string when none are active."""
        return "|".join(self.active_classes())

    @staticmethod
    def decode(text: str, task: TaskSpec) -> "LabelVector":
        values = np.zeros(task.k, dtype=np.int8)
        text = text.strip()
        if text:
            index = {c: i for i, c in enumerate(task.classes)}
            for name in text.split("|"):
                if name not in index:
                    raise DataError(f"unknown class {name!r} in label string {text!r}")
                values[index[name]] = 1
        return LabelVector(task=task, values=values)
