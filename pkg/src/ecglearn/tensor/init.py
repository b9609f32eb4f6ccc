"""Parameter initializers.

He-uniform feeds ReLU/ELU stacks (conv and linear layers); Xavier-uniform is
used for recurrent and attention projections and for task heads. Bounds follow
the usual fan-based formulas; draws come from the caller's generator so a
fixed seed rebuilds bit-identical parameters.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["he_uniform", "xavier_uniform", "zeros", "ones"]


def he_uniform(shape, fan_in: int, rng: np.random.Generator, dtype) -> np.ndarray:
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def xavier_uniform(shape, fan_in: int, fan_out: int,
                   rng: np.random.Generator, dtype) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def zeros(shape, dtype) -> np.ndarray:
    return np.zeros(shape, dtype=dtype)


def ones(shape, dtype) -> np.ndarray:
    return np.ones(shape, dtype=dtype)
