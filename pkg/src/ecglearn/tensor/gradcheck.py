"""Finite-difference verification of autodiff gradients.

Central differences at double precision with step h have truncation error
O(h^2) and roundoff error ~eps/h, so h = 1e-5 keeps both far below the 1e-4
relative tolerance used throughout. Per-element relative error is
|a - n| / max(|a|, |n|, 1e-6); the floor keeps true-zero gradients from
being flagged by finite-difference noise while still exposing real errors at
small magnitudes.

These checks are meaningless at single precision, so inputs and parameters
must be float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import AutodiffError
from .tensor import Tensor, no_grad

__all__ = ["GradcheckReport", "gradcheck", "param_gradcheck"]

_ERR_FLOOR = 1e-6


@dataclass
class GradcheckReport:
    max_rel_err: float
    worst_index: tuple
    n_checked: int
    tol: float
    per_param: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol


def _rel_err(a: float, n: float) -> float:
    return abs(a - n) / max(abs(a), abs(n), _ERR_FLOOR)


def _check_deterministic(evaluate: Callable[[], np.ndarray]) -> np.ndarray:
    y1 = evaluate()
    y2 = evaluate()
    if y1.shape != y2.shape or not np.array_equal(y1, y2):
        raise AutodiffError(
            "function is stochastic; freeze dropout and any other random op "
            "before running gradcheck")
    return y1


def _scalar_guard(y: Tensor):
    if y.size != 1:
        raise AutodiffError(
            f"gradcheck needs a scalar output, got shape {y.shape}; "
            "reduce with sum() or mean() first")


def _sample_indices(n: int, max_elements, rng) -> np.ndarray:
    if max_elements is None or n <= max_elements:
        return np.arange(n)
    rng = rng or np.random.default_rng(0)
    return np.sort(rng.choice(n, size=max_elements, replace=False))


def gradcheck(f: Callable[[Tensor], Tensor], x: Tensor, tol: float = 1e-4,
              step: float = 1e-5, max_elements: int | None = None,
              rng: np.random.Generator | None = None) -> GradcheckReport:
    """Compare autodiff dF/dx against central finite differences, per element."""
    if x.dtype != np.float64:
        raise AutodiffError(
            f"gradcheck requires float64 input, got {x.dtype}; "
            "finite differences are unreliable at single precision")

    with no_grad():
        y0 = _check_deterministic(lambda: f(Tensor(x.data.copy())).data.copy())
    if y0.size != 1:
        _scalar_guard(Tensor(y0))

    xt = Tensor(x.data.copy(), requires_grad=True)
    y = f(xt)
    _scalar_guard(y)
    y.backward()
    analytic = xt.grad if xt.grad is not None else np.zeros_like(x.data)

    flat = x.data.reshape(-1)
    idxs = _sample_indices(flat.size, max_elements, rng)
    worst = (0.0, ())
    for i in idxs:
        base = flat[i]
        probe = x.data.copy()
        pflat = probe.reshape(-1)
        with no_grad():
            pflat[i] = base + step
            fp = float(f(Tensor(probe.copy())).data)
            pflat[i] = base - step
            fm = float(f(Tensor(probe.copy())).data)
        numeric = (fp - fm) / (2.0 * step)
        err = _rel_err(float(analytic.reshape(-1)[i]), numeric)
        if err > worst[0]:
            worst = (err, np.unravel_index(i, x.shape))
    return GradcheckReport(worst[0], worst[1], len(idxs), tol)


def param_gradcheck(loss_fn: Callable[[], Tensor], parameters: dict,
                    tol: float = 1e-4, step: float = 1e-5,
                    samples_per_param: int = 4,
                    rng: np.random.Generator | None = None) -> GradcheckReport:
    """Finite-difference check of dLoss/dParam for a dict of named parameters.

    ``loss_fn`` evaluates the scalar loss with the parameters' current
    values; it must be deterministic. Large parameters are spot-checked at
    ``samples_per_param`` random coordinates.
    """
    rng = rng or np.random.default_rng(0)
    for name, p in parameters.items():
        if p.dtype != np.float64:
            raise AutodiffError(
                f"param_gradcheck requires float64 parameters; {name!r} is {p.dtype}")

    with no_grad():
        _check_deterministic(lambda: loss_fn().data.copy())

    for p in parameters.values():
        p.grad = None
    loss = loss_fn()
    _scalar_guard(loss)
    loss.backward()

    worst = (0.0, ())
    per_param = {}
    n_checked = 0
    for name, p in parameters.items():
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        idxs = _sample_indices(flat.size, samples_per_param, rng)
        pmax = 0.0
        for i in idxs:
            base = flat[i]
            with no_grad():
                flat[i] = base + step
                fp = float(loss_fn().data)
                flat[i] = base - step
                fm = float(loss_fn().data)
                flat[i] = base
            numeric = (fp - fm) / (2.0 * step)
            err = _rel_err(float(analytic.reshape(-1)[i]), numeric)
            pmax = max(pmax, err)
            if err > worst[0]:
                worst = (err, (name, int(i)))
            n_checked += 1
        per_param[name] = pmax
    return GradcheckReport(worst[0], worst[1], n_checked, tol, per_param)
