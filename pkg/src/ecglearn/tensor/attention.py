"""Scaled dot-product multi-head attention."""

from __future__ import annotations

import math

from ..errors import ShapeError
from .functional import linear, softmax
from .tensor import Tensor

__all__ = ["multihead_attention"]


def multihead_attention(q: Tensor, k: Tensor, v: Tensor, num_heads: int,
                        wq: Tensor, bq: Tensor, wk: Tensor, bk: Tensor,
                        wv: Tensor, bv: Tensor, wo: Tensor, bo: Tensor) -> Tensor:
    """Attention over [B, T, E] sequences; output has the query's shape.

    Queries/keys/values are projected per head, attention weights are
    softmax(QK^T / sqrt(d)) per head, and head outputs are concatenated and
    projected back to E. Embed dim E must be divisible by num_heads.
    """
    if q.ndim != 3 or k.ndim != 3 or v.ndim != 3:
        raise ShapeError(
            f"attention expects [B,T,E] inputs, got {q.shape}, {k.shape}, {v.shape}")
    B, Tq, E = q.shape
    if k.shape[-1] != E or v.shape[-1] != E:
        raise ShapeError(
            f"attention requires a shared embed dim, got {q.shape[-1]}, "
            f"{k.shape[-1]}, {v.shape[-1]}")
    if k.shape[1] != v.shape[1]:
        raise ShapeError(f"key/value lengths differ: {k.shape[1]} vs {v.shape[1]}")
    if E % num_heads != 0:
        raise ShapeError(f"embed dim {E} not divisible by {num_heads} heads")
    d = E // num_heads
    Tk = k.shape[1]

    def split_heads(t: Tensor, T: int) -> Tensor:
        return t.reshape(B, T, num_heads, d).transpose(0, 2, 1, 3)

    qh = split_heads(linear(q, wq, bq), Tq)            # [B, h, Tq, d]
    kh = split_heads(linear(k, wk, bk), Tk)
    vh = split_heads(linear(v, wv, bv), Tk)

    scores = (qh @ kh.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(d))
    weights = softmax(scores, axis=-1)                 # [B, h, Tq, Tk]
    ctx = weights @ vh                                 # [B, h, Tq, d]
    merged = ctx.transpose(0, 2, 1, 3).reshape(B, Tq, E)
    return linear(merged, wo, bo)
