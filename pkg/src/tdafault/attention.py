"""Scaled dot-product attention and its temporal-decomposition variant.

These are the reference numpy implementations of the two attention rules.
The standard rule is ``softmax(Q K^T / sqrt(d_k)) V``.  The decomposition
variant runs two parallel attentions over trend-derived and seasonal-derived
value matrices, each with its own positive per-key temporal bias multiplying
the raw score columns before scaling, and sums the two outputs:

    out = softmax((Q K^T) o a_trend / sqrt(d_k)) V_trend
        + softmax((Q K^T) o a_season / sqrt(d_k)) V_season

where ``o`` scales score column ``j`` by ``a[j]`` (bias indexed by key
position).  With both biases at 1 the rule collapses to standard attention
over ``V_trend + V_season``.

The trainable encoder in :mod:`tdafault.model` mirrors these formulas with
autodiff ops; tests hold the two routes together.
"""

from __future__ import annotations

import numpy as np

__all__ = ["attention_standard", "attention_tda", "attention_weights"]


def _as_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def _softmax_rows(s: np.ndarray) -> np.ndarray:
    shifted = s - s.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def attention_weights(q, k, alpha=None) -> np.ndarray:
    """Row-stochastic attention weight matrix, optionally with a key bias.

    ``alpha``, when given, multiplies score column ``j`` by ``alpha[j]``
    before the ``1/sqrt(d_k)`` scaling.
    """
    q = _as_matrix(q, "Q")
    k = _as_matrix(k, "K")
    if q.shape[1] != k.shape[1]:
        raise ValueError(f"Q/K width mismatch: {q.shape} vs {k.shape}")
    scores = q @ k.T
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.shape != (k.shape[0],):
            raise ValueError(
                f"bias must have one entry per key, got shape {alpha.shape} "
                f"for {k.shape[0]} keys"
            )
        if np.any(alpha <= 0):
            raise ValueError("temporal bias entries must be strictly positive")
        scores = scores * alpha[None, :]
    return _softmax_rows(scores / np.sqrt(q.shape[1]))


def attention_standard(q, k, v) -> np.ndarray:
    """Scaled dot-product attention ``softmax(Q K^T / sqrt(d_k)) V``."""
    q = _as_matrix(q, "Q")
    k = _as_matrix(k, "K")
    v = _as_matrix(v, "V")
    if k.shape[0] != v.shape[0]:
        raise ValueError(f"K/V row mismatch: {k.shape} vs {v.shape}")
    return attention_weights(q, k) @ v


def attention_tda(q, k, v_trend, v_season, alpha_trend, alpha_season) -> np.ndarray:
    """Temporal-decomposition attention: biased trend + seasonal branches.

    Parameters
    ----------
    q, k : (T, d_k) arrays
    v_trend, v_season : (T, d_v) arrays
        Value matrices derived from the trend and seasonal channels.
    alpha_trend, alpha_season : (T,) arrays
        Strictly positive per-key temporal biases.
    """
    q = _as_matrix(q, "Q")
    k = _as_matrix(k, "K")
    v_trend = _as_matrix(v_trend, "V_trend")
    v_season = _as_matrix(v_season, "V_season")
    if v_trend.shape != v_season.shape:
        raise ValueError(f"value shape mismatch: {v_trend.shape} vs {v_season.shape}")
    if k.shape[0] != v_trend.shape[0]:
        raise ValueError(f"K/V row mismatch: {k.shape} vs {v_trend.shape}")
    w_trend = attention_weights(q, k, alpha_trend)
    w_season = attention_weights(q, k, alpha_season)
    return w_trend @ v_trend + w_season @ v_season
