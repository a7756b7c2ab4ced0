"""Layer helpers shared by the taggers and relation classifiers."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .tensor import Rng, Tensor, concat, glorot, parameter, sigmoid, stack, tanh


def init_linear(params: dict, prefix: str, n_in: int, n_out: int, rng: Rng) -> None:
    params[f"{prefix}.W"] = parameter(glorot(rng, n_in, n_out))
    params[f"{prefix}.b"] = parameter(np.zeros(n_out))


def linear(params: dict, prefix: str, x: Tensor) -> Tensor:
    W, b = params[f"{prefix}.W"], params[f"{prefix}.b"]
    return x @ W + b.expand(x.shape[0], b.shape[0])


def init_lstm(params: dict, prefix: str, n_in: int, hidden: int, rng: Rng) -> None:
    """Gate order along the 4H axis: input, forget, cell candidate, output."""
    params[f"{prefix}.Wx"] = parameter(glorot(rng, n_in, 4 * hidden))
    params[f"{prefix}.Wh"] = parameter(glorot(rng, hidden, 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    params[f"{prefix}.b"] = parameter(b)


def init_bilstm(params: dict, prefix: str, n_in: int, hidden: int, rng: Rng) -> None:
    init_lstm(params, f"{prefix}.fwd", n_in, hidden, rng.child(f"{prefix}.fwd"))
    init_lstm(params, f"{prefix}.bwd", n_in, hidden, rng.child(f"{prefix}.bwd"))


def _input_projection(params: dict, prefix: str, x: Tensor) -> Tensor:
    B, L, D = x.shape
    Wx, b = params[f"{prefix}.Wx"], params[f"{prefix}.b"]
    proj = x.reshape(B * L, D) @ Wx + b.expand(B * L, b.shape[0])
    return proj.reshape(B, L, Wx.shape[1])


def lstm_scan(
    params: dict,
    prefix: str,
    x: Tensor,
    reverse: bool = False,
    mask: Optional[np.ndarray] = None,
) -> list:
    """Run one LSTM direction over ``x`` [B, L, D]; returns per-position states.

    With ``mask`` [B, L] (1 = real step) padded steps carry the previous state
    forward unchanged, so the state at the last position is the final state of
    each row. Padding must sit at the end of each row.
    """
    B, L, _ = x.shape
    Wh = params[f"{prefix}.Wh"]
    H = Wh.shape[0]
    xw = _input_projection(params, prefix, x)
    h = Tensor(np.zeros((B, H)))
    c = Tensor(np.zeros((B, H)))
    states: list = [None] * L
    steps = range(L - 1, -1, -1) if reverse else range(L)
    for t in steps:
        gates = xw[:, t, :] + h @ Wh
        i = sigmoid(gates[:, :H])
        f = sigmoid(gates[:, H:2 * H])
        g = tanh(gates[:, 2 * H:3 * H])
        o = sigmoid(gates[:, 3 * H:])
        c_new = f * c + i * g
        h_new = o * tanh(c_new)
        if mask is None:
            c, h = c_new, h_new
        else:
            m = Tensor(np.repeat(mask[:, t:t + 1].astype(np.float64), H, axis=1))
            c = c + m * (c_new - c)
            h = h + m * (h_new - h)
        states[t] = h
    return states


def bilstm_encode(params: dict, prefix: str, x: Tensor, combine: str = "concat") -> Tensor:
    """Bidirectional LSTM over equal-length rows: [B, L, D] -> [B, L, 2H] (or [B, L, H] summed).

    A single sequence [L, D] is also accepted and gives [L, 2H].
    """
    if x.ndim == 2:
        out = bilstm_encode(params, prefix, x.reshape(1, *x.shape), combine)
        return out.reshape(*out.shape[1:])
    fwd = lstm_scan(params, f"{prefix}.fwd", x)
    bwd = lstm_scan(params, f"{prefix}.bwd", x, reverse=True)
    if combine == "concat":
        per_step = [concat([f, b], axis=1) for f, b in zip(fwd, bwd)]
    elif combine == "sum":
        per_step = [f + b for f, b in zip(fwd, bwd)]
    else:
        raise ValueError(f"unknown combine mode {combine!r}")
    return stack(per_step, axis=1)


def window_indices(n_rows: int, length: int, width: int) -> np.ndarray:
    """Row indices of every width-``width`` window in a [n_rows, length] layout, flattened rows."""
    starts = np.arange(length - width + 1)
    offs = starts[:, None] + np.arange(width)[None, :]
    base = (np.arange(n_rows) * length)[:, None, None]
    return base + offs[None, :, :]
