"""Forward and backward passes for the network building blocks.

Every ``*_forward`` returns its output plus a cache; the matching
``*_backward`` takes the cache and the upstream gradient and returns the
input gradient together with parameter gradients. Arrays are float64.
"""

from __future__ import annotations

import numpy as np


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def log_softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = v - v.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.exp(log_softmax(v, axis))


def cross_entropy(scores: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed negative log-likelihood of ``targets`` under row-wise softmax, and d/dscores."""
    logp = log_softmax(scores)
    rows = np.arange(len(targets))
    grad = np.exp(logp)
    grad[rows, targets] -= 1.0
    return float(-logp[rows, targets].sum()), grad


# --- single-layer perceptron with ELU -------------------------------------


def mlp_forward(x, W, b):
    z = x @ W + b
    return elu(z), (x, z)


def mlp_backward(dy, cache, W):
    x, z = cache
    dz = dy * elu_grad(z)
    return dz @ W.T, x.T @ dz, dz.sum(axis=0)


# --- LSTM ------------------------------------------------------------------
# Gates are packed as [input, forget, output, candidate] along the last axis.
# Wx: (d_in, 4H), Wh: (H, 4H), b: (4H,)


def lstm_step(x, h, c, Wx, Wh, b):
    H = h.shape[-1]
    z = x @ Wx + h @ Wh + b
    gates = sigmoid(z[: 3 * H])
    i, f, o = gates[:H], gates[H : 2 * H], gates[2 * H :]
    g = np.tanh(z[3 * H :])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def lstm_forward(X, Wx, Wh, b, h0=None, c0=None):
    """Run an LSTM over the rows of ``X`` (T, d_in). Returns hidden states (T, H)."""
    T = X.shape[0]
    H = Wh.shape[0]
    h = np.zeros(H) if h0 is None else h0
    c = np.zeros(H) if c0 is None else c0
    xw = X @ Wx + b
    hs = np.empty((T, H))
    cs = np.empty((T, H))
    gates = np.empty((T, 4 * H))
    h_prev = np.empty((T, H))
    c_prev = np.empty((T, H))
    for t in range(T):
        z = xw[t] + h @ Wh
        i = sigmoid(z[:H])
        f = sigmoid(z[H : 2 * H])
        o = sigmoid(z[2 * H : 3 * H])
        g = np.tanh(z[3 * H :])
        h_prev[t] = h
        c_prev[t] = c
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :H] = i
        gates[t, H : 2 * H] = f
        gates[t, 2 * H : 3 * H] = o
        gates[t, 3 * H :] = g
        hs[t] = h
        cs[t] = c
    return hs, (X, gates, cs, h_prev, c_prev)


def lstm_backward(dH, cache, Wx, Wh):
    """Backpropagate ``dH`` (T, H). Returns dX, dWx, dWh, db."""
    X, gates, cs, h_prev, c_prev = cache
    T, H = dH.shape
    dz = np.empty((T, 4 * H))
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in range(T - 1, -1, -1):
        i = gates[t, :H]
        f = gates[t, H : 2 * H]
        o = gates[t, 2 * H : 3 * H]
        g = gates[t, 3 * H :]
        tc = np.tanh(cs[t])
        dh = dH[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz[t, :H] = dc * g * i * (1.0 - i)
        dz[t, H : 2 * H] = dc * c_prev[t] * f * (1.0 - f)
        dz[t, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
        dz[t, 3 * H :] = dc * i * (1.0 - g * g)
        dh_next = dz[t] @ Wh.T
        dc_next = dc * f
    return dz @ Wx.T, X.T @ dz, h_prev.T @ dz, dz.sum(axis=0)


# --- character convolution with max pooling --------------------------------


def char_conv_forward(E, W, b, window):
    """Convolve a word's character embeddings ``E`` (L, d) and max-pool to (F,).

    The sequence is zero-padded so every character is the centre of one window.
    """
    L, d = E.shape
    pad = (window - 1) // 2
    padded = np.zeros((L + window - 1, d))
    padded[pad : pad + L] = E
    U = np.stack([padded[t : t + window].reshape(-1) for t in range(L)])
    conv = U @ W + b
    arg = conv.argmax(axis=0)
    return conv[arg, np.arange(conv.shape[1])], (U, arg, L, d, pad)


def char_conv_backward(dy, cache, W, window):
    U, arg, L, d, pad = cache
    dconv = np.zeros((L, W.shape[1]))
    dconv[arg, np.arange(W.shape[1])] = dy
    dW = U.T @ dconv
    db = dconv.sum(axis=0)
    dU = (dconv @ W.T).reshape(L, window, d)
    dpadded = np.zeros((L + window - 1, d))
    for t in range(L):
        dpadded[t : t + window] += dU[t]
    return dpadded[pad : pad + L], dW, db


# --- biaffine scoring -------------------------------------------------------


def biaffine_forward(F1, F2, W, u, v, b):
    """Scores ``F1[t] W F2[j] + u.F1[t] + v.F2[j] + b`` for all (t, j)."""
    return F1 @ W @ F2.T + (F1 @ u)[:, None] + (F2 @ v)[None, :] + b


def biaffine_backward(dV, F1, F2, W, u, v):
    """Returns dF1, dF2, dW, du, dv, db."""
    row = dV.sum(axis=1)
    col = dV.sum(axis=0)
    dF1 = dV @ F2 @ W.T + row[:, None] * u
    dF2 = dV.T @ F1 @ W + col[:, None] * v
    return dF1, dF2, F1.T @ dV @ F2, F1.T @ row, F2.T @ col, dV.sum()


def label_biaffine_forward(G1, G2, W, U, V, b):
    """Per-label scores for K paired rows: (K, d) x (K, d) -> (K, L)."""
    return np.einsum("kd,lde,ke->kl", G1, W, G2) + G1 @ U.T + G2 @ V.T + b


def label_biaffine_backward(dS, G1, G2, W, U, V):
    """Returns dG1, dG2, dW, dU, dV, db."""
    dG1 = np.einsum("kl,lde,ke->kd", dS, W, G2) + dS @ U
    dG2 = np.einsum("kl,lde,kd->ke", dS, W, G1) + dS @ V
    dW = np.einsum("kl,kd,ke->lde", dS, G1, G2)
    return dG1, dG2, dW, dS.T @ G1, dS.T @ G2, dS.sum(axis=0)
