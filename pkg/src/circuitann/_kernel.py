"""Compiled per-sample SGD loop over a flat parameter vector.

Parameters are packed layer by layer as ``W.ravel()`` followed by ``b``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sgd_cycles(params, sizes, x_all, t_all, orders, lr):
    n_layers = len(sizes) - 1
    width = 0
    for s in sizes:
        width = max(width, s)
    acts = np.zeros((n_layers + 1, width))
    delta = np.zeros(width)
    new_delta = np.zeros(width)
    w_off = np.zeros(n_layers, dtype=np.int64)
    b_off = np.zeros(n_layers, dtype=np.int64)
    off = 0
    for l in range(n_layers):
        w_off[l] = off
        off += sizes[l + 1] * sizes[l]
        b_off[l] = off
        off += sizes[l + 1]
    n_out = sizes[n_layers]
    losses = np.zeros(orders.shape[0])
    for c in range(orders.shape[0]):
        total = 0.0
        for k in range(orders.shape[1]):
            i = orders[c, k]
            for j in range(sizes[0]):
                acts[0, j] = x_all[i, j]
            for l in range(n_layers):
                n_in = sizes[l]
                for o in range(sizes[l + 1]):
                    z = params[b_off[l] + o]
                    base = w_off[l] + o * n_in
                    for j in range(n_in):
                        z += params[base + j] * acts[l, j]
                    acts[l + 1, o] = 1.0 / (1.0 + np.exp(-z))
            loss = 0.0
            for o in range(n_out):
                y = acts[n_layers, o]
                err = y - t_all[i, o]
                loss += err * err
                delta[o] = (2.0 / n_out) * err * y * (1.0 - y)
            total += loss / n_out
            for l in range(n_layers - 1, -1, -1):
                n_in = sizes[l]
                n_o = sizes[l + 1]
                if l > 0:
                    for j in range(n_in):
                        s = 0.0
                        for o in range(n_o):
                            s += params[w_off[l] + o * n_in + j] * delta[o]
                        a = acts[l, j]
                        new_delta[j] = s * a * (1.0 - a)
                for o in range(n_o):
                    g = lr * delta[o]
                    base = w_off[l] + o * n_in
                    for j in range(n_in):
                        params[base + j] -= g * acts[l, j]
                    params[b_off[l] + o] -= g
                if l > 0:
                    for j in range(n_in):
                        delta[j] = new_delta[j]
        losses[c] = total / orders.shape[1]
    return losses
