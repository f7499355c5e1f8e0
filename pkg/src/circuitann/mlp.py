"""Feed-forward sigmoid network trained by per-sample back-propagation.

Every layer, the output layer included, applies the logistic function, so
predictions live in (0, 1). The loss of one sample is the squared error
averaged over the outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernel import sgd_cycles
from .circuits import ArchitectureSpec

__all__ = [
    "NetworkWeights",
    "TrainConfig",
    "TrainReport",
    "backprop_step",
    "default_cycles",
    "forward",
    "forward_batch",
    "gradient_check",
    "gradients",
    "init_network",
    "load_weights",
    "mse",
    "save_weights",
    "sigmoid",
    "train",
]

INIT_SCALE = 0.5
DEFAULT_LEARNING_RATE = 0.25


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class NetworkWeights:
    """Layer-ordered ``(W, b)`` pairs; ``W`` has shape (out, in)."""

    arch: ArchitectureSpec
    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        sizes = self.arch.sizes
        if len(self.layers) != len(sizes) - 1:
            raise ValueError("layer count does not match architecture")
        for (w, b), n_in, n_out in zip(self.layers, sizes[:-1], sizes[1:]):
            if np.shape(w) != (n_out, n_in) or np.shape(b) != (n_out,):
                raise ValueError(
                    f"layer shape {np.shape(w)}/{np.shape(b)} does not match {n_out}x{n_in}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("weights must be finite")

    def copy(self) -> "NetworkWeights":
        return NetworkWeights(self.arch, tuple((w.copy(), b.copy()) for w, b in self.layers))

    def flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in self.layers])

    def equals(self, other: "NetworkWeights") -> bool:
        return self.arch == other.arch and all(
            np.array_equal(w1, w2) and np.array_equal(b1, b2)
            for (w1, b1), (w2, b2) in zip(self.layers, other.layers)
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    cycles: int | None = None
    seed: int = 0
    shuffle_each_cycle: bool = True

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.cycles is not None and self.cycles < 1:
            raise ValueError("cycles must be at least 1")


@dataclass
class TrainReport:
    loss_per_cycle: list[float] = field(default_factory=list)
    final_loss: float = float("nan")
    initial_loss: float = float("nan")


def default_cycles(n_samples: int) -> int:
    """At least 500 cycles and at least ten passes per training sample."""
    return max(500, 10 * n_samples)


def init_network(arch: ArchitectureSpec, seed: int) -> NetworkWeights:
    rng = np.random.default_rng(seed)
    sizes = arch.sizes
    layers = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_out, n_in))
        b = rng.uniform(-INIT_SCALE, INIT_SCALE, size=n_out)
        layers.append((w, b))
    return NetworkWeights(arch, tuple(layers))


def _check_input(net: NetworkWeights, x: np.ndarray):
    if x.shape[-1] != net.arch.input_count:
        raise ValueError(f"expected {net.arch.input_count} inputs, got {x.shape[-1]}")


def forward(net: NetworkWeights, x: Sequence[float]) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError("forward takes a single feature vector; use forward_batch")
    _check_input(net, a)
    for w, b in net.layers:
        a = sigmoid(w @ a + b)
    return a


def forward_batch(net: NetworkWeights, x) -> np.ndarray:
    a = np.atleast_2d(np.asarray(x, dtype=float))
    _check_input(net, a)
    for w, b in net.layers:
        a = sigmoid(a @ w.T + b)
    return a


def mse(net: NetworkWeights, x, t) -> float:
    """Mean over samples of the per-sample loss."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if len(t) == 0:
        return float("nan")
    y = forward_batch(net, x)
    return float(np.mean((y - t) ** 2))


def _gradients(layers, x, t):
    acts = [x]
    a = x
    for w, b in layers:
        a = sigmoid(w @ a + b)
        acts.append(a)
    y = acts[-1]
    err = y - t
    loss = float(err @ err) / len(t)
    delta = (2.0 / len(t)) * err * y * (1.0 - y)
    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        a_prev = acts[i]
        grads[i] = (np.outer(delta, a_prev), delta)
        if i:
            delta = (layers[i][0].T @ delta) * a_prev * (1.0 - a_prev)
    return loss, grads


def _as_sample(net, features, targets):
    x = np.asarray(features, dtype=float)
    t = np.asarray(targets, dtype=float)
    _check_input(net, x)
    if t.shape != (net.arch.output_count,):
        raise ValueError(f"expected {net.arch.output_count} targets, got {t.shape}")
    return x, t


def gradients(net: NetworkWeights, features, targets):
    """Loss and per-layer ``(dW, db)`` of one sample."""
    x, t = _as_sample(net, features, targets)
    return _gradients(net.layers, x, t)


def backprop_step(net: NetworkWeights, features, targets, lr: float):
    """One gradient-descent step on one sample.

    Returns ``(updated_net, loss)`` where ``loss`` is measured before the
    update; ``net`` itself is left untouched.
    """
    x, t = _as_sample(net, features, targets)
    loss, grads = _gradients(net.layers, x, t)
    layers = tuple((w - lr * gw, b - lr * gb) for (w, b), (gw, gb) in zip(net.layers, grads))
    return NetworkWeights(net.arch, layers), loss


def _unflatten(arch: ArchitectureSpec, params: np.ndarray):
    sizes = arch.sizes
    layers, off = [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = params[off:off + n_out * n_in].reshape(n_out, n_in).copy()
        off += n_out * n_in
        b = params[off:off + n_out].copy()
        off += n_out
        layers.append((w, b))
    return tuple(layers)


def cycle_order(seed: int, cycle: int, n: int, shuffle: bool) -> np.ndarray:
    """Presentation order of cycle ``cycle``; independent of earlier cycles."""
    if not shuffle:
        return np.arange(n)
    return np.random.default_rng([seed, cycle]).permutation(n)


def train(net: NetworkWeights, train_set, cfg: TrainConfig = TrainConfig(), start_cycle: int = 0):
    """Stochastic back-propagation over ``train_set``.

    ``train_set`` is anything with ``features`` and ``targets`` arrays.
    Shuffling for cycle ``k`` is seeded by ``(cfg.seed, k)``, so resuming
    from saved weights with ``start_cycle=k`` continues the same stream.
    """
    x_all = np.asarray(train_set.features, dtype=float)
    t_all = np.asarray(train_set.targets, dtype=float)
    n = len(x_all)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if x_all.shape[1] != net.arch.input_count or t_all.shape[1] != net.arch.output_count:
        raise ValueError("dataset dimensions do not match the network")
    cycles = cfg.cycles if cfg.cycles is not None else default_cycles(n)
    lr = cfg.learning_rate

    report = TrainReport(initial_loss=mse(net, x_all, t_all))
    orders = np.array(
        [cycle_order(cfg.seed, c, n, cfg.shuffle_each_cycle) for c in range(start_cycle, start_cycle + cycles)],
        dtype=np.int64,
    )
    params = net.flat().copy()
    sizes = np.array(net.arch.sizes, dtype=np.int64)
    losses = sgd_cycles(params, sizes, np.ascontiguousarray(x_all), np.ascontiguousarray(t_all), orders, float(lr))
    report.loss_per_cycle = [float(v) for v in losses]
    layers = _unflatten(net.arch, params)
    trained = NetworkWeights(net.arch, tuple(layers))
    report.final_loss = mse(trained, x_all, t_all)
    return trained, report


def gradient_check(net: NetworkWeights, features, targets, eps: float = 1e-5, analytic=None) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    Relative error per weight is ``|a - g| / max(1e-12, |a| + |g|)``.
    ``analytic`` overrides the back-propagated gradients (used to check that
    the comparison catches a broken gradient).
    """
    x, t = _as_sample(net, features, targets)
    if analytic is None:
        _, analytic = _gradients(net.layers, x, t)
    worst = 0.0
    for li, (w, b) in enumerate(net.layers):
        for pi, param in enumerate((w, b)):
            grad = analytic[li][pi]
            for idx in np.ndindex(param.shape):
                plus = [(ww.copy(), bb.copy()) for ww, bb in net.layers]
                minus = [(ww.copy(), bb.copy()) for ww, bb in net.layers]
                plus[li][pi][idx] += eps
                minus[li][pi][idx] -= eps
                lp, _ = _gradients(plus, x, t)
                lm, _ = _gradients(minus, x, t)
                numeric = (lp - lm) / (2 * eps)
                a = float(grad[idx])
                rel = abs(a - numeric) / max(1e-12, abs(a) + abs(numeric))
                worst = max(worst, rel)
    return worst


# -- persistence ----------------------------------------------------------------


def weights_to_dict(net: NetworkWeights, cycles_completed: int | None = None) -> dict:
    arch = net.arch
    doc = {
        "arch": {"inputs": arch.input_count, "hidden": list(arch.hidden_layers), "outputs": arch.output_count},
        "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in net.layers],
    }
    if cycles_completed is not None:
        doc["cycles_completed"] = int(cycles_completed)
    return doc


def save_weights(net: NetworkWeights, path, cycles_completed: int | None = None) -> None:
    # json writes floats with repr, which round-trips doubles exactly
    with open(path, "w") as fh:
        json.dump(weights_to_dict(net, cycles_completed), fh)
        fh.write("\n")


def weights_from_dict(doc: dict, arch: ArchitectureSpec | None = None) -> NetworkWeights:
    try:
        saved = ArchitectureSpec(doc["arch"]["inputs"], tuple(doc["arch"]["hidden"]), doc["arch"]["outputs"])
        layers = tuple(
            (np.array(layer["w"], dtype=float), np.array(layer["b"], dtype=float)) for layer in doc["layers"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed weight document: {exc}") from exc
    if arch is not None and saved != arch:
        raise ValueError(f"saved architecture {saved.sizes} does not match requested {arch.sizes}")
    return NetworkWeights(saved, layers)


def load_weights(path, arch: ArchitectureSpec | None = None) -> NetworkWeights:
    """Read a weight file; returns a fresh network, never mutates one."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a weight file ({exc})") from exc
    return weights_from_dict(doc, arch)


def saved_cycles(path) -> int:
    with open(path) as fh:
        return int(json.load(fh).get("cycles_completed", 0))
