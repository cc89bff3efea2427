"""Small dense networks as plain numpy arrays: forward, reverse-mode
gradients, and optimizers.  No framework involved; parameters are a flat list
of arrays so the same optimizer code drives both network weights and physical
coefficient vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MlpArch:
    """Shape and wiring of a network.

    Plain wiring: input -> (affine + activation) per hidden width -> linear
    readout without bias.  Residual wiring: the state keeps the input
    dimension; each block adds W sigma(A h + b), and a bias-free linear head
    maps the state to the output.
    """

    input_dim: int
    output_dim: int
    hidden: tuple
    activation: str = "relu"
    residual: bool = False

    def __post_init__(self):
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.hidden) == 0:
            raise ValueError("need at least one hidden layer")
        if self.residual and len(set(self.hidden)) != 1:
            raise ValueError("residual wiring uses one shared hidden width")

    def param_shapes(self):
        shapes = []
        if self.residual:
            d = self.input_dim
            for w in self.hidden:
                shapes += [(w, d), (w,), (d, w)]
            shapes.append((self.output_dim, d))
        else:
            prev = self.input_dim
            for w in self.hidden:
                shapes += [(w, prev), (w,)]
                prev = w
            shapes.append((self.output_dim, prev))
        return shapes

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "hidden": list(self.hidden),
            "activation": self.activation,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["input_dim"]),
            int(d["output_dim"]),
            tuple(int(w) for w in d["hidden"]),
            d["activation"],
            bool(d["residual"]),
        )


def _act(z, kind):
    if kind == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _act_grad(z, kind):
    if kind == "relu":
        # subgradient 0 at the kink
        return (z > 0.0).astype(z.dtype)
    t = np.tanh(z)
    return 1.0 - t * t


def mlp_init(arch: MlpArch, seed) -> list:
    """Variance-scaling normal weights (gain 2 for relu, 1 for tanh), zero
    biases.  Matrices are drawn in parameter order with a fixed generator so
    the same seed always yields the same network."""
    rng = np.random.default_rng(seed)
    gain = 2.0 if arch.activation == "relu" else 1.0
    params = []
    for shape in arch.param_shapes():
        if len(shape) == 1:
            params.append(np.zeros(shape))
        else:
            fan_in = shape[1]
            params.append(rng.normal(0.0, np.sqrt(gain / fan_in), size=shape))
    return params


def mlp_forward(params, arch: MlpArch, X, return_cache=False):
    """Evaluate the network on X of shape (n, input_dim) -> (n, output_dim).

    With return_cache=True also returns the per-layer pre-activations and
    layer inputs needed for the backward pass (and for kink detection in
    gradient checks).
    """
    X = np.asarray(X, dtype=float)
    zs, hs = [], []
    if arch.residual:
        h = X
        for i in range(len(arch.hidden)):
            A, b, W = params[3 * i], params[3 * i + 1], params[3 * i + 2]
            hs.append(h)
            z = h @ A.T + b
            zs.append(z)
            h = _act(z, arch.activation) @ W.T + h
        H = params[-1]
        y = h @ H.T
        hs.append(h)
    else:
        h = X
        for i in range(len(arch.hidden)):
            A, b = params[2 * i], params[2 * i + 1]
            hs.append(h)
            z = h @ A.T + b
            zs.append(z)
            h = _act(z, arch.activation)
        W = params[-1]
        y = h @ W.T
        hs.append(h)
    if return_cache:
        return y, (zs, hs)
    return y


def mlp_backward(params, arch: MlpArch, X, G) -> list:
    """Gradient of sum_n G[n] . f(X[n]) with respect to every parameter.

    G has shape (n, output_dim); the result matches the layout of params.
    """
    X = np.asarray(X, dtype=float)
    G = np.asarray(G, dtype=float)
    _, (zs, hs) = mlp_forward(params, arch, X, return_cache=True)
    grads = [np.zeros_like(p) for p in params]
    act = arch.activation
    if arch.residual:
        h_last = hs[-1]
        H = params[-1]
        grads[-1] = G.T @ h_last
        gh = G @ H
        for i in reversed(range(len(arch.hidden))):
            A, _, W = params[3 * i], params[3 * i + 1], params[3 * i + 2]
            z, h_in = zs[i], hs[i]
            s = _act(z, act)
            grads[3 * i + 2] = gh.T @ s
            dz = (gh @ W) * _act_grad(z, act)
            grads[3 * i + 1] = dz.sum(axis=0)
            grads[3 * i] = dz.T @ h_in
            gh = gh + dz @ A
    else:
        h_last = hs[-1]
        W = params[-1]
        grads[-1] = G.T @ h_last
        gh = G @ W
        for i in reversed(range(len(arch.hidden))):
            A = params[2 * i]
            z, h_in = zs[i], hs[i]
            dz = gh * _act_grad(z, act)
            grads[2 * i + 1] = dz.sum(axis=0)
            grads[2 * i] = dz.T @ h_in
            gh = dz @ A
    return grads


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, **kw):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], **kw)


def adam_step(params, grads, state: AdamState, lr) -> list:
    """One bias-corrected Adam update; state is advanced in place."""
    _check_grads(grads)
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    out = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        out.append(p - lr * mhat / (np.sqrt(vhat) + state.eps))
    return out


def gd_step(params, grads, lr) -> list:
    _check_grads(grads)
    return [p - lr * g for p, g in zip(params, grads)]


def _check_grads(grads):
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")


def save_checkpoint(path, arch: MlpArch, params):
    """JSON with nested lists; float repr preserves values bit-exactly."""
    doc = {"arch": arch.to_dict(), "params": [p.tolist() for p in params]}
    with open(path, "w") as f:
        json.dump(doc, f)


def load_checkpoint(path):
    with open(path) as f:
        doc = json.load(f)
    arch = MlpArch.from_dict(doc["arch"])
    params = [np.asarray(p, dtype=float) for p in doc["params"]]
    for p, shape in zip(params, arch.param_shapes()):
        if p.shape != shape:
            raise ValueError(f"checkpoint shape mismatch: {p.shape} vs {shape}")
    return arch, params
