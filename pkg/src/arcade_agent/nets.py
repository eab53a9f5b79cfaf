"""Minimal dense-network substrate: forward, backprop, adaptive updates.

Networks are small split-head MLPs: a shared ReLU trunk followed by named
heads, each head one ReLU hidden layer plus a linear output. Everything is
float64 and seeded, so initialization and training are reproducible
bitwise. Loss is mean squared error per head, summed over heads.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ConfigError, NumericError, ShapeError

RELU = "relu"
IDENTITY = "identity"

_MAGIC = b"ARCN"
_VERSION = 1


class Layer:
    """One dense layer: y = act(W x + b), W shaped (out, in)."""

    __slots__ = ("W", "b", "act")

    def __init__(self, W, b, act=RELU):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ShapeError(f"layer wants W (out,in) and b (out,), got {self.W.shape} {self.b.shape}")
        if act not in (RELU, IDENTITY):
            raise ConfigError(f"unknown activation {act!r}")
        self.act = act


def _activate(z, act):
    return np.maximum(z, 0.0) if act == RELU else z


def _act_grad(z, act):
    if act == RELU:
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


class DenseNet:
    """Shared trunk plus named output heads.

    ``trunk`` may be empty; every head consumes the trunk output. The
    canonical parameter order (used by optimizers and checkpoints) is the
    trunk layers followed by heads in insertion order, W before b.
    """

    def __init__(self, trunk, heads, family=None):
        if not heads:
            raise ConfigError("net needs at least one head")
        self.trunk = list(trunk)
        self.heads = dict(heads)
        self.family = family  # set by build_split_net, needed for checkpoints
        widths = [layer.W.shape for layer in self.trunk]
        for i in range(1, len(widths)):
            if widths[i][1] != widths[i - 1][0]:
                raise ShapeError(f"trunk layers {i-1},{i} do not compose: {widths}")
        trunk_out = self.trunk[-1].W.shape[0] if self.trunk else None
        for name, layers in self.heads.items():
            if not layers:
                raise ConfigError(f"head {name!r} is empty")
            want = trunk_out if trunk_out is not None else layers[0].W.shape[1]
            if layers[0].W.shape[1] != want:
                raise ShapeError(f"head {name!r} does not compose with trunk")
            for i in range(1, len(layers)):
                if layers[i].W.shape[1] != layers[i - 1].W.shape[0]:
                    raise ShapeError(f"head {name!r} layers {i-1},{i} do not compose")

    @property
    def input_width(self):
        if self.trunk:
            return self.trunk[0].W.shape[1]
        first = next(iter(self.heads.values()))
        return first[0].W.shape[1]

    @property
    def head_names(self):
        return tuple(self.heads)

    def head_width(self, name):
        return self.heads[name][-1].W.shape[0]

    # -- inference ---------------------------------------------------------

    def forward(self, x):
        """Head outputs for a single input (d,) or a batch (B, d)."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.shape[1] != self.input_width:
            raise ShapeError(f"input width {X.shape[1]} != {self.input_width}")
        h = X
        for layer in self.trunk:
            h = _activate(h @ layer.W.T + layer.b, layer.act)
        out = {}
        for name, layers in self.heads.items():
            a = h
            for layer in layers:
                a = _activate(a @ layer.W.T + layer.b, layer.act)
            out[name] = a[0] if single else a
        return out

    def _forward_traced(self, X):
        trunk_pre, trunk_post = [], []
        h = X
        for layer in self.trunk:
            z = h @ layer.W.T + layer.b
            trunk_pre.append(z)
            h = _activate(z, layer.act)
            trunk_post.append(h)
        head_pre, head_post = {}, {}
        for name, layers in self.heads.items():
            pres, posts = [], []
            a = h
            for layer in layers:
                z = a @ layer.W.T + layer.b
                pres.append(z)
                a = _activate(z, layer.act)
                posts.append(a)
            head_pre[name] = pres
            head_post[name] = posts
        return trunk_post, trunk_pre, head_post, head_pre

    # -- training ----------------------------------------------------------

    def backward(self, inputs, targets):
        """Summed per-head MSE and gradients for a batch.

        ``targets`` maps head name to a (B, out) array. Gradients mirror
        the parameter structure: (trunk_grads, head_grads) with (dW, db)
        pairs. Raises NumericError with the offending layer index if a
        non-finite intermediate shows up.
        """
        X = np.asarray(inputs, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_width:
            raise ShapeError(f"batch must be (B, {self.input_width}), got {X.shape}")
        trunk_post, trunk_pre, head_post, head_pre = self._forward_traced(X)
        for i, z in enumerate(trunk_pre):
            if not np.isfinite(z).all():
                raise NumericError(f"non-finite value in trunk layer {i}", i)
        trunk_out = trunk_post[-1] if self.trunk else X

        loss = 0.0
        trunk_delta = np.zeros_like(trunk_out)
        head_grads = {}
        for name, layers in self.heads.items():
            t = np.asarray(targets[name], dtype=np.float64)
            pred = head_post[name][-1]
            if t.shape != pred.shape:
                raise ShapeError(f"target for head {name!r} must be {pred.shape}, got {t.shape}")
            resid = pred - t
            denom = resid.size
            loss += float((resid ** 2).sum() / denom)
            grad_out = 2.0 * resid / denom
            grads = [None] * len(layers)
            delta = grad_out
            for i in range(len(layers) - 1, -1, -1):
                z = head_pre[name][i]
                if not np.isfinite(z).all():
                    raise NumericError(f"non-finite value in head {name!r} layer {i}", i)
                dz = delta * _act_grad(z, layers[i].act)
                a_prev = head_post[name][i - 1] if i > 0 else trunk_out
                grads[i] = (dz.T @ a_prev, dz.sum(axis=0))
                delta = dz @ layers[i].W
            head_grads[name] = grads
            trunk_delta += delta

        trunk_grads = [None] * len(self.trunk)
        delta = trunk_delta
        for i in range(len(self.trunk) - 1, -1, -1):
            dz = delta * _act_grad(trunk_pre[i], self.trunk[i].act)
            a_prev = trunk_post[i - 1] if i > 0 else X
            trunk_grads[i] = (dz.T @ a_prev, dz.sum(axis=0))
            delta = dz @ self.trunk[i].W
        return loss, (trunk_grads, head_grads)

    # -- parameter plumbing --------------------------------------------------

    def param_arrays(self):
        """Parameters in canonical order (live references)."""
        out = []
        for layer in self.trunk:
            out.extend((layer.W, layer.b))
        for layers in self.heads.values():
            for layer in layers:
                out.extend((layer.W, layer.b))
        return out

    @staticmethod
    def grad_arrays(grads):
        trunk_grads, head_grads = grads
        out = []
        for dW, db in trunk_grads:
            out.extend((dW, db))
        for layer_grads in head_grads.values():
            for dW, db in layer_grads:
                out.extend((dW, db))
        return out

    def clone(self):
        trunk = [Layer(l.W.copy(), l.b.copy(), l.act) for l in self.trunk]
        heads = {
            name: [Layer(l.W.copy(), l.b.copy(), l.act) for l in layers]
            for name, layers in self.heads.items()
        }
        return DenseNet(trunk, heads, family=self.family)

    def copy_params_from(self, other):
        for dst, src in zip(self.param_arrays(), other.param_arrays()):
            np.copyto(dst, src)


def build_split_net(input_width, trunk_widths, heads, seed):
    """Paper-family net: ReLU trunk, one hidden ReLU + linear output per head.

    ``heads`` maps name -> (hidden_width, out_width). Weights are uniform
    in +-1/sqrt(fan_in), biases zero.
    """
    if input_width < 1:
        raise ConfigError("input_width must be >= 1")
    rng = np.random.default_rng(seed)

    def make(n_out, n_in, act):
        bound = 1.0 / np.sqrt(n_in)
        return Layer(rng.uniform(-bound, bound, size=(n_out, n_in)), np.zeros(n_out), act)

    trunk = []
    prev = input_width
    for width in trunk_widths:
        trunk.append(make(width, prev, RELU))
        prev = width
    built = {}
    for name, (hidden, out) in heads.items():
        built[name] = [make(hidden, prev, RELU), make(out, hidden, IDENTITY)]
    family = (int(input_width), tuple(int(w) for w in trunk_widths),
              tuple((name, int(h), int(o)) for name, (h, o) in heads.items()))
    return DenseNet(trunk, built, family=family)


class Adam:
    """Adaptive-moment gradient descent with bias correction."""

    def __init__(self, net, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in net.param_arrays()]
        self.v = [np.zeros_like(p) for p in net.param_arrays()]

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def apply_update(net, grads, adam):
    """One optimizer step in place; returns the net for chaining."""
    adam.step(net.param_arrays(), DenseNet.grad_arrays(grads))
    return net


# -- checkpoints -------------------------------------------------------------

def save_net(path, net) -> None:
    """Self-describing flat binary checkpoint (family nets only)."""
    if net.family is None:
        raise ConfigError("only nets from build_split_net are checkpointable")
    input_width, trunk_widths, heads = net.family
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, input_width))
        fh.write(struct.pack("<I", len(trunk_widths)))
        for w in trunk_widths:
            fh.write(struct.pack("<I", w))
        fh.write(struct.pack("<I", len(heads)))
        for name, hidden, out in heads:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", hidden, out))
        for arr in net.param_arrays():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_net(path) -> DenseNet:
    """Rebuild a checkpointed net, validating the topology header."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ConfigError(f"{path} is not a network checkpoint")
        version, input_width = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ConfigError(f"unsupported checkpoint version {version}")
        (n_trunk,) = struct.unpack("<I", fh.read(4))
        trunk_widths = [struct.unpack("<I", fh.read(4))[0] for _ in range(n_trunk)]
        (n_heads,) = struct.unpack("<I", fh.read(4))
        heads = {}
        for _ in range(n_heads):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            hidden, out = struct.unpack("<II", fh.read(8))
            heads[name] = (hidden, out)
        net = build_split_net(input_width, trunk_widths, heads, seed=0)
        for arr in net.param_arrays():
            raw = fh.read(arr.size * 8)
            if len(raw) != arr.size * 8:
                raise ConfigError(f"truncated checkpoint {path}")
            np.copyto(arr, np.frombuffer(raw, dtype="<f8").reshape(arr.shape))
        if fh.read(1):
            raise ConfigError(f"trailing bytes in checkpoint {path}")
    return net
