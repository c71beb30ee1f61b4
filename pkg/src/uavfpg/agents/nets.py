"""Feed-forward nets with hand-written backprop, Adam, and checkpoints."""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from uavfpg import CheckpointError

CHECKPOINT_MAGIC = b"FPGNETS\x00"
CHECKPOINT_VERSION = 1
_ACTS = {"linear": 0, "tanh": 1}


class MLP:
    """ReLU hidden layers; output is linear or ``out_scale * tanh``.

    Weights are stored ``(fan_in, fan_out)`` and initialized uniformly in
    +-1/sqrt(fan_in), biases likewise.
    """

    def __init__(self, sizes: Sequence[int], out_act: str = "linear", out_scale: float = 1.0,
                 rng: Optional[np.random.Generator] = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if out_act not in _ACTS:
            raise ValueError(f"unknown output activation {out_act!r}")
        rng = rng if rng is not None else np.random.default_rng()
        self.sizes = [int(s) for s in sizes]
        self.out_act = out_act
        self.out_scale = float(out_scale)
        self.params: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            lim = 1.0 / np.sqrt(fan_in)
            self.params.append(rng.uniform(-lim, lim, (fan_in, fan_out)))
            self.params.append(rng.uniform(-lim, lim, fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def forward(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[1]} != {self.sizes[0]}")
        inputs, h = [], x
        for i in range(self.n_layers):
            W, b = self.params[2 * i], self.params[2 * i + 1]
            inputs.append(h)
            z = h @ W + b
            h = np.maximum(z, 0.0) if i < self.n_layers - 1 else z
        if self.out_act == "tanh":
            t = np.tanh(h)
            return self.out_scale * t, (inputs, t)
        return h, (inputs, None)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients of sum(grad_out * y) w.r.t. params and input."""
        inputs, t = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if t is not None:
            g = g * self.out_scale * (1.0 - t * t)
        grads = [None] * len(self.params)
        for i in reversed(range(self.n_layers)):
            h = inputs[i]
            W = self.params[2 * i]
            grads[2 * i] = h.T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ W.T
            if i > 0:
                g = g * (h > 0.0)
        return grads, g

    def copy(self) -> "MLP":
        twin = MLP.__new__(MLP)
        twin.sizes = list(self.sizes)
        twin.out_act = self.out_act
        twin.out_scale = self.out_scale
        twin.params = [p.copy() for p in self.params]
        return twin

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, v: np.ndarray) -> None:
        i = 0
        for p in self.params:
            p[...] = v[i:i + p.size].reshape(p.shape)
            i += p.size

    def same_layout(self, other: "MLP") -> bool:
        return self.sizes == other.sizes and all(a.shape == b.shape for a, b in zip(self.params, other.params))


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Descend along ``grads`` in place."""
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def soft_update(target: MLP, source: MLP, tau: float) -> MLP:
    """Polyak averaging: target <- tau * source + (1 - tau) * target."""
    if not target.same_layout(source):
        raise ValueError("soft_update needs matching layouts")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for t, s in zip(target.params, source.params):
        if tau == 1.0:
            t[...] = s
        elif tau > 0.0:
            t += tau * (s - t)
    return target


# -- checkpoints ---------------------------------------------------------------

def save_checkpoint(path, nets: dict) -> None:
    """Write named nets: header (magic, version, layouts) then little-endian float64 params."""
    out = bytearray(CHECKPOINT_MAGIC)
    out += struct.pack("<II", CHECKPOINT_VERSION, len(nets))
    for name, net in nets.items():
        raw = name.encode()
        out += struct.pack("<H", len(raw)) + raw
        out += struct.pack("<Bd", _ACTS[net.out_act], net.out_scale)
        out += struct.pack("<I", len(net.sizes)) + struct.pack(f"<{len(net.sizes)}I", *net.sizes)
    for net in nets.values():
        for p in net.params:
            out += np.ascontiguousarray(p, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path) -> dict:
    data = Path(path).read_bytes()
    if data[:8] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a network checkpoint")
    version, count = struct.unpack_from("<II", data, 8)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    off = 16
    layouts = []
    for _ in range(count):
        (n,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off:off + n].decode()
        off += n
        act, scale = struct.unpack_from("<Bd", data, off)
        off += 9
        (k,) = struct.unpack_from("<I", data, off)
        off += 4
        sizes = struct.unpack_from(f"<{k}I", data, off)
        off += 4 * k
        layouts.append((name, {v: a for a, v in _ACTS.items()}[act], scale, sizes))
    nets = {}
    for name, act, scale, sizes in layouts:
        net = MLP(sizes, act, scale, np.random.default_rng(0))
        for p in net.params:
            nbytes = p.size * 8
            if off + nbytes > len(data):
                raise CheckpointError(f"{path}: truncated parameter block")
            p[...] = np.frombuffer(data, dtype="<f8", count=p.size, offset=off).reshape(p.shape)
            off += nbytes
        nets[name] = net
    if off != len(data):
        raise CheckpointError(f"{path}: {len(data) - off} trailing bytes")
    return nets
