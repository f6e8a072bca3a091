"""Minimal reverse-mode autodiff over float64 numpy arrays.

Only the primitives the encoder-decoder needs: linear, sigmoid, tanh,
softmax, concat, stack, embedding rows, cross entropy, and the LSTM cell
built from them. Plus finite-difference gradient checking and a binary
checkpoint format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np


class NumericError(ValueError):
    """Shape mismatch or non-finite values."""


class Tensor:
    """A node in the computation graph; values are float64 numpy arrays."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._backward: Callable[[], None] = lambda: None
        self._parents: tuple = ()

    @property
    def shape(self):
        return self.data.shape

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Reverse-topological backward pass from this (scalar) node."""
        topo, visited = [], set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            node._backward()

    def item(self) -> float:
        return float(self.data)


def _node(data, parents) -> Tensor:
    out = Tensor(data, requires_grad=any(p.requires_grad for p in parents))
    out._parents = tuple(p for p in parents if p.requires_grad)
    return out


def _require_same_shape(a: Tensor, b: Tensor, op: str):
    if a.shape != b.shape:
        raise NumericError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "add")
    out = _node(a.data + b.data, (a, b))

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad)
        if b.requires_grad:
            b._accumulate(out.grad)
    out._backward = backward
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "mul")
    out = _node(a.data * b.data, (a, b))

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad * b.data)
        if b.requires_grad:
            b._accumulate(out.grad * a.data)
    out._backward = backward
    return out


def scale(a: Tensor, s: float) -> Tensor:
    out = _node(a.data * s, (a,))

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad * s)
    out._backward = backward
    return out


def matvec(w: Tensor, x: Tensor) -> Tensor:
    """Matrix (m,n) times vector (n,) -> (m,)."""
    if w.data.ndim != 2 or x.data.ndim != 1 or w.shape[1] != x.shape[0]:
        raise NumericError(f"matvec: incompatible shapes {w.shape} and {x.shape}")
    out = _node(w.data @ x.data, (w, x))

    def backward():
        if w.requires_grad:
            w._accumulate(np.outer(out.grad, x.data))
        if x.requires_grad:
            x._accumulate(w.data.T @ out.grad)
    out._backward = backward
    return out


def matvec_t(w: Tensor, x: Tensor) -> Tensor:
    """Transposed product: (m,n)^T @ (m,) -> (n,)."""
    if w.data.ndim != 2 or x.data.ndim != 1 or w.shape[0] != x.shape[0]:
        raise NumericError(f"matvec_t: incompatible shapes {w.shape} and {x.shape}")
    out = _node(w.data.T @ x.data, (w, x))

    def backward():
        if w.requires_grad:
            w._accumulate(np.outer(x.data, out.grad))
        if x.requires_grad:
            x._accumulate(w.data @ out.grad)
    out._backward = backward
    return out


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """w @ x + b for vector x."""
    return add(matvec(w, x), b)


def sigmoid(x: Tensor) -> Tensor:
    val = 1.0 / (1.0 + np.exp(-x.data))
    out = _node(val, (x,))

    def backward():
        if x.requires_grad:
            x._accumulate(out.grad * val * (1.0 - val))
    out._backward = backward
    return out


def tanh(x: Tensor) -> Tensor:
    val = np.tanh(x.data)
    out = _node(val, (x,))

    def backward():
        if x.requires_grad:
            x._accumulate(out.grad * (1.0 - val * val))
    out._backward = backward
    return out


def softmax(x: Tensor) -> Tensor:
    """Stable softmax over a vector."""
    if x.data.ndim != 1:
        raise NumericError(f"softmax expects a vector, got shape {x.shape}")
    shifted = x.data - x.data.max()
    e = np.exp(shifted)
    val = e / e.sum()
    out = _node(val, (x,))

    def backward():
        if x.requires_grad:
            g = out.grad
            x._accumulate(val * (g - np.dot(g, val)))
    out._backward = backward
    return out


def concat(parts: list[Tensor]) -> Tensor:
    if not parts:
        raise NumericError("concat of zero tensors")
    out = _node(np.concatenate([p.data for p in parts]), tuple(parts))
    sizes = [p.data.shape[0] for p in parts]

    def backward():
        offset = 0
        for p, size in zip(parts, sizes):
            if p.requires_grad:
                p._accumulate(out.grad[offset:offset + size])
            offset += size
    out._backward = backward
    return out


def stack(rows: list[Tensor]) -> Tensor:
    """Stack vectors into a (len(rows), n) matrix."""
    if not rows:
        raise NumericError("stack of zero tensors")
    out = _node(np.stack([r.data for r in rows]), tuple(rows))

    def backward():
        for i, r in enumerate(rows):
            if r.requires_grad:
                r._accumulate(out.grad[i])
    out._backward = backward
    return out


def narrow(x: Tensor, start: int, size: int) -> Tensor:
    """Contiguous slice of a vector."""
    out = _node(x.data[start:start + size], (x,))

    def backward():
        if x.requires_grad:
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            x.grad[start:start + size] += out.grad
    out._backward = backward
    return out


def embed(ids, e: Tensor) -> Tensor:
    """Rows of embedding matrix e for the given token id(s)."""
    if e.data.ndim != 2:
        raise NumericError(f"embed expects a matrix, got shape {e.shape}")
    idx = int(ids) if np.isscalar(ids) or isinstance(ids, (int, np.integer)) else ids
    if isinstance(idx, int):
        if not 0 <= idx < e.shape[0]:
            raise NumericError(f"embed: id {idx} out of range for {e.shape[0]} rows")
        out = _node(e.data[idx], (e,))

        def backward():
            if e.requires_grad:
                if e.grad is None:
                    e.grad = np.zeros_like(e.data)
                e.grad[idx] += out.grad
        out._backward = backward
        return out
    raise NumericError("embed expects a single integer id")


def cross_entropy(dist: Tensor, target: int) -> Tensor:
    """-log(dist[target]) for a probability vector dist."""
    if dist.data.ndim != 1:
        raise NumericError(f"cross_entropy expects a vector, got {dist.shape}")
    if not 0 <= target < dist.shape[0]:
        raise NumericError(f"cross_entropy: target {target} out of range")
    p = dist.data[target]
    out = _node(-np.log(p), (dist,))

    def backward():
        if dist.requires_grad:
            if dist.grad is None:
                dist.grad = np.zeros_like(dist.data)
            dist.grad[target] += -out.grad / p
    out._backward = backward
    return out


def add_n(terms: list[Tensor]) -> Tensor:
    out = _node(sum(t.data for t in terms), tuple(terms))

    def backward():
        for t in terms:
            if t.requires_grad:
                t._accumulate(out.grad)
    out._backward = backward
    return out


@dataclass
class LSTMWeights:
    """Combined gate parameters; gate order i, f, o, g along axis 0."""
    w_x: Tensor   # (4n, input_dim)
    w_h: Tensor   # (4n, n)
    b: Tensor     # (4n,)


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor,
              weights: LSTMWeights) -> tuple[Tensor, Tensor]:
    """Standard LSTM step: c = f*c_prev + i*g, h = o*tanh(c)."""
    n = h_prev.shape[0]
    if weights.w_h.shape != (4 * n, n):
        raise NumericError(
            f"lstm_cell: w_h shape {weights.w_h.shape} != {(4 * n, n)}")
    gates = add(add(matvec(weights.w_x, x), matvec(weights.w_h, h_prev)),
                weights.b)
    i = sigmoid(narrow(gates, 0, n))
    f = sigmoid(narrow(gates, n, n))
    o = sigmoid(narrow(gates, 2 * n, n))
    g = tanh(narrow(gates, 3 * n, n))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh(c))
    return h, c


def grad_check(loss_fn: Callable[[dict[str, Tensor]], Tensor],
               params: dict[str, np.ndarray],
               step: float = 1e-4) -> float:
    """Max relative error between analytic gradients and central differences.

    loss_fn builds a scalar loss Tensor from a dict of parameter Tensors.
    """
    tensors = {k: Tensor(v.copy(), requires_grad=True) for k, v in params.items()}
    loss = loss_fn(tensors)
    if not np.isfinite(loss.data):
        raise NumericError("non-finite loss in grad_check")
    loss.backward()
    analytic = {k: (t.grad if t.grad is not None else np.zeros_like(t.data))
                for k, t in tensors.items()}

    worst = 0.0
    for name, base in params.items():
        flat = base.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            perturbed = {k: (v if k != name else v.copy()) for k, v in params.items()}
            pf = perturbed[name].reshape(-1)
            pf[idx] = orig + step
            up = loss_fn({k: Tensor(v) for k, v in perturbed.items()}).item()
            pf[idx] = orig - step
            down = loss_fn({k: Tensor(v) for k, v in perturbed.items()}).item()
            fd = (up - down) / (2 * step)
            an = analytic[name].reshape(-1)[idx]
            denom = max(abs(fd), abs(an), 1e-4)
            worst = max(worst, abs(fd - an) / denom)
    return worst


# ---------------------------------------------------------------------------
# checkpoint format: magic, version, named float64 tensors, little-endian

_MAGIC = b"OCKPT\x00"
_VERSION = 1


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HI", _VERSION, len(tensors)))
        for name in sorted(tensors):
            arr = np.asarray(tensors[name], dtype=np.float64, order="C")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f8").tobytes())


def load_tensors(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise NumericError(f"{path}: not a checkpoint file")
        version, count = struct.unpack("<HI", fh.read(6))
        if version != _VERSION:
            raise NumericError(f"{path}: unsupported checkpoint version {version}")
        out = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            n_vals = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(fh.read(8 * n_vals), dtype="<f8").reshape(shape)
            out[name] = data.copy()
        return out
