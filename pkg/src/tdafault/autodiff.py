"""Minimal dense reverse-mode automatic differentiation on numpy arrays.

Just enough machinery to train the encoder: 64-bit tensors of rank <= 3, a
fixed catalogue of differentiable primitives with hand-written adjoints, and
a gradient checker against central finite differences.  Every op validates
its output for NaN/Inf and aborts with :class:`NumericsError` so a diverging
training step fails loudly instead of poisoning the parameters.

Graph mechanics follow the usual closure pattern: each op records its parent
tensors and an adjoint closure; ``backward`` replays the closures in exact
reverse creation order, accumulating gradients by addition.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import erf

__all__ = [
    "Tensor",
    "NumericsError",
    "matmul",
    "transpose",
    "add",
    "subtract",
    "multiply",
    "scale",
    "mul_rowvec",
    "mul_colvec",
    "add_rowvec",
    "softmax_rows",
    "exp",
    "mean_rows",
    "layer_norm",
    "gelu",
    "cross_entropy_logits",
    "op_catalog",
    "grad_check",
    "zero_grad",
]

_SEQ = itertools.count()
_LN_EPS = 1e-5
_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class NumericsError(ArithmeticError):
    """An operation produced NaN or Inf."""


class Tensor:
    """Dense float64 array node in the autodiff graph."""

    __slots__ = ("data", "requires_grad", "grad", "_backward", "_parents", "_seq", "_op")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _op: str = "leaf"):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 3:
            raise ValueError(f"rank {arr.ndim} tensor not supported (max 3)")
        if not np.all(np.isfinite(arr)):
            raise NumericsError(f"non-finite values in result of op {_op!r}")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._backward = None
        self._parents = _parents
        self._op = _op
        self._seq = next(_SEQ)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Backpropagate from a scalar output through the recorded graph."""
        if self.data.size != 1:
            raise ValueError(f"backward needs a scalar output, got shape {self.shape}")
        nodes = []
        seen = {id(self)}
        stack = [self]
        while stack:
            node = stack.pop()
            nodes.append(node)
            for parent in node._parents:
                if id(parent) not in seen:
                    seen.add(id(parent))
                    stack.append(parent)
        nodes.sort(key=lambda t: t._seq, reverse=True)
        self.grad = np.ones_like(self.data)
        for node in nodes:
            if node._backward is not None:
                node._backward()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self._op!r}, requires_grad={self.requires_grad})"


def zero_grad(params) -> None:
    for p in params:
        p.grad = None


def _make(data, parents, op: str, backward=None) -> Tensor:
    tracked = tuple(p for p in parents if p.requires_grad)
    out = Tensor(data, requires_grad=bool(tracked), _parents=tracked, _op=op)
    if tracked and backward is not None:
        out._backward = lambda: backward(out)
    return out


def _need_2d(t: Tensor, op: str) -> None:
    if t.data.ndim != 2:
        raise ValueError(f"{op} expects a 2-D tensor, got shape {t.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _need_2d(a, "matmul")
    _need_2d(b, "matmul")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad @ b.data.T)
        if b.requires_grad:
            b.accumulate(a.data.T @ out.grad)

    return _make(a.data @ b.data, (a, b), "matmul", backward)


def transpose(a: Tensor) -> Tensor:
    _need_2d(a, "transpose")

    def backward(out):
        a.accumulate(out.grad.T)

    return _make(a.data.T, (a,), "transpose", backward)


def _same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{op} shape mismatch: {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad)
        if b.requires_grad:
            b.accumulate(out.grad)

    return _make(a.data + b.data, (a, b), "add", backward)


def subtract(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "subtract")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad)
        if b.requires_grad:
            b.accumulate(-out.grad)

    return _make(a.data - b.data, (a, b), "subtract", backward)


def multiply(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "multiply")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad * b.data)
        if b.requires_grad:
            b.accumulate(out.grad * a.data)

    return _make(a.data * b.data, (a, b), "multiply", backward)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def backward(out):
        a.accumulate(out.grad * c)

    return _make(a.data * c, (a,), "scale", backward)


def mul_rowvec(a: Tensor, v: Tensor) -> Tensor:
    """Multiply every row of ``a`` elementwise by the vector ``v``.

    Broadcast over rows: column ``j`` of the result is ``a[:, j] * v[j]``.
    """
    _need_2d(a, "mul_rowvec")
    if v.data.ndim != 1 or v.shape[0] != a.shape[1]:
        raise ValueError(f"mul_rowvec shape mismatch: {a.shape} vs vector {v.shape}")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad * v.data[None, :])
        if v.requires_grad:
            v.accumulate((out.grad * a.data).sum(axis=0))

    return _make(a.data * v.data[None, :], (a, v), "mul_rowvec", backward)


def mul_colvec(a: Tensor, u: Tensor) -> Tensor:
    """Multiply row ``i`` of ``a`` by ``u[i]`` (broadcast over columns)."""
    _need_2d(a, "mul_colvec")
    if u.data.ndim != 1 or u.shape[0] != a.shape[0]:
        raise ValueError(f"mul_colvec shape mismatch: {a.shape} vs vector {u.shape}")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad * u.data[:, None])
        if u.requires_grad:
            u.accumulate((out.grad * a.data).sum(axis=1))

    return _make(a.data * u.data[:, None], (a, u), "mul_colvec", backward)


def add_rowvec(a: Tensor, v: Tensor) -> Tensor:
    """Add the vector ``v`` to every row of ``a`` (bias add)."""
    _need_2d(a, "add_rowvec")
    if v.data.ndim != 1 or v.shape[0] != a.shape[1]:
        raise ValueError(f"add_rowvec shape mismatch: {a.shape} vs vector {v.shape}")

    def backward(out):
        if a.requires_grad:
            a.accumulate(out.grad)
        if v.requires_grad:
            v.accumulate(out.grad.sum(axis=0))

    return _make(a.data + v.data[None, :], (a, v), "add_rowvec", backward)


def softmax_rows(a: Tensor) -> Tensor:
    _need_2d(a, "softmax_rows")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)

    def backward(out):
        # dL/dx = P * (g - sum_j g_j P_j) row-wise
        dot = (out.grad * p).sum(axis=1, keepdims=True)
        a.accumulate(p * (out.grad - dot))

    return _make(p, (a,), "softmax_rows", backward)


def exp(a: Tensor) -> Tensor:
    # Overflow becomes inf here and is converted to NumericsError by the
    # Tensor constructor; the numpy warning would just be noise on top.
    with np.errstate(over="ignore"):
        e = np.exp(a.data)

    def backward(out):
        a.accumulate(out.grad * e)

    return _make(e, (a,), "exp", backward)


def mean_rows(a: Tensor) -> Tensor:
    """Mean-pool over rows: (m, n) -> (1, n)."""
    _need_2d(a, "mean_rows")
    m = a.shape[0]

    def backward(out):
        a.accumulate(np.repeat(out.grad, m, axis=0) / m)

    return _make(a.data.mean(axis=0, keepdims=True), (a,), "mean_rows", backward)


def layer_norm(a: Tensor, eps: float = _LN_EPS) -> Tensor:
    """Normalise each row to zero mean and unit variance (no affine part)."""
    _need_2d(a, "layer_norm")
    mu = a.data.mean(axis=1, keepdims=True)
    var = a.data.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = (a.data - mu) * inv

    def backward(out):
        g = out.grad
        n = a.shape[1]
        gy = (g * y).mean(axis=1, keepdims=True)
        gm = g.mean(axis=1, keepdims=True)
        a.accumulate(inv * (g - gm - y * gy))

    return _make(y, (a,), "layer_norm", backward)


def gelu(a: Tensor) -> Tensor:
    """Exact (erf-based) Gaussian error linear unit."""
    cdf = 0.5 * (1.0 + erf(a.data * _INV_SQRT2))
    y = a.data * cdf

    def backward(out):
        pdf = _INV_SQRT2PI * np.exp(-0.5 * a.data**2)
        a.accumulate(out.grad * (cdf + a.data * pdf))

    return _make(y, (a,), "gelu", backward)


def cross_entropy_logits(logits: Tensor, target: int) -> Tensor:
    """Cross-entropy of a single (1, C) logit row against a class index.

    Fused with log-sum-exp for stability; the adjoint is softmax minus the
    one-hot target.
    """
    _need_2d(logits, "cross_entropy_logits")
    if logits.shape[0] != 1:
        raise ValueError(f"cross_entropy_logits expects one logit row, got {logits.shape}")
    n_classes = logits.shape[1]
    if not 0 <= target < n_classes:
        raise ValueError(f"target {target} out of range for {n_classes} classes")
    z = logits.data[0]
    zmax = z.max()
    lse = zmax + np.log(np.exp(z - zmax).sum())
    loss = lse - z[target]

    def backward(out):
        p = np.exp(z - lse)
        p[target] -= 1.0
        logits.accumulate(out.grad.reshape(()) * p[None, :])

    return _make(np.array([[loss]]), (logits,), "cross_entropy_logits", backward)


def op_catalog() -> dict:
    """The differentiable primitives, by name."""
    return {
        "matmul": matmul,
        "transpose": transpose,
        "add": add,
        "subtract": subtract,
        "multiply": multiply,
        "scale": scale,
        "mul_rowvec": mul_rowvec,
        "mul_colvec": mul_colvec,
        "add_rowvec": add_rowvec,
        "softmax_rows": softmax_rows,
        "exp": exp,
        "mean_rows": mean_rows,
        "layer_norm": layer_norm,
        "gelu": gelu,
        "cross_entropy_logits": cross_entropy_logits,
    }


def grad_check(f, params, h: float = 1e-5) -> float:
    """Max relative error between reverse-mode and central-difference grads.

    ``f`` must rebuild a scalar Tensor from the live ``params`` on every
    call.  The error at each coordinate is
    ``|g_ad - g_fd| / max(1, |g_ad|, |g_fd|)``.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step size h must lie in [1e-7, 1e-3], got {h}")
    params = list(params)
    for p in params:
        if not np.all(np.isfinite(p.data)):
            raise ValueError("parameters contain non-finite values")
    zero_grad(params)
    out = f()
    if out.data.size != 1:
        raise ValueError(f"grad_check needs a scalar-valued f, got shape {out.shape}")
    out.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    worst = 0.0
    for p, g_ad in zip(params, analytic):
        flat = p.data.reshape(-1)
        g_flat = g_ad.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + h
            f_plus = f().item()
            flat[i] = saved - h
            f_minus = f().item()
            flat[i] = saved
            g_fd = (f_plus - f_minus) / (2.0 * h)
            err = abs(g_flat[i] - g_fd) / max(1.0, abs(g_flat[i]), abs(g_fd))
            worst = max(worst, err)
    return worst
