"""Fully-connected classifier head, training loop, and 2-component PCA."""

import struct
import time
from dataclasses import dataclass, field

import numpy as np

from gridvec.ingest import FormatError

FGM1_MAGIC = b"FGM1"


@dataclass
class MlpModel:
    weights: list   # weights[i] has shape (fan_in, fan_out)
    biases: list

    @property
    def dims(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self):
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def __len__(self):
        return len(self.train_loss)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,train_acc,test_loss,test_acc,seconds"]
        for i in range(len(self)):
            lines.append(f"{i + 1},{self.train_loss[i]!r},{self.train_acc[i]!r},"
                         f"{self.test_loss[i]!r},{self.test_acc[i]!r},{self.seconds[i]:.6f}")
        return "\n".join(lines) + "\n"


def mlp_init(dims, seed: int = 0) -> MlpModel:
    """He-scaled Gaussian weights, zero biases."""
    dims = [int(d) for d in dims]
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError(f"invalid layer dims {dims}")
    if dims[-1] < 2:
        raise ValueError("need at least two output classes")
    rng = np.random.default_rng(seed)
    weights = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(dims[:-1], dims[1:])]
    biases = [np.zeros(b) for b in dims[1:]]
    return MlpModel(weights, biases)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(model, X):
    acts = [X]
    a = X
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts


def _check(model, X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != model.dims[0]:
        raise ValueError(f"inputs of shape {X.shape} do not match input dim {model.dims[0]}")
    if len(y) != len(X):
        raise ValueError("inputs and labels differ in length")
    k = model.dims[-1]
    if y.size and (y.min() < 0 or y.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    return X, y


def _cross_entropy(logits, y):
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-logp[np.arange(len(y)), y].mean())


def forward_loss(model: MlpModel, X, y):
    """Mean softmax cross-entropy and argmax predictions (ties to lowest class)."""
    X, y = _check(model, X, y)
    logits = _forward(model, X)[-1]
    return _cross_entropy(logits, y), np.argmax(logits, axis=1)


def loss_and_grads(model: MlpModel, X, y):
    """Loss plus gradients ``(dW list, db list)`` by backpropagation."""
    X, y = _check(model, X, y)
    acts = _forward(model, X)
    logits = acts[-1]
    loss = _cross_entropy(logits, y)
    delta = softmax(logits)
    delta[np.arange(len(y)), y] -= 1.0
    delta /= len(y)
    gw = [None] * len(model.weights)
    gb = [None] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ model.weights[i].T) * (acts[i] > 0)
    return loss, gw, gb


def evaluate(model: MlpModel, X, y):
    """Top-1 accuracy and mean loss."""
    if len(y) == 0:
        raise ValueError("cannot evaluate on an empty set")
    loss, pred = forward_loss(model, X, y)
    return float(np.mean(pred == np.asarray(y))), loss


def train(model: MlpModel, train_set, test_set, epochs: int, batch_size: int = 32,
          lr: float = 1e-3, seed: int = 0, momentum: float = 0.9):
    """Mini-batch SGD with momentum. Returns a new model and its history."""
    Xtr, ytr = _check(model, *train_set)
    Xte, yte = _check(model, *test_set)
    if len(ytr) == 0 or len(yte) == 0:
        raise ValueError("train and test sets must be non-empty")
    model = model.copy()
    history = TrainHistory()
    rng = np.random.default_rng(seed)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    for _ in range(epochs):
        start = time.perf_counter()
        order = rng.permutation(len(ytr))
        for lo in range(0, len(order), batch_size):
            idx = order[lo:lo + batch_size]
            _, gw, gb = loss_and_grads(model, Xtr[idx], ytr[idx])
            for i in range(len(model.weights)):
                vel_w[i] = momentum * vel_w[i] - lr * gw[i]
                vel_b[i] = momentum * vel_b[i] - lr * gb[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]
        tr_acc, tr_loss = evaluate(model, Xtr, ytr)
        te_acc, te_loss = evaluate(model, Xte, yte)
        history.train_loss.append(tr_loss)
        history.train_acc.append(tr_acc)
        history.test_loss.append(te_loss)
        history.test_acc.append(te_acc)
        history.seconds.append(time.perf_counter() - start)
    return model, history


def write_model(model: MlpModel) -> bytes:
    out = [FGM1_MAGIC, struct.pack("<I", len(model.weights))]
    for w, b in zip(model.weights, model.biases):
        out.append(struct.pack("<II", *w.shape))
        out.append(np.asarray(w, dtype="<f4").tobytes())
        out.append(np.asarray(b, dtype="<f4").tobytes())
    return b"".join(out)


def read_model(data: bytes) -> MlpModel:
    if data[:4] != FGM1_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}")
    if len(data) < 8:
        raise FormatError("truncated FGM1 header")
    (layers,) = struct.unpack_from("<I", data, 4)
    pos = 8
    weights, biases = [], []
    for _ in range(layers):
        if len(data) < pos + 8:
            raise FormatError("truncated FGM1 layer header")
        rows, cols = struct.unpack_from("<II", data, pos)
        pos += 8
        size = (rows * cols + cols) * 4
        if len(data) < pos + size:
            raise FormatError("truncated FGM1 payload")
        w = np.frombuffer(data, dtype="<f4", count=rows * cols, offset=pos).reshape(rows, cols)
        b = np.frombuffer(data, dtype="<f4", count=cols, offset=pos + rows * cols * 4)
        weights.append(w.astype(np.float64))
        biases.append(b.astype(np.float64))
        pos += size
    for prev, nxt in zip(weights, weights[1:]):
        if prev.shape[1] != nxt.shape[0]:
            raise FormatError("FGM1 layer shapes do not chain")
    return MlpModel(weights, biases)


def _top_eigvec(X, deflate, rng, tol, max_iter):
    """Leading eigenvector of X^T X (orthogonal to ``deflate``) by power iteration."""
    def project(v):
        for u in deflate:
            v = v - (u @ v) * u
        return v

    v = project(rng.standard_normal(X.shape[1]))
    norm = np.linalg.norm(v)
    if norm == 0:
        return None
    v /= norm
    for _ in range(max_iter):
        w = project(X.T @ (X @ v))
        norm = np.linalg.norm(w)
        if norm <= 1e-300:
            return v  # remaining spectrum is zero; any orthogonal direction will do
        w /= norm
        # eigenvectors are only defined up to sign
        if w @ v < 0:
            w = -w
        if np.linalg.norm(w - v) < tol:
            return w
        v = w
    return v


def pca_fit(vectors, tol: float = 1e-10, max_iter: int = 100_000):
    """Top two principal axes as ``(mean, components, variances)``.

    Each component's first nonzero entry is positive.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or len(X) < 3:
        raise ValueError("pca needs at least 3 vectors")
    mean = X.mean(axis=0)
    Xc = X - mean
    if not np.any(Xc):
        raise ValueError("all vectors are identical; nothing to project")
    rng = np.random.default_rng(0)
    comps = []
    for _ in range(min(2, X.shape[1])):
        comps.append(_top_eigvec(Xc, comps, rng, tol, max_iter))
    for i, u in enumerate(comps):
        nz = np.flatnonzero(np.abs(u) > 1e-12)
        if nz.size and u[nz[0]] < 0:
            comps[i] = -u
    comps = np.array(comps)
    variances = (Xc @ comps.T).var(axis=0, ddof=1)
    return mean, comps, variances


def pca2(vectors, tol: float = 1e-10) -> np.ndarray:
    """Project mean-centred vectors onto their top two principal axes, shape (N, 2)."""
    mean, comps, _ = pca_fit(vectors, tol)
    points = (np.asarray(vectors, dtype=np.float64) - mean) @ comps.T
    if points.shape[1] < 2:
        points = np.column_stack([points, np.zeros(len(points))])
    return points
