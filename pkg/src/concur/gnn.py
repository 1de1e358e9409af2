"""Two-layer graph-convolution classifier with a label-token prior.

The label channel adds a learned embedding row per label state to the
hidden features after the first convolution.  Token 0 is the uncertain
state carried by every node outside the training set and by training nodes
masked out for the current epoch; a known training label y maps to token
y + 1.  Training draws a fresh uniform mask over all nodes each epoch so
the model sees label-free nodes the same way inference does; at inference
every training label is fed and everything else stays uncertain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .evaluate import f1_score
from .graph import UNKNOWN, RoadGraph, Split

NUM_CLASSES = 2

_INIT_STREAM = 0
_MASK_STREAM = 1
_DECAYED = ("w1", "w2", "token_table")


def _stream_rng(seed: int, *path: int) -> np.random.Generator:
    # Independent, addressable substream: (seed, stream id[, epoch]).
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), *path]))


@dataclass
class TrainConfig:
    mask_rate: float = 0.25
    learning_rate: float = 0.2
    weight_decay: float = 5e-4
    epochs: int = 200
    hidden_dim: int = 16
    seed: int = 0
    use_cp: bool = True

    def validate(self) -> None:
        if not 0.0 < self.mask_rate < 0.5:
            raise ValueError("mask_rate must lie in (0, 0.5)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")


@dataclass
class CpGcnModel:
    """Weights of the 2-layer classifier; ``token_table`` is None for the baseline."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    token_table: np.ndarray | None

    @property
    def use_cp(self) -> bool:
        return self.token_table is not None

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        out = {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}
        if self.use_cp:
            out["token_table"] = self.token_table
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.params().values())


def count_cp_params(num_classes: int, hidden_dim: int) -> int:
    """Parameters added by the label-token table: (C + 1) * d."""
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if hidden_dim < 1:
        raise ValueError("hidden_dim must be >= 1")
    return (num_classes + 1) * hidden_dim


def init_model(num_features, hidden_dim, num_classes, rng, use_cp) -> CpGcnModel:
    """Glorot-uniform weights, zero biases, uniform token rows; fixed draw order."""
    lim1 = math.sqrt(6.0 / (num_features + hidden_dim))
    w1 = rng.uniform(-lim1, lim1, size=(num_features, hidden_dim))
    lim2 = math.sqrt(6.0 / (hidden_dim + num_classes))
    w2 = rng.uniform(-lim2, lim2, size=(hidden_dim, num_classes))
    token_table = None
    if use_cp:
        lim_t = 1.0 / math.sqrt(hidden_dim)
        token_table = rng.uniform(-lim_t, lim_t, size=(num_classes + 1, hidden_dim))
    return CpGcnModel(w1=w1, b1=np.zeros(hidden_dim), w2=w2,
                      b2=np.zeros(num_classes), token_table=token_table)


def normalize_adjacency(graph: RoadGraph) -> sp.csr_matrix:
    """Symmetric normalization with self-loops: D^{-1/2} (A + I) D^{-1/2}."""
    n = graph.num_nodes
    a = sp.csr_matrix((np.ones(graph.neighbors.size), graph.neighbors,
                       graph.offsets), shape=(n, n))
    a_hat = (a + sp.eye(n, format="csr")).tocsr()
    a_hat.sort_indices()
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    dinv = 1.0 / np.sqrt(deg)
    a_hat.data *= dinv[a_hat.indices]
    a_hat.data *= np.repeat(dinv, np.diff(a_hat.indptr))
    return a_hat


def tokenize_labels(labels, split: Split, mask) -> np.ndarray:
    """Token per node: 0 outside the train set or when masked, else label + 1."""
    labels = np.asarray(labels)
    tokens = np.zeros(len(labels), dtype=np.int64)
    train_labels = labels[split.train]
    if np.any(train_labels == UNKNOWN):
        raise ValueError("unknown label on a training node")
    tokens[split.train] = train_labels.astype(np.int64) + 1
    mask = np.asarray(mask, dtype=np.int64).ravel()
    if mask.size:
        if mask.min() < 0 or mask.max() >= len(labels):
            raise ValueError("mask index out of range")
        tokens[mask] = 0
    return tokens


def sample_mask(num_nodes: int, mask_rate: float, rng) -> np.ndarray:
    """floor(R * N) node ids drawn uniformly without replacement from all N."""
    if not 0.0 < mask_rate < 0.5:
        raise ValueError("mask_rate must lie in (0, 0.5)")
    m = int(mask_rate * num_nodes)
    return np.sort(rng.choice(num_nodes, size=m, replace=False))


def _log_softmax(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1, keepdims=True)
    s = z - m
    return s - np.log(np.sum(np.exp(s), axis=1, keepdims=True))


def forward(model: CpGcnModel, a_hat, x, tokens=None):
    """Log-probabilities (N x C) and cached activations for the backward pass."""
    if (tokens is None) and model.use_cp:
        raise ValueError("token vector required for a label-token model")
    if (tokens is not None) and not model.use_cp:
        raise ValueError("unexpected token vector for a baseline model")
    pre1 = a_hat @ (x @ model.w1) + model.b1
    h = np.maximum(pre1, 0.0)
    if model.use_cp:
        h = h + model.token_table[tokens]
    z = a_hat @ (h @ model.w2) + model.b2
    cache = {"pre1": pre1, "h": h, "logp": _log_softmax(z)}
    return cache["logp"], cache


def loss_and_grads(model: CpGcnModel, a_hat, x, tokens, labels, train_idx):
    """Mean training cross-entropy and analytic gradients of every parameter.

    Propagation uses the symmetry of the normalized adjacency; token-table
    rows that never appear in ``tokens`` receive an all-zero gradient row.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if train_idx.size == 0:
        raise ValueError("empty training set")
    labels = np.asarray(labels)
    y = labels[train_idx].astype(np.int64)
    if np.any(y == UNKNOWN):
        raise ValueError("unknown label on a training node")
    logp, cache = forward(model, a_hat, x, tokens)
    loss = float(-np.mean(logp[train_idx, y]))

    n, c = logp.shape
    dz = np.zeros((n, c))
    dz[train_idx] = np.exp(logp[train_idx])
    dz[train_idx, y] -= 1.0
    dz[train_idx] /= train_idx.size

    g2 = a_hat @ dz
    grads = {"b2": dz.sum(axis=0), "w2": cache["h"].T @ g2}
    dh = g2 @ model.w2.T
    if model.use_cp:
        dt = np.zeros_like(model.token_table)
        np.add.at(dt, np.asarray(tokens, dtype=np.int64), dh)
        grads["token_table"] = dt
    dpre1 = dh * (cache["pre1"] > 0)
    grads["b1"] = dpre1.sum(axis=0)
    grads["w1"] = x.T @ (a_hat @ dpre1)
    return loss, grads


def _check_split(graph, labels, split):
    n = graph.num_nodes
    parts = [split.train, split.valid, split.test]
    allidx = np.concatenate(parts)
    if len(allidx) != n or len(np.unique(allidx)) != n:
        raise ValueError("split must partition 0..N-1")
    labels = np.asarray(labels)
    for part in (split.train, split.valid):
        if part.size and np.any(labels[part] == UNKNOWN):
            raise ValueError("train/valid nodes must have known labels")


def _validation_f1(model, a_hat, x, labels, split):
    tokens = tokenize_labels(labels, split, np.empty(0, np.int64)) if model.use_cp else None
    logp, _ = forward(model, a_hat, x, tokens)
    if split.valid.size == 0:
        return 0.0
    pred = np.argmax(logp[split.valid], axis=1)
    return f1_score(pred, np.asarray(labels)[split.valid])


def train(graph: RoadGraph, labels, split: Split, config: TrainConfig):
    """Full-batch gradient descent with L2 weight decay; deterministic per seed.

    Each epoch draws a fresh mask (a function of seed and epoch index only),
    tokenizes, and descends the training loss.  With ``use_cp=False`` the
    token channel is omitted entirely.  Returns the trained model and the
    per-epoch ``(epoch, loss, val_f1)`` history.
    """
    config.validate()
    _check_split(graph, labels, split)
    x = graph.node_features
    if x.shape[1] == 0:
        raise ValueError("graph has no node features")
    a_hat = normalize_adjacency(graph)
    rng = _stream_rng(config.seed, _INIT_STREAM)
    model = init_model(x.shape[1], config.hidden_dim, NUM_CLASSES, rng, config.use_cp)
    history = []
    for epoch in range(config.epochs):
        if config.use_cp:
            mask_rng = _stream_rng(config.seed, _MASK_STREAM, epoch)
            mask = sample_mask(graph.num_nodes, config.mask_rate, mask_rng)
            tokens = tokenize_labels(labels, split, mask)
        else:
            tokens = None
        loss, grads = loss_and_grads(model, a_hat, x, tokens, labels, split.train)
        if not math.isfinite(loss):
            raise RuntimeError(f"training diverged at epoch {epoch}")
        for name, p in model.params().items():
            g = grads[name]
            if config.weight_decay and name in _DECAYED:
                g = g + config.weight_decay * p
            p -= config.learning_rate * g
        history.append((epoch, loss, _validation_f1(model, a_hat, x, labels, split)))
    return model, history


def predict(model: CpGcnModel, graph: RoadGraph, labels, split: Split) -> np.ndarray:
    """Per-node class probabilities from a single unmasked forward pass.

    With the label-token channel, only training-node labels are fed; every
    other node carries the uncertain token, so stored labels of valid/test
    nodes cannot influence the output.
    """
    tokens = None
    if model.use_cp:
        tokens = tokenize_labels(labels, split, np.empty(0, np.int64))
    a_hat = normalize_adjacency(graph)
    logp, _ = forward(model, a_hat, graph.node_features, tokens)
    return np.exp(logp)


def save_model(model: CpGcnModel, path, seed=None, config: TrainConfig | None = None) -> None:
    """JSON checkpoint with shape headers, seed and config echo."""
    payload = {
        "format": "concur-gcn",
        "seed": seed,
        "config": asdict(config) if config is not None else None,
        "arrays": {name: {"shape": list(p.shape), "data": p.ravel().tolist()}
                   for name, p in model.params().items()},
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_model(path):
    """Load a checkpoint; returns (model, metadata dict)."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "concur-gcn":
        raise ValueError(f"{path}: not a model checkpoint")
    arrays = {name: np.asarray(spec["data"], dtype=np.float64).reshape(spec["shape"])
              for name, spec in payload["arrays"].items()}
    model = CpGcnModel(w1=arrays["w1"], b1=arrays["b1"], w2=arrays["w2"],
                       b2=arrays["b2"], token_table=arrays.get("token_table"))
    return model, {"seed": payload.get("seed"), "config": payload.get("config")}
