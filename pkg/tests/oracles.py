"""Independent brute-force oracles used to cross-check the library paths.

Everything here recomputes results from definitions with different
algorithms and different operation orders than the package code: dense
boolean reachability instead of frontier BFS, dense matmuls in an
alternative association order instead of sparse propagation, explicit
pair counting instead of rank sums, central finite differences instead
of analytic gradients.
"""

import math

import numpy as np


def dense_adjacency(graph) -> np.ndarray:
    a = np.zeros((graph.num_nodes, graph.num_nodes), dtype=bool)
    for i in range(graph.num_nodes):
        a[i, graph.row(i)] = True
    return a


def dense_khop_counts(adj: np.ndarray, labels, k: int):
    """Per-node (|neighbor_k|, positives in neighbor_k) via matrix powers."""
    n = len(adj)
    reach = np.eye(n, dtype=bool)
    step = adj.astype(np.int64)
    for _ in range(k):
        reach = reach | ((reach.astype(np.int64) @ step) > 0)
    ball = reach.copy()
    np.fill_diagonal(ball, False)
    pos = np.asarray(labels) == 1
    return ball.sum(axis=1), (ball & pos[None, :]).sum(axis=1)


def oracle_aggregates(adj: np.ndarray, labels, k: int):
    """ANCD/ANCC per class straight from the definitions (plain Python sums)."""
    ball, pos = dense_khop_counts(adj, labels, k)
    labels = np.asarray(labels)
    out = {}
    for z in (0, 1):
        ncds, nccs = [], []
        excluded = 0
        for i in range(len(adj)):
            if labels[i] != z:
                continue
            if ball[i] == 0:
                excluded += 1
                continue
            ncds.append(pos[i] / ball[i])
            nccs.append(1.0 if pos[i] > 0 else 0.0)
        if not ncds:
            out[z] = None
            continue
        out[z] = {"ancd": sum(ncds) / len(ncds), "ancc": sum(nccs) / len(nccs),
                  "counted": len(ncds), "excluded": excluded}
    return out


def brute_auc(scores, truth) -> float:
    """Pairwise win fraction: P(score+ > score-) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth)
    pos = scores[truth == 1]
    neg = scores[truth == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def dense_normalized_adjacency(graph) -> np.ndarray:
    a = dense_adjacency(graph).astype(np.float64)
    a += np.eye(graph.num_nodes)
    deg = a.sum(axis=1)
    return a / np.sqrt(np.outer(deg, deg))


def dense_forward_logprobs(model, a_norm, x, tokens=None) -> np.ndarray:
    """Forward pass with the alternative association order (A X) W."""
    pre1 = (a_norm @ x) @ model.w1 + model.b1
    h = np.where(pre1 > 0, pre1, 0.0)
    if tokens is not None:
        h = h + model.token_table[np.asarray(tokens)]
    z = (a_norm @ h) @ model.w2 + model.b2
    p = np.exp(z) / np.sum(np.exp(z), axis=1, keepdims=True)
    return np.log(p)


def fd_grad(loss_fn, arr: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of loss_fn w.r.t. arr, element by element."""
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        up = loss_fn()
        flat[i] = orig - eps
        down = loss_fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * eps)
    return grad


def t_cdf_df1(t: float) -> float:
    """Cauchy closed form."""
    return 0.5 + math.atan(t) / math.pi


def t_cdf_df2(t: float) -> float:
    """Closed form for two degrees of freedom."""
    return 0.5 * (1.0 + t / math.sqrt(2.0 + t * t))


def normal_cdf(t: float) -> float:
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))
