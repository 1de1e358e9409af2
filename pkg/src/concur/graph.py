"""Monolithic road-graph data model: CSR adjacency, features, labels, splits.

The graph is stored undirected: every edge appears in both endpoint rows and
neighbor lists are strictly ascending.  Node labels are ``0`` (negative),
``1`` (positive) or :data:`UNKNOWN` (``-1``, written as ``?`` in nodes.csv)
for nodes whose incident status is hidden.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NEGATIVE = 0
POSITIVE = 1
UNKNOWN = -1

_LABEL_TEXT = {NEGATIVE: "0", POSITIVE: "1", UNKNOWN: "?"}
_TEXT_LABEL = {"0": NEGATIVE, "1": POSITIVE, "?": UNKNOWN}


class GraphFormatError(ValueError):
    """Malformed nodes/edges CSV input (message carries file and line)."""


@dataclass
class RoadGraph:
    """Immutable undirected graph with node and edge features.

    ``offsets`` has length ``num_nodes + 1`` and ``neighbors`` has length
    ``2 * num_edges``; row ``i`` is ``neighbors[offsets[i]:offsets[i+1]]``.
    ``edge_features`` rows follow the canonical edge order: pairs ``(u, v)``
    with ``u < v`` sorted lexicographically.
    """

    num_nodes: int
    num_edges: int
    offsets: np.ndarray
    neighbors: np.ndarray
    node_features: np.ndarray
    edge_features: np.ndarray

    def __post_init__(self):
        for arr in (self.offsets, self.neighbors, self.node_features, self.edge_features):
            arr.setflags(write=False)

    @property
    def degrees(self) -> np.ndarray:
        return self.offsets[1:] - self.offsets[:-1]

    def row(self, i: int) -> np.ndarray:
        """Sorted neighbor ids of node ``i``."""
        return self.neighbors[self.offsets[i]:self.offsets[i + 1]]

    def edge_pairs(self) -> np.ndarray:
        """Canonical (E, 2) array of undirected edges, u < v, lexicographic."""
        src = np.repeat(np.arange(self.num_nodes), self.degrees)
        fwd = src < self.neighbors
        return np.column_stack([src[fwd], self.neighbors[fwd]])

    @classmethod
    def from_edges(cls, num_nodes, edges, node_features=None, edge_features=None):
        """Build a graph from an arbitrary edge list.

        Self-loops are dropped and duplicate undirected edges collapsed
        (first occurrence keeps its feature row).  Callers that need to
        report those events count them before calling.
        """
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= num_nodes):
            raise ValueError("edge endpoint out of range")
        if node_features is None:
            node_features = np.zeros((num_nodes, 0))
        node_features = np.ascontiguousarray(node_features, dtype=np.float64)
        if node_features.shape[0] != num_nodes:
            raise ValueError("node_features row count != num_nodes")

        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        keep = lo != hi
        lo, hi = lo[keep], hi[keep]
        if edge_features is not None:
            edge_features = np.ascontiguousarray(edge_features, dtype=np.float64)[keep]

        key = lo * num_nodes + hi
        order = np.argsort(key, kind="stable")
        key = key[order]
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        lo, hi = lo[order][first], hi[order][first]
        num_edges = len(lo)
        if edge_features is None:
            edge_features = np.zeros((num_edges, 0))
        else:
            edge_features = edge_features[order][first]

        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        perm = np.lexsort((dst, src))
        neighbors = dst[perm]
        offsets = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=num_nodes), out=offsets[1:])
        return cls(num_nodes, num_edges, offsets, neighbors, node_features, edge_features)


def validate(graph: RoadGraph) -> list[str]:
    """Check every RoadGraph invariant; returns a list of violations (empty = ok)."""
    v = []
    n, e = graph.num_nodes, graph.num_edges
    off, nbr = graph.offsets, graph.neighbors
    if len(off) != n + 1 or off[0] != 0:
        v.append("offsets must have length N+1 and start at 0")
        return v
    if np.any(off[1:] < off[:-1]):
        v.append("non-monotone offsets")
        return v
    if off[-1] != len(nbr) or len(nbr) != 2 * e:
        v.append("offsets[N] != 2E")
        return v
    if len(nbr) and (nbr.min() < 0 or nbr.max() >= n):
        v.append("neighbor id out of range")
        return v
    src = np.repeat(np.arange(n), graph.degrees)
    if np.any(src == nbr):
        v.append("self-loop in adjacency")
    for i in range(n):
        row = graph.row(i)
        if len(row) > 1 and np.any(row[1:] <= row[:-1]):
            if np.any(row[1:] == row[:-1]):
                v.append(f"duplicate neighbor in row {i}")
            else:
                v.append(f"unsorted neighbor row {i}")
            break
    fwd = np.sort(src * n + nbr)
    rev = np.sort(nbr * n + src)
    if not np.array_equal(fwd, rev):
        v.append("adjacency not symmetric")
    if graph.node_features.shape[0] != n:
        v.append("node_features row count != N")
    if graph.edge_features.shape[0] != e:
        v.append("edge_features row count != E")
    if graph.node_features.size and not np.all(np.isfinite(graph.node_features)):
        v.append("non-finite node feature")
    if graph.edge_features.size and not np.all(np.isfinite(graph.edge_features)):
        v.append("non-finite edge feature")
    return v


def _read_nodes(path):
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise GraphFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2 or header[0] != "node_id" or header[-1] != "label":
        raise GraphFormatError(f"{path}:1: header must be node_id,f_0,...,label")
    dim = len(header) - 2
    ids, feats, labels = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        row = line.split(",")
        if len(row) != len(header):
            raise GraphFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            ids.append(int(row[0]))
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: bad node id {row[0]!r}") from None
        try:
            vals = [float(tok) for tok in row[1:-1]]
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: bad feature value") from None
        if not all(math.isfinite(x) for x in vals):
            raise GraphFormatError(f"{path}:{lineno}: non-finite feature value")
        feats.append(vals)
        lab = _TEXT_LABEL.get(row[-1].strip())
        if lab is None:
            raise GraphFormatError(f"{path}:{lineno}: bad label {row[-1]!r}")
        labels.append(lab)
    n = len(ids)
    if n == 0:
        raise GraphFormatError(f"{path}: no node rows")
    id_arr = np.asarray(ids, dtype=np.int64)
    uniq = np.unique(id_arr)
    if len(uniq) != n or uniq[0] != 0 or uniq[-1] != n - 1:
        raise GraphFormatError(f"{path}: node ids must be contiguous 0..N-1")
    order = np.argsort(id_arr)
    x = np.asarray(feats, dtype=np.float64).reshape(n, dim)[order]
    y = np.asarray(labels, dtype=np.int8)[order]
    return x, y


def _read_edges(path, num_nodes):
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise GraphFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 2 or header[0] != "src" or header[1] != "dst":
        raise GraphFormatError(f"{path}:1: header must be src,dst,g_0,...")
    dim = len(header) - 2
    pairs, feats = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        row = line.split(",")
        if len(row) != len(header):
            raise GraphFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            u, v = int(row[0]), int(row[1])
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: bad edge endpoint") from None
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise GraphFormatError(f"{path}:{lineno}: dangling node id ({u},{v})")
        try:
            vals = [float(tok) for tok in row[2:]]
        except ValueError:
            raise GraphFormatError(f"{path}:{lineno}: bad feature value") from None
        if not all(math.isfinite(x) for x in vals):
            raise GraphFormatError(f"{path}:{lineno}: non-finite feature value")
        pairs.append((u, v))
        feats.append(vals)
    pair_arr = np.asarray(pairs, dtype=np.int64).reshape(len(pairs), 2)
    feat_arr = np.asarray(feats, dtype=np.float64).reshape(len(pairs), dim)
    return pair_arr, feat_arr


def load_graph(nodes_path, edges_path) -> RoadGraph:
    """Load and validate a graph from the nodes.csv / edges.csv pair.

    Directed input edges are symmetrized; self-loops are dropped and
    duplicate undirected edges collapsed, each with a counted warning.
    """
    x, _ = _read_nodes(nodes_path)
    pairs, efeats = _read_edges(edges_path, num_nodes=len(x))
    loops = int(np.sum(pairs[:, 0] == pairs[:, 1])) if len(pairs) else 0
    if loops:
        warnings.warn(f"dropped {loops} self-loop edge(s)", stacklevel=2)
    if len(pairs):
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        keep = lo != hi
        dups = int(keep.sum()) - len(np.unique(lo[keep] * len(x) + hi[keep]))
        if dups:
            warnings.warn(f"collapsed {dups} duplicate undirected edge(s)", stacklevel=2)
    return RoadGraph.from_edges(len(x), pairs, node_features=x, edge_features=efeats)


def load_labels(nodes_path) -> np.ndarray:
    """Label column of nodes.csv as an int8 array ({0, 1, UNKNOWN})."""
    _, y = _read_nodes(nodes_path)
    return y


def load_dataset(nodes_path, edges_path):
    """Load (RoadGraph, labels) with a single parse of nodes.csv."""
    x, y = _read_nodes(nodes_path)
    pairs, efeats = _read_edges(edges_path, num_nodes=len(x))
    graph = RoadGraph.from_edges(len(x), pairs, node_features=x, edge_features=efeats)
    return graph, y


def save_dataset(graph: RoadGraph, labels, nodes_path, edges_path) -> None:
    """Write nodes.csv / edges.csv; byte-deterministic, round-trips exactly."""
    labels = np.asarray(labels)
    if len(labels) != graph.num_nodes:
        raise ValueError("label vector length != num_nodes")
    d1 = graph.node_features.shape[1]
    d2 = graph.edge_features.shape[1]
    with Path(nodes_path).open("w", encoding="utf-8", newline="\n") as fh:
        cols = ["node_id"] + [f"f_{j}" for j in range(d1)] + ["label"]
        fh.write(",".join(cols) + "\n")
        for i in range(graph.num_nodes):
            row = [str(i)]
            row += [repr(float(v)) for v in graph.node_features[i]]
            row.append(_LABEL_TEXT[int(labels[i])])
            fh.write(",".join(row) + "\n")
    with Path(edges_path).open("w", encoding="utf-8", newline="\n") as fh:
        cols = ["src", "dst"] + [f"g_{j}" for j in range(d2)]
        fh.write(",".join(cols) + "\n")
        for e, (u, v) in enumerate(graph.edge_pairs()):
            row = [str(u), str(v)]
            row += [repr(float(w)) for w in graph.edge_features[e]]
            fh.write(",".join(row) + "\n")


@dataclass
class Split:
    """Disjoint train/valid/test node index sets covering 0..N-1."""

    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray

    def to_dict(self):
        return {"train": self.train.tolist(),
                "valid": self.valid.tolist(),
                "test": self.test.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(*(np.asarray(sorted(d[k]), dtype=np.int64)
                     for k in ("train", "valid", "test")))


def save_split(split: Split, path) -> None:
    Path(path).write_text(json.dumps(split.to_dict(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_split(path) -> Split:
    return Split.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def stratified_split(labels, ratios, seed: int) -> Split:
    """Per-class split into train/valid/test.

    Within each class, valid and test receive ``floor(ratio * class_size)``
    members and train the remainder, so training always absorbs the rounding
    surplus.  Assignment within a class is a seeded uniform shuffle.
    """
    labels = np.asarray(labels)
    if np.any(labels == UNKNOWN):
        raise ValueError("stratified_split requires fully known labels")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive fractions")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    _, r_valid, r_test = ratios
    rng = np.random.default_rng(seed)
    parts = {"train": [], "valid": [], "test": []}
    for z in np.unique(labels):
        idx = np.flatnonzero(labels == z)
        if len(idx) < 3:
            raise ValueError(f"class {int(z)} has fewer than 3 members")
        perm = rng.permutation(idx)
        n_valid = int(r_valid * len(idx))
        n_test = int(r_test * len(idx))
        parts["valid"].append(perm[:n_valid])
        parts["test"].append(perm[n_valid:n_valid + n_test])
        parts["train"].append(perm[n_valid + n_test:])
    return Split(*(np.sort(np.concatenate(parts[k]).astype(np.int64))
                   for k in ("train", "valid", "test")))
