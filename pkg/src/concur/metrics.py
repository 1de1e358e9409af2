"""k-hop neighborhood incident metrics.

For a node i, ``neighbor_k(i)`` is the set of nodes other than i whose hop
distance from i is at most k.  Over a fully labeled graph:

  NCD_i   fraction of neighbor_k(i) that is positive (undefined when empty)
  NCC_i   1 iff neighbor_k(i) contains a positive node, else 0
  ANCD_z  mean NCD_i over class-z nodes with non-empty neighborhoods
  ANCC_z  mean NCC_i over the same node set

Degree-zero nodes have empty neighborhoods at every k; they are excluded
from both averages and counted in ``excluded_isolated``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import UNKNOWN, RoadGraph

DEFAULT_HOPS = (1, 2, 4, 8, 10)


@dataclass
class MetricReport:
    """ANCD/ANCC aggregates per (class, k), plus exclusion bookkeeping."""

    ks: list[int]
    ancd: dict[int, list[float]]
    ancc: dict[int, list[float]]
    counted: dict[int, list[int]]
    excluded: dict[int, list[int]]

    def value(self, metric: str, z: int, k: int) -> float:
        table = {"ANCD": self.ancd, "ANCC": self.ancc}[metric.upper()]
        if k not in self.ks:
            raise ValueError(f"k={k} not computed in report (have {self.ks})")
        return table[z][self.ks.index(k)]

    def to_dict(self) -> dict:
        return {
            "k": list(self.ks),
            "ancd": {str(z): list(v) for z, v in self.ancd.items()},
            "ancc": {str(z): list(v) for z, v in self.ancc.items()},
            "counted": {str(z): list(v) for z, v in self.counted.items()},
            "excluded": {str(z): list(v) for z, v in self.excluded.items()},
        }

    @classmethod
    def from_dict(cls, d) -> "MetricReport":
        as_int = lambda m: {int(z): list(v) for z, v in m.items()}
        return cls(list(d["k"]), as_int(d["ancd"]), as_int(d["ancc"]),
                   as_int(d["counted"]), as_int(d["excluded"]))


def _require_known(labels):
    labels = np.asarray(labels)
    if np.any(labels == UNKNOWN):
        raise ValueError("metrics require fully known labels")
    return labels


def khop_neighbors(graph: RoadGraph, i: int, k: int) -> set[int]:
    """Nodes j != i with hop distance(i, j) <= k."""
    if not 0 <= i < graph.num_nodes:
        raise ValueError(f"node id {i} out of range")
    if k < 1:
        raise ValueError("k must be >= 1")
    seen = {i}
    frontier = [i]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for v in graph.row(u):
                v = int(v)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    seen.discard(i)
    return seen


def ncd(graph: RoadGraph, labels, i: int, k: int):
    """Positive fraction of neighbor_k(i); None when the set is empty."""
    labels = np.asarray(labels)
    nbrs = khop_neighbors(graph, i, k)
    if not nbrs:
        return None
    idx = np.fromiter(nbrs, dtype=np.int64)
    if np.any(labels[idx] == UNKNOWN):
        raise ValueError("unknown label in neighbor set")
    return float(np.sum(labels[idx] == 1)) / len(idx)


def ncc(graph: RoadGraph, labels, i: int, k: int) -> int:
    """1 iff neighbor_k(i) contains a positive node; isolated node -> 0."""
    labels = np.asarray(labels)
    nbrs = khop_neighbors(graph, i, k)
    if not nbrs:
        return 0
    idx = np.fromiter(nbrs, dtype=np.int64)
    if np.any(labels[idx] == UNKNOWN):
        raise ValueError("unknown label in neighbor set")
    return int(np.any(labels[idx] == 1))


def _scan_range(lo, hi, offsets, nbrs, pos01, ks, ball_out, pos_out):
    # Per-node frontier BFS with an epoch-stamped visited buffer; ks sorted.
    n = len(offsets) - 1
    ncols = len(ks)
    kmax = ks[-1]
    stamp = [-1] * n
    queue = [0] * n
    for i in range(lo, hi):
        stamp[i] = i
        queue[0] = i
        head, tail = 0, 1
        cum_pos = 0
        level = 0
        col = 0
        while col < ncols:
            if head < tail and level < kmax:
                level += 1
                level_end = tail
                while head < level_end:
                    u = queue[head]
                    head += 1
                    for idx in range(offsets[u], offsets[u + 1]):
                        v = nbrs[idx]
                        if stamp[v] != i:
                            stamp[v] = i
                            queue[tail] = v
                            tail += 1
                            cum_pos += pos01[v]
                while col < ncols and ks[col] == level:
                    ball_out[i, col] = tail - 1
                    pos_out[i, col] = cum_pos
                    col += 1
            else:
                ball_out[i, col] = tail - 1
                pos_out[i, col] = cum_pos
                col += 1


def _khop_counts(graph, ks, pos_mask, workers=1):
    """Per-node neighborhood sizes and positive counts for each k in ks."""
    n = graph.num_nodes
    ball = np.zeros((n, len(ks)), dtype=np.int64)
    pos = np.zeros((n, len(ks)), dtype=np.int64)
    offsets = graph.offsets.tolist()
    nbrs = graph.neighbors.tolist()
    pos01 = pos_mask.astype(np.int64).tolist()
    if workers <= 1 or n < 2:
        _scan_range(0, n, offsets, nbrs, pos01, ks, ball, pos)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_scan_range, bounds[w], bounds[w + 1],
                                offsets, nbrs, pos01, ks, ball, pos)
                    for w in range(workers)]
            for f in futs:
                f.result()
    return ball, pos


def _aggregate(graph, labels, ks, workers=1):
    labels = _require_known(labels)
    if len(labels) != graph.num_nodes:
        raise ValueError("label vector length != num_nodes")
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("hop bounds must be >= 1")
    ball, pos = _khop_counts(graph, ks, labels == 1, workers=workers)
    report = MetricReport(ks, {}, {}, {}, {})
    for z in (0, 1):
        zmask = labels == z
        report.ancd[z], report.ancc[z] = [], []
        report.counted[z], report.excluded[z] = [], []
        for c in range(len(ks)):
            elig = zmask & (ball[:, c] > 0)
            cnt = int(elig.sum())
            if cnt == 0:
                raise ValueError(f"no eligible class-{z} node (k={ks[c]})")
            vals = pos[elig, c] / ball[elig, c]
            report.ancd[z].append(float(np.sum(vals) / cnt))
            report.ancc[z].append(float(np.sum(pos[elig, c] > 0) / cnt))
            report.counted[z].append(cnt)
            report.excluded[z].append(int(zmask.sum()) - cnt)
    return report


def ancd(graph: RoadGraph, labels, z: int, k: int):
    """Class-z average of NCD at hop bound k -> (mean, excluded_isolated)."""
    if z not in (0, 1):
        raise ValueError("class must be 0 or 1")
    rep = _aggregate(graph, labels, [k])
    return rep.ancd[z][0], rep.excluded[z][0]


def ancc(graph: RoadGraph, labels, z: int, k: int):
    """Class-z average of NCC at hop bound k -> (mean, excluded_isolated)."""
    if z not in (0, 1):
        raise ValueError("class must be 0 or 1")
    rep = _aggregate(graph, labels, [k])
    return rep.ancc[z][0], rep.excluded[z][0]


def metric_report(graph: RoadGraph, labels, ks=DEFAULT_HOPS, workers: int = 1) -> MetricReport:
    """All four aggregates for every (class, k); worker-count independent.

    Workers share the read-only graph; each owns a private visited buffer
    and writes per-node integer counts into a preallocated array by node
    id, so the sequential reduction is bitwise identical for any worker
    count.
    """
    return _aggregate(graph, labels, ks, workers=workers)
