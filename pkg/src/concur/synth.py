"""Synthetic road-like graphs with planted spatial incident clustering.

Topologies are a 4-connected grid lattice or a random geometric graph on
the unit square.  Positive labels grow by seeded diffusion from a few
cluster seeds, so nearby nodes share incident status and the concurrency
effect is present by construction; an independent-label mode provides the
matching negative control.  Node features are Gaussian noise plus a small
label-dependent mean shift, leaving the label channel with residual
information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .graph import RoadGraph

TOPOLOGIES = ("grid", "rgg")
LABEL_MODES = ("planted", "independent")

# Positive-ratio guidance observed across real state/city road datasets.
MIN_POSITIVE_RATIO = 0.04
MAX_POSITIVE_RATIO = 0.31


@dataclass
class SynthConfig:
    num_nodes: int = 2500
    topology: str = "grid"
    geo_radius: float = 0.035
    num_seeds: int = 12
    diffusion_prob: float = 0.6
    diffusion_rounds: int = 60
    target_positive_ratio: float = 0.10
    feature_dim: int = 8
    feature_signal: float = 0.3
    seed: int = 0
    label_mode: str = "planted"

    def validate(self) -> None:
        if self.num_nodes < 4:
            raise ValueError("num_nodes must be >= 4")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        if self.topology == "rgg" and self.geo_radius <= 0:
            raise ValueError("geo_radius must be positive")
        if not MIN_POSITIVE_RATIO <= self.target_positive_ratio <= MAX_POSITIVE_RATIO:
            raise ValueError(
                f"target_positive_ratio must lie in "
                f"[{MIN_POSITIVE_RATIO}, {MAX_POSITIVE_RATIO}]")
        if self.num_seeds < 1:
            raise ValueError("num_seeds must be >= 1")
        if not 0.0 <= self.diffusion_prob <= 1.0:
            raise ValueError("diffusion_prob must lie in [0, 1]")
        if self.diffusion_rounds < 0:
            raise ValueError("diffusion_rounds must be >= 0")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if not 0.0 <= self.feature_signal <= 1.0:
            raise ValueError("feature_signal must lie in [0, 1]")
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")


def _seed_seq(seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed & (2**64 - 1), *path])


def _largest_component(num_nodes, pairs):
    """Node ids of the largest connected component (ascending)."""
    adj = [[] for _ in range(num_nodes)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    comp = np.full(num_nodes, -1, dtype=np.int64)
    best_id, best_size = -1, 0
    cid = 0
    for s in range(num_nodes):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = cid
        size = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if comp[v] < 0:
                    comp[v] = cid
                    stack.append(v)
                    size += 1
        if size > best_size:
            best_id, best_size = cid, size
        cid += 1
    return np.flatnonzero(comp == best_id)


def generate_topology(config: SynthConfig) -> RoadGraph:
    """Adjacency skeleton (no features yet); deterministic per config seed."""
    config.validate()
    if config.topology == "grid":
        h = math.isqrt(config.num_nodes)
        w = config.num_nodes // h
        n = h * w
        ids = np.arange(n).reshape(h, w)
        right = np.column_stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()])
        down = np.column_stack([ids[:-1, :].ravel(), ids[1:, :].ravel()])
        return RoadGraph.from_edges(n, np.vstack([right, down]))

    rng = np.random.default_rng(_seed_seq(config.seed, 0))
    pts = rng.random((config.num_nodes, 2))
    pairs = cKDTree(pts).query_pairs(config.geo_radius, output_type="ndarray")
    keep = _largest_component(config.num_nodes, pairs)
    if len(keep) < config.num_nodes / 2:
        raise ValueError(
            f"radius too small: largest component has {len(keep)} of "
            f"{config.num_nodes} nodes")
    relabel = np.full(config.num_nodes, -1, dtype=np.int64)
    relabel[keep] = np.arange(len(keep))
    mask = np.isin(pairs[:, 0], keep) & np.isin(pairs[:, 1], keep)
    return RoadGraph.from_edges(len(keep), relabel[pairs[mask]])


def plant_labels(graph: RoadGraph, config: SynthConfig, rng) -> np.ndarray:
    """Diffusion-planted positives: seeds plus rounds of neighbor infection.

    Each node draws one susceptibility uniform up front and turns positive
    when exposed iff that draw is below ``diffusion_prob``; this coupling
    makes the final positive count monotone in the probability for a fixed
    seed stream.  Growth stops once the target count is reached (mid-round
    additions are truncated in ascending node order).
    """
    config.validate()
    n = graph.num_nodes
    target = max(1, round(config.target_positive_ratio * n))
    if config.num_seeds > target:
        raise ValueError("num_seeds exceeds the target positive count")
    suscept = rng.random(n)
    seeds = rng.choice(n, size=config.num_seeds, replace=False)
    pos = np.zeros(n, dtype=bool)
    pos[seeds] = True
    count = int(config.num_seeds)
    offsets, neighbors = graph.offsets, graph.neighbors
    for _ in range(config.diffusion_rounds):
        if count >= target:
            break
        exposed = np.zeros(n, dtype=bool)
        src = np.flatnonzero(pos)
        for u in src:
            exposed[neighbors[offsets[u]:offsets[u + 1]]] = True
        cand = np.flatnonzero(exposed & ~pos)
        newly = cand[suscept[cand] < config.diffusion_prob]
        if newly.size == 0:
            break
        if count + newly.size > target:
            newly = newly[:target - count]
        pos[newly] = True
        count += int(newly.size)
    if count < math.ceil(0.8 * target):
        raise ValueError(
            f"unreachable target ratio: planted {count} positives, "
            f"target {target}")
    return pos.astype(np.int8)


def plant_labels_independent(graph: RoadGraph, config: SynthConfig, rng) -> np.ndarray:
    """Negative control: the target number of positives placed uniformly."""
    config.validate()
    n = graph.num_nodes
    target = max(1, round(config.target_positive_ratio * n))
    pos = np.zeros(n, dtype=bool)
    pos[rng.choice(n, size=target, replace=False)] = True
    return pos.astype(np.int8)


def generate_features(graph: RoadGraph, labels, config: SynthConfig, rng) -> np.ndarray:
    """Standard-normal features plus a label-dependent shift on the first half."""
    config.validate()
    n = graph.num_nodes
    x = rng.standard_normal((n, config.feature_dim))
    m = max(1, config.feature_dim // 2)
    shift = np.where(np.asarray(labels) == 1, config.feature_signal,
                     -config.feature_signal)
    x[:, :m] += shift[:, None]
    return x


def generate_dataset(config: SynthConfig):
    """Full (RoadGraph, labels) dataset; deterministic per config."""
    config.validate()
    skeleton = generate_topology(config)
    label_rng = np.random.default_rng(_seed_seq(config.seed, 1))
    if config.label_mode == "planted":
        labels = plant_labels(skeleton, config, label_rng)
    else:
        labels = plant_labels_independent(skeleton, config, label_rng)
    feat_rng = np.random.default_rng(_seed_seq(config.seed, 2))
    x = generate_features(skeleton, labels, config, feat_rng)
    graph = RoadGraph(skeleton.num_nodes, skeleton.num_edges, skeleton.offsets,
                      skeleton.neighbors, np.ascontiguousarray(x),
                      skeleton.edge_features)
    return graph, labels


def jitter_configs(template: SynthConfig, num_datasets: int, seed: int) -> list[SynthConfig]:
    """Independent per-dataset configs with jittered size and positive ratio."""
    template.validate()
    if num_datasets < 1:
        raise ValueError("num_datasets must be >= 1")
    configs = []
    for j in range(num_datasets):
        rng = np.random.default_rng(_seed_seq(seed, 100, j))
        scale = rng.uniform(0.8, 1.2)
        ratio = float(np.clip(template.target_positive_ratio * rng.uniform(0.85, 1.15),
                              MIN_POSITIVE_RATIO, MAX_POSITIVE_RATIO))
        num_nodes = max(4, int(round(template.num_nodes * scale)))
        target = max(1, round(ratio * num_nodes))
        num_seeds = min(max(1, int(round(template.num_seeds * scale))), target)
        configs.append(replace(template, num_nodes=num_nodes,
                               target_positive_ratio=ratio, num_seeds=num_seeds,
                               seed=int(rng.integers(2**31))))
    return configs


def generate_suite(num_datasets: int, template: SynthConfig, seed: int):
    """J independent datasets with jittered configs; deterministic per seed."""
    return [generate_dataset(cfg) for cfg in jitter_configs(template, num_datasets, seed)]
