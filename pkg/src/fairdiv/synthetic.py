"""Seeded synthetic instances: Gaussian blobs or shortest-path metrics."""

from __future__ import annotations

import numpy as np

from .core import Dataset


def shortest_path_metric(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall); ``inf`` marks a missing edge."""
    dist = np.array(weights, dtype=np.float64)
    np.fill_diagonal(dist, 0.0)
    for k in range(dist.shape[0]):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def random_graph_metric(n: int, rng: np.random.Generator, max_weight: int = 20, extra_edges: float = 2.0) -> np.ndarray:
    """Metric completion of a random connected graph with integer weights.

    A random spanning tree guarantees connectivity; about ``extra_edges * n``
    further edges add shortcuts.  Integer weights keep every sum exact, so the
    triangle inequality holds with no rounding slack.
    """
    w = np.full((n, n), np.inf)
    for i in range(1, n):
        j = int(rng.integers(i))
        w[i, j] = w[j, i] = float(rng.integers(1, max_weight + 1))
    for _ in range(int(extra_edges * n)):
        i, j = (int(v) for v in rng.integers(n, size=2))
        if i != j:
            c = float(rng.integers(1, max_weight + 1))
            w[i, j] = w[j, i] = min(w[i, j], c)
    return shortest_path_metric(w)


def generate_synthetic(
    n: int,
    m: int,
    dim: int = 2,
    *,
    matrix: bool = False,
    clusters: int = 3,
    spread: float = 1.0,
    seed: int = 0,
    separation: float = 10.0,
    decimals: int = 6,
) -> Dataset:
    """Deterministic instance for a given configuration.

    Groups are assigned round-robin (``g1``..``gm``) so every group is
    non-empty when ``n >= m``.  Blob mode draws ``clusters`` centres in a box
    of side ``separation * clusters`` and scatters points around them with
    standard deviation ``spread``; coordinates are rounded to ``decimals``.
    Matrix mode ignores the geometric settings.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if n < m:
        raise ValueError("need at least one point per group (n >= m)")
    rng = np.random.default_rng(seed)
    labels = [f"g{i % m + 1}" for i in range(n)]
    names = [f"g{i + 1}" for i in range(m)]
    if matrix:
        mat = random_graph_metric(n, rng)
        return Dataset.from_matrix(mat, labels, group_names=names)
    if dim < 1 or clusters < 1:
        raise ValueError("dim and clusters must be positive")
    centres = rng.uniform(0.0, separation * clusters, size=(clusters, dim))
    which = rng.integers(clusters, size=n)
    coords = centres[which] + rng.normal(0.0, spread, size=(n, dim))
    return Dataset.from_coords(np.round(coords, decimals), labels, group_names=names)


def random_quotas(dataset: Dataset, rng: np.random.Generator, max_quota: int = 3) -> tuple[int, ...]:
    """Quotas in ``1..min(max_quota, |X_i|)`` per group."""
    return tuple(int(rng.integers(1, min(max_quota, s) + 1)) for s in dataset.group_sizes())
