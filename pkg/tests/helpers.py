"""Shared test fixtures: synthetic rasters and independent oracles.

The oracles here are deliberately naive re-derivations (flood fill, O(N^2)
distance scans, Floyd-Warshall) used to check the package's optimized
implementations.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from scribblekit.eval_sim import SkeletonGraph

OFFSETS_4 = [(-1, 0), (1, 0), (0, -1), (0, 1)]
OFFSETS_8 = OFFSETS_4 + [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def random_blob_mask(
    shape: tuple[int, int], rng: np.random.Generator, blobs: int = 3, min_pixels: int = 12
) -> np.ndarray:
    """Random smooth nonempty mask built from thresholded Gaussian bumps."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    while True:
        field = np.zeros(shape)
        for _ in range(blobs):
            cy, cx = rng.uniform(0, h), rng.uniform(0, w)
            sy, sx = rng.uniform(2, h / 3), rng.uniform(2, w / 3)
            field += np.exp(-(((yy - cy) / sy) ** 2 + ((xx - cx) / sx) ** 2))
        mask = field > np.quantile(field, rng.uniform(0.7, 0.9))
        if mask.sum() >= min_pixels:
            return mask


def two_region_sample(
    rng: np.random.Generator, size: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Constant-color foreground rectangle on a constant background.

    The foreground keeps a margin from the border so border pixels are
    trustworthy negative seeds.
    """
    margin = 4
    r0 = int(rng.integers(margin, size // 2))
    c0 = int(rng.integers(margin, size // 2))
    r1 = int(rng.integers(size // 2 + 2, size - margin))
    c1 = int(rng.integers(size // 2 + 2, size - margin))
    gt = np.zeros((size, size), bool)
    gt[r0:r1, c0:c1] = True
    fg = rng.integers(0, 256, size=3)
    while True:
        bg = rng.integers(0, 256, size=3)
        if np.linalg.norm(fg.astype(float) - bg.astype(float)) > 120:
            break
    image = np.empty((size, size, 3), np.uint8)
    image[:] = bg
    image[gt] = fg
    return image, gt


def flood_fill_labels(mask: np.ndarray, connectivity: int) -> np.ndarray:
    """Label connected regions by breadth-first flood fill, in scan order."""
    offsets = OFFSETS_4 if connectivity == 4 else OFFSETS_8
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int64)
    next_label = 0
    for r in range(h):
        for c in range(w):
            if not mask[r, c] or labels[r, c]:
                continue
            next_label += 1
            queue = deque([(r, c)])
            labels[r, c] = next_label
            while queue:
                cr, cc = queue.popleft()
                for dr, dc in offsets:
                    nr, nc = cr + dr, cc + dc
                    if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not labels[nr, nc]:
                        labels[nr, nc] = next_label
                        queue.append((nr, nc))
    return labels


def count_components(mask: np.ndarray, connectivity: int = 8) -> int:
    return int(flood_fill_labels(mask, connectivity).max())


def brute_force_edt(mask: np.ndarray) -> np.ndarray:
    """Exhaustive Euclidean distance to the nearest false pixel.

    Pixels outside the image count as false, so the straight-line distance
    to the border is an upper bound everywhere.
    """
    h, w = mask.shape
    false_pts = np.argwhere(~mask)
    out = np.zeros((h, w), dtype=float)
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            best = float(min(r + 1, h - r, c + 1, w - c))
            if len(false_pts):
                d = np.sqrt(((false_pts - (r, c)) ** 2).sum(axis=1)).min()
                best = min(best, float(d))
            out[r, c] = best
    return out


def graph_component_labels(n: int, edges: list[tuple[int, int, float]]) -> list[int]:
    """Component id per node by breadth-first search, numbered by first node."""
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    labels = [-1] * n
    comp = 0
    for start in range(n):
        if labels[start] != -1:
            continue
        queue = deque([start])
        labels[start] = comp
        while queue:
            v = queue.popleft()
            for u in adjacency[v]:
                if labels[u] == -1:
                    labels[u] = comp
                    queue.append(u)
        comp += 1
    return labels


def diameter_oracle(
    n: int, edges: list[tuple[int, int, float]]
) -> tuple[float, tuple[int, int]]:
    """All-pairs maximum shortest path via Floyd-Warshall.

    Returns (length, (a, b)) where (a, b) is the lexicographically smallest
    node-index pair among maxima (scanned in order, strict improvement
    only).
    """
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for i, j, w in edges:
        dist[i, j] = dist[j, i] = min(dist[i, j], w)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    best = -1.0
    pair = (0, 0)
    for a in range(n):
        for b in range(a, n):
            if np.isfinite(dist[a, b]) and dist[a, b] > best + 1e-9:
                best = float(dist[a, b])
                pair = (a, b)
    return best, pair


def random_node_coords(rng: np.random.Generator, n: int, extent: int = 24) -> np.ndarray:
    """``n`` distinct (row, col) coordinates in raster order."""
    cells = rng.choice(extent * extent, size=n, replace=False)
    coords = np.stack([cells // extent, cells % extent], axis=1)
    return coords[np.lexsort((coords[:, 1], coords[:, 0]))]


def random_tree(rng: np.random.Generator, max_nodes: int = 12) -> SkeletonGraph:
    """Random tree over distinct grid points; edge length = point distance."""
    n = int(rng.integers(1, max_nodes + 1))
    coords = random_node_coords(rng, n)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        length = float(np.hypot(*(coords[u] - coords[v]).astype(float)))
        edges.append((min(u, v), max(u, v), length))
    labels = graph_component_labels(n, edges)
    return SkeletonGraph(nodes=coords, edges=edges, component_ids=np.asarray(labels))


def random_graph(rng: np.random.Generator, max_nodes: int = 14) -> SkeletonGraph:
    """Random undirected graph with Euclidean edge lengths."""
    n = int(rng.integers(1, max_nodes + 1))
    coords = random_node_coords(rng, n)
    edges = []
    p = rng.uniform(0.1, 0.5)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                length = float(np.hypot(*(coords[i] - coords[j]).astype(float)))
                edges.append((i, j, length))
    labels = graph_component_labels(n, edges)
    return SkeletonGraph(nodes=coords, edges=edges, component_ids=np.asarray(labels))
