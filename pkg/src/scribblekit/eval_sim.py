"""Deterministic evaluation-time scribble generation.

Given a ground truth and a prediction, the largest error region is reduced
to its skeleton, the skeleton becomes a radius-neighbor graph, cycles are
removed, and the longest shortest path through the remaining forest is
drawn as a smooth stroke clipped to the error region. There is no
randomness anywhere on this path: identical inputs give bit-identical
scribbles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import as_mask, error_regions, largest_label
from .skeleton import medial_axis
from .strokes import Polarity, Stroke, catmull_rom, rasterize_polyline

# Distances that differ by less than this are treated as equal when picking
# path endpoints; edge lengths are sums of 1 and sqrt(2), whose distinct
# values at skeleton scale are separated by far more.
_TIE_EPS = 1e-9

_MAX_CONTROL_POINTS = 8


@dataclass
class SkeletonGraph:
    """Radius-neighbor graph over skeleton pixels.

    ``nodes`` is an (n, 2) array of (row, col) in raster order; ``edges``
    holds (i, j, length) with i < j; ``component_ids`` numbers connected
    components 0..k-1 by first node appearance.
    """

    nodes: np.ndarray
    edges: list[tuple[int, int, float]]
    component_ids: np.ndarray

    @property
    def num_components(self) -> int:
        return int(self.component_ids.max()) + 1 if len(self.component_ids) else 0


@dataclass
class Converged:
    """Marker result: prediction already matches ground truth."""


@dataclass
class EvalScribble:
    """One deterministic corrective stroke and the region it corrects."""

    stroke: Stroke
    raster: np.ndarray
    polarity: Polarity
    source_region: np.ndarray


@dataclass
class AutoScribbleConfig:
    """Knobs of the deterministic generator.

    ``largest_only`` keeps the stroke on the single largest error region;
    switching it off spans all regions of the winning polarity.
    """

    radius: float = 1.5
    thickness: int = 3
    largest_only: bool = True


class _DisjointSet:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def _component_ids(n: int, edges: list[tuple[int, int, float]]) -> np.ndarray:
    ds = _DisjointSet(n)
    for i, j, _ in edges:
        ds.union(i, j)
    ids = np.empty(n, dtype=np.intp)
    seen: dict[int, int] = {}
    for v in range(n):
        root = ds.find(v)
        ids[v] = seen.setdefault(root, len(seen))
    return ids


def build_graph(skeleton: np.ndarray, radius: float = 1.5) -> SkeletonGraph:
    """Connect skeleton pixels whose Euclidean distance is below ``radius``."""
    skeleton = as_mask(skeleton)
    nodes = np.argwhere(skeleton)
    if len(nodes) == 0:
        raise ValueError("build_graph requires a nonempty skeleton")
    index = {(int(r), int(c)): i for i, (r, c) in enumerate(nodes)}
    window = int(np.ceil(radius))
    offsets = [
        (dr, dc)
        for dr in range(0, window + 1)
        for dc in range(-window, window + 1)
        if (dr, dc) > (0, 0) and 0 < np.hypot(dr, dc) < radius
    ]
    edges: list[tuple[int, int, float]] = []
    for i, (r, c) in enumerate(nodes):
        for dr, dc in offsets:
            j = index.get((int(r) + dr, int(c) + dc))
            if j is not None:
                edges.append((i, j, float(np.hypot(dr, dc))))
    edges.sort(key=lambda e: (e[0], e[1]))
    return SkeletonGraph(nodes=nodes, edges=edges, component_ids=_component_ids(len(nodes), edges))


def remove_cycles(g: SkeletonGraph) -> SkeletonGraph:
    """Spanning forest of the graph: nodes and components unchanged, no cycles.

    Edges are considered longest first (ties by endpoint indices) and an
    edge is dropped when it would close a cycle, so diagonal skeleton steps
    survive over redundant axis-aligned ones.
    """
    ds = _DisjointSet(len(g.nodes))
    kept = [e for e in sorted(g.edges, key=lambda e: (-e[2], e[0], e[1])) if ds.union(e[0], e[1])]
    kept.sort(key=lambda e: (e[0], e[1]))
    return SkeletonGraph(nodes=g.nodes, edges=kept, component_ids=g.component_ids.copy())


def _adjacency(g: SkeletonGraph) -> list[list[tuple[int, float]]]:
    adj: list[list[tuple[int, float]]] = [[] for _ in range(len(g.nodes))]
    for i, j, w in g.edges:
        adj[i].append((j, w))
        adj[j].append((i, w))
    return adj


def _tree_distances(
    adj: list[list[tuple[int, float]]], src: int
) -> tuple[np.ndarray, np.ndarray]:
    """Path lengths and parents from ``src`` within its tree."""
    n = len(adj)
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.intp)
    dist[src] = 0.0
    stack = [src]
    while stack:
        v = stack.pop()
        for u, w in adj[v]:
            if np.isinf(dist[u]):
                dist[u] = dist[v] + w
                parent[u] = v
                stack.append(u)
    return dist, parent


def _farthest(dist: np.ndarray, members: np.ndarray) -> int:
    best = float(dist[members].max())
    return int(members[dist[members] >= best - _TIE_EPS][0])


def tree_path(g: SkeletonGraph, start: int, end: int) -> list[int]:
    """Unique path between two nodes of the same tree (node indices)."""
    dist, parent = _tree_distances(_adjacency(g), start)
    if np.isinf(dist[end]):
        raise ValueError("nodes lie in different components")
    path = [end]
    while path[-1] != start:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return path


def longest_path(g: SkeletonGraph) -> np.ndarray:
    """Longest shortest path across the forest, as (row, col) coordinates.

    Equals the all-pairs maximum on each tree (double-sweep plus
    eccentricity filtering); among equally long paths the one with the
    lexicographically smallest (start, end) node pair wins, and nodes are
    ordered by (row, col) because they are stored in raster order.
    """
    if len(g.nodes) == 0:
        raise ValueError("longest_path requires a nonempty graph")
    adj = _adjacency(g)
    best: tuple[float, int, int] | None = None
    best_path: list[int] = []
    for comp in range(g.num_components):
        members = np.flatnonzero(g.component_ids == comp)
        dist0, _ = _tree_distances(adj, int(members[0]))
        a = _farthest(dist0, members)
        dist_a, _ = _tree_distances(adj, a)
        b = _farthest(dist_a, members)
        diameter = float(dist_a[b])
        dist_b, _ = _tree_distances(adj, b)
        # On a tree, max(dist to either diameter endpoint) is the
        # eccentricity, so this finds every node that can start a
        # diameter-length path.
        ecc = np.maximum(dist_a[members], dist_b[members])
        start = int(members[ecc >= diameter - _TIE_EPS][0])
        dist_s, parent_s = _tree_distances(adj, start)
        ends = members[dist_s[members] >= diameter - _TIE_EPS]
        end = int(ends[0]) if len(ends) else start
        if best is None or diameter > best[0] + _TIE_EPS or (
            abs(diameter - best[0]) <= _TIE_EPS and (start, end) < (best[1], best[2])
        ):
            best = (diameter, start, end)
            path = [end]
            while path[-1] != start:
                path.append(int(parent_s[path[-1]]))
            path.reverse()
            best_path = path
    return g.nodes[best_path]


def _curve_points(path: np.ndarray) -> np.ndarray:
    """Smooth (x, y) polyline through at most 8 evenly spaced path points."""
    path = np.asarray(path)
    if len(path) > _MAX_CONTROL_POINTS:
        picks = np.linspace(0, len(path) - 1, _MAX_CONTROL_POINTS).round().astype(np.intp)
        path = path[np.unique(picks)]
    control_xy = path[:, ::-1].astype(np.float64)
    return catmull_rom(control_xy)


def rasterize_eval_stroke(path: np.ndarray, thickness: int, clip: np.ndarray) -> np.ndarray:
    """Draw a smooth stroke along (row, col) ``path``, clipped to ``clip``."""
    clip = as_mask(clip)
    curve = _curve_points(path)
    return rasterize_polyline(curve, thickness, clip.shape) & clip


def simulate_interaction(
    gt: np.ndarray, pred: np.ndarray, cfg: AutoScribbleConfig | None = None
) -> EvalScribble | Converged:
    """The corrective stroke a user would draw next, or Converged.

    The largest error region decides the polarity: a false-negative region
    yields a positive stroke (inside gt), a false-positive region a
    negative one (outside gt). Pure function of its inputs.
    """
    cfg = cfg or AutoScribbleConfig()
    gt = as_mask(gt)
    pred = as_mask(pred)
    if gt.shape != pred.shape:
        raise ValueError(f"mask dimensions differ: {gt.shape} vs {pred.shape}")
    regions = error_regions(gt, pred)
    if regions.count == 0:
        return Converged()
    label = largest_label(regions)
    polarity: Polarity = "pos" if regions.polarity[label] == "fn" else "neg"
    if cfg.largest_only:
        region = regions.region_mask(label)
    else:
        same = [k for k, p in regions.polarity.items() if p == regions.polarity[label]]
        region = np.isin(regions.labels, same)

    if int(region.sum()) <= 2:
        path = np.argwhere(region)
    else:
        skeleton = medial_axis(region)
        if int(skeleton.sum()) <= 2:
            path = np.argwhere(skeleton)
        else:
            forest = remove_cycles(build_graph(skeleton, cfg.radius))
            path = longest_path(forest)
    raster = rasterize_eval_stroke(path, cfg.thickness, clip=region)
    stroke = Stroke(points=_curve_points(path), thickness=cfg.thickness, polarity=polarity)
    return EvalScribble(stroke=stroke, raster=raster, polarity=polarity, source_region=region)
