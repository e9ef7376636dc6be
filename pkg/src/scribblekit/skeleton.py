"""Topology-preserving medial-axis skeletonization.

The skeleton is produced by homotopic thinning: boundary pixels are peeled
in increasing distance-transform order, and a pixel is only removed when
deleting it keeps both the foreground 8-topology and the background
4-topology intact (a "simple" pixel) and it is not a curve endpoint. This
guarantees skeleton ⊆ mask, one skeleton component per mask component, and
a nonempty result; rerunning on the output is the identity.
"""
from __future__ import annotations

import numpy as np

from .masks import as_mask, distance_transform

# Neighbor bit layout around a pixel; bit i set means the offset is foreground.
_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_EDGE_BITS = {1, 3, 4, 6}  # N, W, E, S


def _roots(cells: list[int], adjacent) -> dict[int, int]:
    parent = {c: c for c in cells}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in cells:
        for j in cells:
            if i < j and adjacent(_OFFSETS[i], _OFFSETS[j]):
                parent[find(i)] = find(j)
    return {c: find(c) for c in cells}


def _is_simple(config: int) -> bool:
    # Simple for (8-foreground, 4-background) connectivity: exactly one
    # foreground 8-component in the ring and exactly one background
    # 4-component that touches an edge-adjacent cell.
    fg = [i for i in range(8) if config >> i & 1]
    if not fg:
        return False
    adj8 = lambda a, b: max(abs(a[0] - b[0]), abs(a[1] - b[1])) <= 1
    if len(set(_roots(fg, adj8).values())) != 1:
        return False
    bg = [i for i in range(8) if not config >> i & 1]
    adj4 = lambda a, b: abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
    roots = _roots(bg, adj4)
    return len({roots[i] for i in bg if i in _EDGE_BITS}) == 1


_SIMPLE = np.array([_is_simple(k) for k in range(256)], dtype=bool)
_POPCOUNT = np.array([bin(k).count("1") for k in range(256)], dtype=np.uint8)
# Bit that a deleted pixel occupies in each neighbor's configuration.
_CLEAR_MASK = [np.uint8(0xFF ^ (1 << _OFFSETS.index((-dr, -dc)))) for dr, dc in _OFFSETS]


def _neighbor_codes(fg: np.ndarray) -> np.ndarray:
    h, w = fg.shape
    code = np.zeros((h, w), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(_OFFSETS):
        src = fg[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        code[1:-1, 1:-1] |= src.astype(np.uint8) << bit
    return code


def medial_axis(mask: np.ndarray) -> np.ndarray:
    """Homotopic skeleton of a nonempty mask.

    Peeling order is (distance value, row, col), which keeps the skeleton
    centered on the distance-transform ridge and makes the result a pure
    function of the input.
    """
    mask = as_mask(mask)
    if not mask.any():
        raise ValueError("medial_axis requires a nonempty mask")
    dist = np.pad(distance_transform(mask), 1)
    fg = np.pad(mask, 1)
    code = _neighbor_codes(fg)

    while True:
        border = fg & (code != 0xFF)
        cand = np.argwhere(border)
        if len(cand) == 0:
            break
        order = np.lexsort((cand[:, 1], cand[:, 0], dist[cand[:, 0], cand[:, 1]]))
        changed = False
        for r, c in cand[order].tolist():
            if not fg[r, c]:
                continue
            k = code[r, c]
            if _POPCOUNT[k] <= 1 or not _SIMPLE[k]:
                continue
            fg[r, c] = False
            changed = True
            for bit, (dr, dc) in enumerate(_OFFSETS):
                code[r + dr, c + dc] &= _CLEAR_MASK[bit]
        if not changed:
            break
    return fg[1:-1, 1:-1]
