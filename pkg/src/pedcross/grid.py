"""Uniform-grid neighbour search (cell lists).

Agents are binned into square cells of side ``cell_size``; any two agents
within ``cell_size`` of each other lie in the same or adjacent cells. Within
a cell, agents are listed in index order, which keeps every traversal a
deterministic function of positions and storage order.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def build_cells(pos, cell_size):
    """Counting-sort agents into cells.

    Returns (cx, cy, ncx, ncy, start, items): per-agent cell coordinates,
    grid shape, and CSR-style ``items[start[c]:start[c + 1]]`` per cell
    ``c = cy * ncx + cx``.
    """
    n = pos.shape[0]
    x0 = pos[0, 0]
    y0 = pos[0, 1]
    for i in range(n):
        x0 = min(x0, pos[i, 0])
        y0 = min(y0, pos[i, 1])
    cx = np.empty(n, np.int64)
    cy = np.empty(n, np.int64)
    ncx = 1
    ncy = 1
    for i in range(n):
        cx[i] = int(np.floor((pos[i, 0] - x0) / cell_size))
        cy[i] = int(np.floor((pos[i, 1] - y0) / cell_size))
        ncx = max(ncx, cx[i] + 1)
        ncy = max(ncy, cy[i] + 1)
    start = np.zeros(ncx * ncy + 1, np.int64)
    for i in range(n):
        start[cy[i] * ncx + cx[i] + 1] += 1
    for c in range(ncx * ncy):
        start[c + 1] += start[c]
    fill = start[:-1].copy()
    items = np.empty(n, np.int64)
    for i in range(n):
        c = cy[i] * ncx + cx[i]
        items[fill[c]] = i
        fill[c] += 1
    return cx, cy, ncx, ncy, start, items


@njit(cache=True)
def _pairs(pos, cell_size):
    n = pos.shape[0]
    cx, cy, ncx, ncy, start, items = build_cells(pos, cell_size)
    count = 0
    for sweep in range(2):
        if sweep == 1:
            first = np.empty(count, np.int64)
            second = np.empty(count, np.int64)
            count = 0
        for i in range(n):
            for gy in range(max(cy[i] - 1, 0), min(cy[i] + 2, ncy)):
                for gx in range(max(cx[i] - 1, 0), min(cx[i] + 2, ncx)):
                    c = gy * ncx + gx
                    for k in range(start[c], start[c + 1]):
                        j = items[k]
                        if j > i:
                            if sweep == 1:
                                first[count] = i
                                second[count] = j
                            count += 1
    return first, second


def candidate_pairs(pos: np.ndarray, cell_size: float) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j), i < j, of agents in the same or neighbouring cells.

    A superset of all pairs closer than ``cell_size``, sorted
    lexicographically.
    """
    pos = np.ascontiguousarray(pos, dtype=float).reshape(-1, 2)
    if len(pos) < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    i, j = _pairs(pos, float(cell_size))
    canon = np.lexsort((j, i))
    return i[canon], j[canon]
