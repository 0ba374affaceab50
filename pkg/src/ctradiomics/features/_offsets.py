"""Neighbourhood offsets and grid-shift helpers for the texture families."""

from __future__ import annotations

import numpy as np

# 13 unique displacement directions at distance 1: one representative per
# +/- pair of the 26-neighbourhood (first nonzero component positive)
UNIQUE_DIRECTIONS: tuple[tuple[int, int, int], ...] = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) > (0, 0, 0)
)

# all 26 neighbour offsets
ALL_NEIGHBOURS: tuple[tuple[int, int, int], ...] = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)


def shifted_pair_slices(shape, offset):
    """Slices (src, dst) so that grid[src] and grid[dst] align voxel v with v+offset.

    Returns None when the offset magnitude exceeds the grid along some axis.
    """
    src = []
    dst = []
    for n, o in zip(shape, offset):
        if abs(o) >= n:
            return None
        if o >= 0:
            src.append(slice(0, n - o))
            dst.append(slice(o, n))
        else:
            src.append(slice(-o, n))
            dst.append(slice(0, n + o))
    return tuple(src), tuple(dst)


def shift_into(grid: np.ndarray, offset, fill=0) -> np.ndarray:
    """Array s with s[v] = grid[v + offset], `fill` where v+offset is outside."""
    out = np.full_like(grid, fill)
    sl = shifted_pair_slices(grid.shape, offset)
    if sl is None:
        return out
    src, dst = sl
    out[src] = grid[dst]
    return out
