"""Incremental 3D grid traversal (Amanatides-Woo style) compiled with numba.

All walks happen in grid coordinates: ``g = (p - origin) / res``. A ray runs
from the sensor position to the *center* of the target voxel, and the walk
reports every cell strictly before the target cell. When two or three axis
boundaries are crossed at the same parameter value the walk steps those axes
together, so a ray through an exact cell corner does not visit the side cells.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import MapConfig, VoxelKey


@njit(cache=True)
def _walk(g0x, g0y, g0z, ex, ey, ez, out):
    """Fill ``out`` with the cells before ``(ex, ey, ez)``; return the count."""
    cx = np.int64(math.floor(g0x))
    cy = np.int64(math.floor(g0y))
    cz = np.int64(math.floor(g0z))
    if cx == ex and cy == ey and cz == ez:
        return 0
    dx = (ex + 0.5) - g0x
    dy = (ey + 0.5) - g0y
    dz = (ez + 0.5) - g0z
    inf = np.inf

    sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
    sy = 1 if dy > 0 else (-1 if dy < 0 else 0)
    sz = 1 if dz > 0 else (-1 if dz < 0 else 0)
    if sx != 0:
        tmx = ((cx + (1 if sx > 0 else 0)) - g0x) / dx
        tdx = 1.0 / abs(dx)
    else:
        tmx = inf
        tdx = inf
    if sy != 0:
        tmy = ((cy + (1 if sy > 0 else 0)) - g0y) / dy
        tdy = 1.0 / abs(dy)
    else:
        tmy = inf
        tdy = inf
    if sz != 0:
        tmz = ((cz + (1 if sz > 0 else 0)) - g0z) / dz
        tdz = 1.0 / abs(dz)
    else:
        tmz = inf
        tdz = inf

    cap = out.shape[0]
    n = 0
    while n < cap:
        out[n, 0] = cx
        out[n, 1] = cy
        out[n, 2] = cz
        n += 1
        tm = min(tmx, min(tmy, tmz))
        if tmx == tm:
            cx += sx
            tmx += tdx
        if tmy == tm:
            cy += sy
            tmy += tdy
        if tmz == tm:
            cz += sz
            tmz += tdz
        if cx == ex and cy == ey and cz == ez:
            break
        # float drift past the target on some axis: stop rather than wander
        if (sx > 0 and cx > ex) or (sx < 0 and cx < ex) or (sy > 0 and cy > ey) \
                or (sy < 0 and cy < ey) or (sz > 0 and cz > ez) or (sz < 0 and cz < ez):
            break
    return n


@njit(cache=True)
def _max_walk_len(g0, targets):
    m = 0
    for i in range(targets.shape[0]):
        l1 = (abs(targets[i, 0] - math.floor(g0[0])) + abs(targets[i, 1] - math.floor(g0[1]))
              + abs(targets[i, 2] - math.floor(g0[2])))
        if l1 > m:
            m = l1
    return m + 3


def grid_start(pos, cfg: MapConfig) -> np.ndarray:
    return (np.asarray(pos, dtype=np.float64) - np.asarray(cfg.origin)) / cfg.res


def traverse(pos_self, target_key: VoxelKey, cfg: MapConfig) -> list[VoxelKey]:
    """Cells crossed by the segment from ``pos_self`` to the target center,
    excluding the target itself."""
    g0 = grid_start(pos_self, cfg)
    t = np.asarray([target_key], dtype=np.int64)
    out = np.empty((_max_walk_len(g0, t), 3), dtype=np.int64)
    n = _walk(g0[0], g0[1], g0[2], t[0, 0], t[0, 1], t[0, 2], out)
    return [tuple(int(v) for v in row) for row in out[:n]]
