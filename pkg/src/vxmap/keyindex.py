"""Open-addressing hash set of voxel keys, usable from compiled kernels.

The occupancy map itself is a Python dict of records; this index mirrors its
key set so the per-ray miss search can run without touching Python objects.
Keys are hashed with a three-prime multiply/xor mix and probed linearly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .raycast import _max_walk_len, _walk

EMPTY = 0
LIVE = 1
TOMB = 2


@njit(cache=True)
def _hash(x, y, z):
    h = (x * 73856093) ^ (y * 19349663) ^ (z * 83492791)
    return h ^ (h >> 29)


@njit(cache=True)
def _find(keys, used, x, y, z):
    mask = used.shape[0] - 1
    i = _hash(x, y, z) & mask
    while True:
        u = used[i]
        if u == EMPTY:
            return -1
        if u == LIVE and keys[i, 0] == x and keys[i, 1] == y and keys[i, 2] == z:
            return i
        i = (i + 1) & mask


@njit(cache=True)
def _insert(keys, used, x, y, z):
    """Return 1 if inserted, 0 if present. Caller guarantees a free slot."""
    mask = used.shape[0] - 1
    i = _hash(x, y, z) & mask
    first_tomb = -1
    while True:
        u = used[i]
        if u == EMPTY:
            break
        if u == TOMB:
            if first_tomb < 0:
                first_tomb = i
        elif keys[i, 0] == x and keys[i, 1] == y and keys[i, 2] == z:
            return 0
        i = (i + 1) & mask
    if first_tomb >= 0:
        i = first_tomb
    keys[i, 0] = x
    keys[i, 1] = y
    keys[i, 2] = z
    used[i] = LIVE
    return 1


@njit(cache=True)
def _apply_ops(keys, used, ops):
    """ops rows are ``(op, x, y, z)`` with op +1 insert / -1 remove."""
    delta = 0
    for r in range(ops.shape[0]):
        x = ops[r, 1]
        y = ops[r, 2]
        z = ops[r, 3]
        if ops[r, 0] > 0:
            delta += _insert(keys, used, x, y, z)
        else:
            s = _find(keys, used, x, y, z)
            if s >= 0:
                used[s] = TOMB
                delta -= 1
    return delta


@njit(cache=True)
def _rehash(keys, used, new_keys, new_used):
    for i in range(used.shape[0]):
        if used[i] == LIVE:
            _insert(new_keys, new_used, keys[i, 0], keys[i, 1], keys[i, 2])


@njit(cache=True)
def _ray_misses(g0, targets, weights, keys, used, miss):
    out = np.empty((_max_walk_len(g0, targets), 3), dtype=np.int64)
    cells = 0
    for i in range(targets.shape[0]):
        n = _walk(g0[0], g0[1], g0[2], targets[i, 0], targets[i, 1], targets[i, 2], out)
        cells += n
        w = weights[i]
        for j in range(n):
            s = _find(keys, used, out[j, 0], out[j, 1], out[j, 2])
            if s >= 0:
                miss[s] += w
    return cells


class KeyIndex:
    """Hash set of keys with deferred, ordered insert/remove operations."""

    def __init__(self, capacity: int = 1 << 12):
        cap = 1
        while cap < capacity:
            cap <<= 1
        self._alloc(cap)
        self._size = 0
        self._pending: list[tuple[int, int, int, int]] = []

    def _alloc(self, cap: int) -> None:
        self.keys = np.zeros((cap, 3), dtype=np.int64)
        self.used = np.zeros(cap, dtype=np.int8)
        self.miss = np.zeros(cap, dtype=np.int64)

    def __len__(self) -> int:
        self.flush()
        return self._size

    def add(self, key) -> None:
        self._pending.append((1, key[0], key[1], key[2]))

    def discard(self, key) -> None:
        self._pending.append((-1, key[0], key[1], key[2]))

    def flush(self) -> None:
        if not self._pending:
            return
        ops = np.asarray(self._pending, dtype=np.int64)
        self._pending = []
        cap = self.used.shape[0]
        n_tomb = int(np.count_nonzero(self.used == TOMB))
        if (self._size + n_tomb + len(ops)) * 2 > cap:
            want = max(cap, 1 << 12)
            while want < 4 * (self._size + len(ops)):
                want <<= 1
            old_keys, old_used = self.keys, self.used
            self._alloc(want)
            _rehash(old_keys, old_used, self.keys, self.used)
        self._size += int(_apply_ops(self.keys, self.used, ops))

    def __contains__(self, key) -> bool:
        self.flush()
        return _find(self.keys, self.used, key[0], key[1], key[2]) >= 0

    def ray_misses(self, g0: np.ndarray, targets: np.ndarray, weights: np.ndarray):
        """Walk every ray and count passes through indexed cells.

        Returns ``(keys, counts, n_cells)``: the indexed keys crossed by at
        least one ray, their weighted pass counts, and the total number of
        traversed cells.
        """
        self.flush()
        if len(targets) == 0:
            return np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64), 0
        n_cells = _ray_misses(g0, targets, weights, self.keys, self.used, self.miss)
        hit = np.flatnonzero(self.miss)
        counts = self.miss[hit].copy()
        self.miss[hit] = 0
        return self.keys[hit].copy(), counts, int(n_cells)
