"""Obstacle inflation through per-record look-up tables.

An occupied record keeps ``t_inf``, the list of records it inflates; each
inflated record counts its inflaters in ``n_i``. Only records whose
``occ_changed`` flag is set are visited, and only when they lie closer than
``d_inf`` to the sensor. Records skipped by the distance gate keep their flag
so they are inflated once the sensor comes close enough.
"""

from __future__ import annotations

import math

import numpy as np

from .core import OccState, pos_to_key, unique_rows
from .records import VoxelRecord

# slack for lattice points that sit exactly on the inflation sphere
DIST_EPS = 1e-9


def build_neighborhood(res: float, r_obs: float) -> list[tuple[int, int, int]]:
    """Integer offsets whose center-to-center distance is within ``r_obs``."""
    if res <= 0 or r_obs < 0:
        raise ValueError("need res > 0 and r_obs >= 0")
    n = int(math.floor(r_obs / res)) + 1
    r = np.arange(-n, n + 1)
    d = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    dist = np.sqrt((d * d).sum(axis=1)) * res
    keep = d[dist <= r_obs + DIST_EPS]
    return [tuple(int(v) for v in row) for row in keep]


def _inflate_batch(state, recs: list) -> None:
    """Build the tables of ``recs`` together.

    Neighbor keys are de-duplicated first, so each distinct neighbor costs
    one dictionary lookup however many of the records it borders.
    """
    offs = np.asarray(state.offsets, dtype=np.int64).reshape(-1, 3)
    base = np.array([r.key for r in recs], dtype=np.int64).reshape(-1, 3)
    nb = (base[:, None, :] + offs[None, :, :]).reshape(-1, 3)
    uk, counts, inverse = unique_rows(nb, return_inverse=True)
    inf_map = state.inf_map
    get = inf_map.get
    cycle = state.cycle
    table = np.empty(len(uk), dtype=object)
    fresh = 0
    for i, (k, c) in enumerate(zip(uk.tolist(), counts.tolist())):
        key = (k[0], k[1], k[2])
        t = get(key)
        if t is None:
            t = VoxelRecord(key, cycle)
            t.in_inf = True
            inf_map[key] = t
        if not t.n_i:
            fresh += 1
        t.n_i += c
        table[i] = t
    state.n_inflated += fresh
    rows = table[inverse].reshape(len(recs), len(offs)).tolist()
    for rec, row in zip(recs, rows):
        rec.t_inf = row


def release_inflation(state, rec) -> None:
    """Undo everything ``rec`` inflates and clear its table."""
    inf_map = state.inf_map
    emptied = 0
    for t in rec.t_inf:
        n = t.n_i - 1
        assert n >= 0, f"inflation count underflow at {t.key}"
        t.n_i = n
        if not n:
            emptied += 1
            if not t.in_occ:
                del inf_map[t.key]
                t.in_inf = False
    state.n_inflated -= emptied
    rec.t_inf = []


def apply_inflation(state, pos_self) -> int:
    """Process flagged records; returns how many tables were (re)built or released."""
    d_inf = state.cfg.d_inf
    gated = not math.isinf(d_inf)
    if gated:
        o = state.cfg.origin
        res = state.cfg.res
        px, py, pz = pos_self
    count = 0
    build = []
    for key, rec in list(state.inflate_pending.items()):
        if gated:
            cx = o[0] + (key[0] + 0.5) * res - px
            cy = o[1] + (key[1] + 0.5) * res - py
            cz = o[2] + (key[2] + 0.5) * res - pz
            if math.sqrt(cx * cx + cy * cy + cz * cz) >= d_inf:
                continue
        del state.inflate_pending[key]
        rec.occ_changed = False
        if rec.state == OccState.OCC:
            if not rec.t_inf:
                build.append(rec)
        elif rec.t_inf:
            release_inflation(state, rec)
            count += 1
    if build and state.offsets:
        _inflate_batch(state, build)
    return count + len(build)


def query_inflated_occupied(state, p) -> bool:
    rec = state.inf_map.get(pos_to_key(p, state.cfg))
    return rec is not None and (rec.n_i > 0 or rec.state == OccState.OCC)
