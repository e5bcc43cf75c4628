"""Point-cloud ingestion: task-buffer classification, hit counting and the
raycast miss pass."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import VoxelKey, logit, pos_to_keys
from .raycast import grid_start, traverse


class FrameRejected(ValueError):
    """Raised for out-of-order sensor frames or incompatible shared frames."""


@dataclass(frozen=True, eq=False)
class SensorFrame:
    """One sensor sweep: world-frame points plus the sensor position.

    Non-finite points are dropped on construction and counted in
    ``n_nonfinite``.
    """

    stamp: float
    origin: tuple
    points: np.ndarray
    n_nonfinite: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        good = np.isfinite(pts).all(axis=1)
        dropped = int(len(pts) - good.sum())
        if dropped:
            pts = pts[good]
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 3 or not all(math.isfinite(v) for v in origin):
            raise ValueError(f"sensor origin must be 3 finite values, got {self.origin}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "n_nonfinite", self.n_nonfinite + dropped)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class UpdateStats:
    """Per-cycle counters and phase timings (milliseconds)."""

    n_points_in: int = 0
    n_points_dropped_range: int = 0
    n_points_nonfinite: int = 0
    n_new: int = 0
    n_keep: int = 0
    n_rays: int = 0
    ray_cells: int = 0
    ray_voxels_touched: int = 0
    n_shared_keys: int = 0
    n_state_changes: int = 0
    n_reinflated: int = 0
    n_evicted: int = 0
    t_input: float = 0.0
    t_occupancy: float = 0.0
    t_inflation: float = 0.0
    t_retention: float = 0.0
    t_total: float = 0.0
    extra: dict = field(default_factory=dict)


def _hit(state, key: VoxelKey, count: int, stats: UpdateStats) -> None:
    rec = state.b_new.get(key)
    if rec is None:
        rec = state.b_keep.get(key)
    if rec is None:
        rec = state.occ_map.get(key)
        if rec is None:
            rec = state.inf_map.get(key)
            if rec is None:
                rec = state.make_voxel(key)
                state.insert_handle("inf", rec)
            state.insert_handle("occ", rec)
            state.b_new[key] = rec
            # inflated-only records carry no occupancy evidence, so promotion
            # starts from the same prior as a brand-new voxel
            rec.l += logit(state.cfg.p_init)
            stats.n_new += 1
        else:
            state.b_keep[key] = rec
            if not rec.in_inf:
                state.insert_handle("inf", rec)
            stats.n_keep += 1
    rec.n_hit += count
    rec.last_touch = state.cycle


def _check_stamp(state, stamp: float) -> None:
    if state.prev_stamp is not None and stamp < state.prev_stamp:
        raise FrameRejected(
            f"frame stamp {stamp} regresses more than one cycle (last {state.last_stamp})"
        )
    if state.last_stamp is None or stamp >= state.last_stamp:
        state.prev_stamp = state.last_stamp
        state.last_stamp = stamp


def ingest_frame(state, frame: SensorFrame, stats: UpdateStats | None = None) -> UpdateStats:
    """Classify a frame's points into ``b_new``/``b_keep`` and count hits and misses.

    All points are classified before any ray is walked, so the result does not
    depend on point order: a ray crossing a voxel first observed later in the
    same frame still registers its miss.
    """
    stats = stats if stats is not None else UpdateStats()
    _check_stamp(state, frame.stamp)
    cfg = state.cfg
    pts = frame.points
    origin = np.asarray(frame.origin)
    state.pos_self = frame.origin
    stats.n_points_in += len(pts) + frame.n_nonfinite
    stats.n_points_nonfinite += frame.n_nonfinite
    if not math.isinf(cfg.d_in) and len(pts):
        d = np.linalg.norm(pts - origin, axis=1)
        keep = d <= cfg.d_in
        stats.n_points_dropped_range += int(len(pts) - keep.sum())
        pts = pts[keep]
    if not len(pts):
        return stats
    keys, counts = np.unique(pos_to_keys(pts, cfg), axis=0, return_counts=True)
    for k, c in zip(keys.tolist(), counts.tolist()):
        _hit(state, (k[0], k[1], k[2]), c, stats)
    stats.n_rays += len(pts)

    missed_keys, missed_counts, n_cells = state.occ_index.ray_misses(
        grid_start(frame.origin, cfg), keys, counts.astype(np.int64)
    )
    stats.ray_cells += n_cells
    stats.ray_voxels_touched += len(missed_counts)
    occ_map, missed = state.occ_map, state.missed
    for k, c in zip(missed_keys.tolist(), missed_counts.tolist()):
        key = (k[0], k[1], k[2])
        rec = occ_map[key]
        rec.n_miss += c
        missed[key] = rec
    return stats


def raycast_process(state, pos_self, target_key: VoxelKey) -> int:
    """Walk one ray and add a miss to every occupancy-map voxel before the target.

    Returns the number of records that received a miss. Never creates records.
    """
    n = 0
    for key in traverse(pos_self, target_key, state.cfg):
        rec = state.occ_map.get(key)
        if rec is not None:
            rec.n_miss += 1
            state.missed[key] = rec
            n += 1
    return n


def ingest_shared_frame(state, share, stats: UpdateStats | None = None) -> UpdateStats:
    """Feed a peer's newly-occupied keys in as hits, without raycasting.

    Keys received here are remembered so they are not re-exported.
    """
    stats = stats if stats is not None else UpdateStats()
    if float(np.float32(state.cfg.res)) != share.res:
        raise FrameRejected(
            f"shared frame resolution {share.res} does not match map resolution {state.cfg.res}"
        )
    for key in share.keys:
        _hit(state, key, 1, stats)
        state.received.add(key)
    stats.n_shared_keys += len(share.keys)
    return stats

