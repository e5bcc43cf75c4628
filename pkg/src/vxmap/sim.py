"""Synthetic scenes, a ray-cast sensor, a lossy link and a dense-grid oracle.

These stand in for recorded LiDAR logs. Everything is deterministic given its
seed.

Scene file grammar (one ``name = value`` per line, ``#`` starts a comment,
values are whitespace-separated numbers or ``true``/``false``)::

    seed = 7
    bounds = x0 y0 z0 x1 y1 z1
    ground = false                 # floor plane at z0
    enclosed = false               # walls, floor and ceiling at the bounds
    box = x0 y0 z0 x1 y1 z1        # repeatable
    cylinder = cx cy z0 r h        # repeatable, vertical axis
    sensor.max_range = 40          # sensor.* keys map onto SensorSpec
    trajectory.speed = 1.0         # m/s
    trajectory.hover = 20          # frames spent at the first waypoint
    trajectory.frames = 200        # optional cap on the frame count
    waypoint = x y z               # repeatable, at least one
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .core import MapConfig, OccState, logit
from .integrate import SensorFrame
from .raycast import _max_walk_len, _walk, grid_start


@dataclass
class Scene:
    bounds: tuple  # ((x0, y0, z0), (x1, y1, z1))
    boxes: list = field(default_factory=list)  # [(x0, y0, z0, x1, y1, z1)]
    cylinders: list = field(default_factory=list)  # [(cx, cy, z0, r, h)]
    seed: int = 0
    ground: bool = False
    enclosed: bool = False

    @property
    def volume(self) -> float:
        lo, hi = self.bounds
        return float(np.prod(np.subtract(hi, lo)))

    def obstacle_volume(self) -> float:
        v = sum((b[3] - b[0]) * (b[4] - b[1]) * (b[5] - b[2]) for b in self.boxes)
        return v + sum(math.pi * c[3] ** 2 * c[4] for c in self.cylinders)

    @property
    def fill_fraction(self) -> float:
        """Obstacle volume over bounds volume (obstacles never overlap)."""
        return self.obstacle_volume() / self.volume

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """True where a point lies inside an obstacle."""
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
        inside = np.zeros(len(pts), dtype=bool)
        for b in self.boxes:
            inside |= np.all((pts >= b[:3]) & (pts <= b[3:]), axis=1)
        for cx, cy, z0, r, h in self.cylinders:
            inside |= (((pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 <= r * r)
                       & (pts[:, 2] >= z0) & (pts[:, 2] <= z0 + h))
        return inside

    def _arrays(self):
        boxes = np.asarray(self.boxes, dtype=np.float64).reshape(-1, 6)
        cyl = np.asarray(self.cylinders, dtype=np.float64).reshape(-1, 5)
        return boxes, cyl


def _aabb(ob) -> tuple:
    if len(ob) == 6:
        return ob
    cx, cy, z0, r, h = ob
    return (cx - r, cy - r, z0, cx + r, cy + r, z0 + h)


def _overlap(a, b, gap: float) -> bool:
    return all(a[i] < b[i + 3] + gap and b[i] < a[i + 3] + gap for i in range(3))


def _blocks_path(box, segments, clearance: float) -> bool:
    lo = np.asarray(box[:3]) - clearance
    hi = np.asarray(box[3:]) + clearance
    for p, q in segments:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        n = max(2, int(np.linalg.norm(q - p) / 0.1) + 2)
        s = p + np.linspace(0.0, 1.0, n)[:, None] * (q - p)
        if np.any(np.all((s >= lo) & (s <= hi), axis=1)):
            return True
    return False


def gen_scene(seed: int, extent=(32.0, 32.0, 8.0), density: float = 0.05, *,
              origin=(0.0, 0.0, 0.0), ground: bool = False, enclosed: bool = False,
              size_range: Optional[tuple] = None, height_range: Optional[tuple] = None,
              cylinder_fraction: float = 0.5, keepout: Sequence = (),
              clearance: float = 1.0, gap: float = 0.0) -> Scene:
    """Place non-overlapping boxes and cylinders filling ``density`` of the
    bounding volume (the last one is trimmed in height to land on it).

    Obstacles stand on the floor. ``keepout`` is a list of ``(p, q)`` segments
    that obstacles keep ``clearance`` meters away from (flight corridors).
    Raises ``ValueError`` when the density cannot be reached.
    """
    if not 0.0 <= density <= 0.5:
        raise ValueError(f"density must lie in [0, 0.5], got {density}")
    lo = np.asarray(origin, dtype=float)
    ext = np.asarray(extent, dtype=float)
    if np.any(ext <= 0):
        raise ValueError("extent must be positive")
    hi = lo + ext
    scene = Scene(bounds=(tuple(map(float, lo)), tuple(map(float, hi))), seed=seed, ground=ground, enclosed=enclosed)
    if density == 0:
        return scene
    rng = np.random.default_rng(seed)
    span = min(ext[0], ext[1])
    smin, smax = size_range or (0.03 * span, 0.12 * span)
    hmin, hmax = height_range or (0.3 * ext[2], ext[2])
    target = density * scene.volume
    placed: list = []
    filled = 0.0
    fails = 0
    while filled < target:
        if fails > 5000:
            raise ValueError(
                f"could not reach density {density}: stuck at {filled / scene.volume:.4f}"
            )
        h = rng.uniform(hmin, hmax)
        if rng.random() < cylinder_fraction:
            r = rng.uniform(smin, smax) / 2
            if 2 * r >= min(ext[0], ext[1]):
                fails += 1
                continue
            cx = rng.uniform(lo[0] + r, hi[0] - r)
            cy = rng.uniform(lo[1] + r, hi[1] - r)
            ob = (cx, cy, lo[2], r, h)
            vol = math.pi * r * r * h
        else:
            w, d = rng.uniform(smin, smax, size=2)
            if w >= ext[0] or d >= ext[1]:
                fails += 1
                continue
            x0 = rng.uniform(lo[0], hi[0] - w)
            y0 = rng.uniform(lo[1], hi[1] - d)
            ob = (x0, y0, lo[2], x0 + w, y0 + d, lo[2] + h)
            vol = w * d * h
        if filled + vol > target:
            # trim the last obstacle's height so the fill lands on target
            f = (target - filled) / vol
            h *= f
            vol *= f
            ob = ob[:4] + (h,) if len(ob) == 5 else ob[:5] + (lo[2] + h,)
        box = _aabb(ob)
        if any(_overlap(box, _aabb(o), gap) for o in placed) or \
                (keepout and _blocks_path(box, keepout, clearance)):
            fails += 1
            continue
        fails = 0
        placed.append(ob)
        filled += vol
    scene.boxes = [tuple(float(v) for v in o) for o in placed if len(o) == 6]
    scene.cylinders = [tuple(float(v) for v in o) for o in placed if len(o) == 5]
    return scene


def voxel_fill_fraction(scene: Scene, res: float) -> float:
    """Fraction of ``res``-sized cells whose center lies in an obstacle."""
    lo = np.asarray(scene.bounds[0])
    n = np.floor((np.asarray(scene.bounds[1]) - lo) / res + 1e-9).astype(int)
    grid = np.zeros(n, dtype=bool)
    centers = [lo[i] + (np.arange(n[i]) + 0.5) * res for i in range(3)]

    def span(axis, a, b):
        c = centers[axis]
        return np.searchsorted(c, a, side="left"), np.searchsorted(c, b, side="right")

    for b in scene.boxes:
        (i0, i1), (j0, j1), (k0, k1) = span(0, b[0], b[3]), span(1, b[1], b[4]), span(2, b[2], b[5])
        grid[i0:i1, j0:j1, k0:k1] = True
    for cx, cy, z0, r, h in scene.cylinders:
        i0, i1 = span(0, cx - r, cx + r)
        j0, j1 = span(1, cy - r, cy + r)
        k0, k1 = span(2, z0, z0 + h)
        disk = ((centers[0][i0:i1, None] - cx) ** 2 + (centers[1][None, j0:j1] - cy) ** 2) <= r * r
        grid[i0:i1, j0:j1, k0:k1] |= disk[:, :, None]
    return float(grid.mean())


# -- sensor ---------------------------------------------------------------


@dataclass(frozen=True)
class SensorSpec:
    max_range: float = 40.0
    hfov: float = 360.0
    vfov: float = 59.0
    rate: float = 10.0
    rays_per_frame: int = 4000
    mount_pitch: float = 0.0

    def __post_init__(self):
        if not 0 < self.hfov <= 360:
            raise ValueError(f"hfov must lie in (0, 360], got {self.hfov}")
        if not 0 < self.vfov <= 180:
            raise ValueError(f"vfov must lie in (0, 180], got {self.vfov}")
        if not self.rays_per_frame > 0:
            raise ValueError("rays_per_frame must be > 0")
        if not (self.max_range > 0 and self.rate > 0):
            raise ValueError("max_range and rate must be > 0")


class Pose(NamedTuple):
    x: float
    y: float
    z: float
    yaw: float = 0.0  # radians

    @property
    def position(self) -> tuple:
        return (self.x, self.y, self.z)


# R2 low-discrepancy sequence constants (plastic number)
_PHI2 = 1.324717957244746
_ALPHA = np.array([1.0 / _PHI2, 1.0 / _PHI2**2])


def ray_pattern(n: int, frame_seed: int = 0) -> np.ndarray:
    """``n`` points of the R2 sequence in the unit square; each frame seed
    continues the sequence where the previous frame left off."""
    i = np.arange(n, dtype=np.float64) + float(frame_seed) * n
    return np.mod(0.5 + i[:, None] * _ALPHA[None, :], 1.0)


def ray_directions(spec: SensorSpec, yaw: float, frame_seed: int = 0) -> np.ndarray:
    uv = ray_pattern(spec.rays_per_frame, frame_seed)
    az = (uv[:, 0] - 0.5) * math.radians(spec.hfov)
    el = (uv[:, 1] - 0.5) * math.radians(spec.vfov)
    d = np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=1)
    p = math.radians(spec.mount_pitch)
    cp, sp = math.cos(p), math.sin(p)
    pitch = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])
    cy, sy = math.cos(yaw), math.sin(yaw)
    yaw_m = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    return d @ (yaw_m @ pitch).T


@njit(cache=True)
def _cast(o, dirs, boxes, cyl, ground_z, use_ground, encl_lo, encl_hi, use_encl, max_range):
    n = dirs.shape[0]
    out = np.full(n, np.inf)
    for i in range(n):
        dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        best = max_range
        found = False
        for b in range(boxes.shape[0]):
            tn = -np.inf
            tf = np.inf
            miss = False
            for a in range(3):
                oa = o[a]
                da = dirs[i, a]
                lo = boxes[b, a]
                hi = boxes[b, a + 3]
                if da == 0.0:
                    if oa < lo or oa > hi:
                        miss = True
                        break
                else:
                    t1 = (lo - oa) / da
                    t2 = (hi - oa) / da
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tn:
                        tn = t1
                    if t2 < tf:
                        tf = t2
            if miss or tn > tf or tn <= 0.0:
                continue
            if tn <= best:
                best = tn
                found = True
        for c in range(cyl.shape[0]):
            cx, cy, z0, r, h = cyl[c, 0], cyl[c, 1], cyl[c, 2], cyl[c, 3], cyl[c, 4]
            ox = o[0] - cx
            oy = o[1] - cy
            a2 = dx * dx + dy * dy
            if a2 > 0.0:
                b2 = 2.0 * (ox * dx + oy * dy)
                c2 = ox * ox + oy * oy - r * r
                disc = b2 * b2 - 4.0 * a2 * c2
                if disc >= 0.0:
                    t = (-b2 - math.sqrt(disc)) / (2.0 * a2)
                    if t > 0.0:
                        z = o[2] + t * dz
                        if z0 <= z <= z0 + h and t <= best:
                            best = t
                            found = True
            if dz != 0.0:
                for zc in (z0, z0 + h):
                    t = (zc - o[2]) / dz
                    if t > 0.0 and t <= best:
                        px = ox + t * dx
                        py = oy + t * dy
                        if px * px + py * py <= r * r:
                            best = t
                            found = True
        if use_ground and dz < 0.0:
            t = (ground_z - o[2]) / dz
            if 0.0 < t <= best:
                best = t
                found = True
        if use_encl:
            te = np.inf
            for a in range(3):
                da = dirs[i, a]
                if da > 0.0:
                    t = (encl_hi[a] - o[a]) / da
                elif da < 0.0:
                    t = (encl_lo[a] - o[a]) / da
                else:
                    continue
                if t < te:
                    te = t
            if 0.0 < te <= best:
                best = te
                found = True
        if found:
            out[i] = best
    return out


def cast_rays(scene: Scene, origin, dirs: np.ndarray, max_range: float) -> np.ndarray:
    """Distance to the nearest surface along each unit direction (inf if none
    within ``max_range``)."""
    boxes, cyl = scene._arrays()
    lo = np.asarray(scene.bounds[0], dtype=np.float64)
    hi = np.asarray(scene.bounds[1], dtype=np.float64)
    return _cast(np.asarray(origin, dtype=np.float64), np.ascontiguousarray(dirs, dtype=np.float64),
                 boxes, cyl, float(lo[2]), scene.ground, lo, hi, scene.enclosed, float(max_range))


def simulate_scan(scene: Scene, pose: Pose, spec: SensorSpec, frame_seed: int = 0,
                  stamp: Optional[float] = None) -> SensorFrame:
    pose = Pose(*pose)
    dirs = ray_directions(spec, pose.yaw, frame_seed)
    o = np.asarray(pose.position, dtype=np.float64)
    t = cast_rays(scene, o, dirs, spec.max_range)
    hit = np.isfinite(t)
    pts = o + dirs[hit] * t[hit, None]
    if stamp is None:
        stamp = frame_seed / spec.rate
    return SensorFrame(stamp, pose.position, pts)


def waypoint_path(waypoints: Sequence, speed: float, rate: float, hover: int = 0,
                  n_frames: Optional[int] = None) -> list[Pose]:
    """Poses at ``rate`` Hz: ``hover`` frames at the first waypoint, then
    constant-speed travel along the polyline. Yaw follows the direction of
    travel."""
    wp = np.asarray(waypoints, dtype=float).reshape(-1, 3)
    if len(wp) == 0:
        raise ValueError("need at least one waypoint")
    if speed <= 0 or rate <= 0:
        raise ValueError("speed and rate must be > 0")
    seg = np.diff(wp, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    yaws = [math.atan2(s[1], s[0]) if n > 0 else 0.0 for s, n in zip(seg, seg_len)]
    yaw0 = yaws[0] if yaws else 0.0
    poses = [Pose(*wp[0], yaw0) for _ in range(hover)]
    total = float(seg_len.sum())
    step = speed / rate
    s = 0.0
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    while s <= total + 1e-12:
        if n_frames is not None and len(poses) >= n_frames:
            break
        if len(seg_len) == 0:
            poses.append(Pose(*wp[0], 0.0))
        else:
            i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg_len) - 1)
            f = (s - cum[i]) / seg_len[i] if seg_len[i] > 0 else 0.0
            p = wp[i] + f * seg[i]
            poses.append(Pose(*p, yaws[i]))
        if len(seg_len) == 0:
            break
        s += step
    if n_frames is not None:
        poses = poses[:n_frames]
    return poses


def check_path(scene: Scene, poses: Sequence[Pose]) -> None:
    """Raise ``ValueError`` if any pose is outside the bounds or inside an obstacle."""
    pts = np.asarray([p[:3] for p in poses], dtype=float).reshape(-1, 3)
    lo, hi = np.asarray(scene.bounds[0]), np.asarray(scene.bounds[1])
    outside = np.any((pts < lo) | (pts > hi), axis=1)
    if outside.any():
        i = int(np.argmax(outside))
        raise ValueError(f"trajectory pose {i} at {tuple(pts[i])} is outside the scene bounds")
    inside = scene.contains(pts)
    if inside.any():
        i = int(np.argmax(inside))
        raise ValueError(f"trajectory pose {i} at {tuple(pts[i])} is inside an obstacle")


def scan_sequence(scene: Scene, poses: Sequence[Pose], spec: SensorSpec) -> list[SensorFrame]:
    return [simulate_scan(scene, p, spec, frame_seed=i) for i, p in enumerate(poses)]


# -- link -----------------------------------------------------------------


def link_schedule(n: int, loss_rate: float, seed: int, burst_len: float = 1.0,
                  outages: Sequence = ()) -> np.ndarray:
    """Per-tick link availability (True = up).

    Random loss follows a two-state chain whose long-run down fraction is
    ``loss_rate`` and whose mean outage length is ``burst_len`` ticks.
    ``outages`` adds forced ``(start, length)`` outages on top.
    """
    if not 0.0 <= loss_rate <= 1.0:
        raise ValueError(f"loss_rate must lie in [0, 1], got {loss_rate}")
    if burst_len < 1:
        raise ValueError("burst_len must be >= 1")
    up = np.ones(n, dtype=bool)
    if loss_rate >= 1.0:
        up[:] = False
    elif loss_rate > 0.0:
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        p_recover = 1.0 / burst_len
        p_fail = min(1.0, loss_rate * p_recover / (1.0 - loss_rate))
        down = u[0] < loss_rate
        for i in range(n):
            if i:
                down = (u[i] >= p_recover) if down else (u[i] < p_fail)
            up[i] = not down
    for start, length in outages:
        up[max(0, start):max(0, start + length)] = False
    return up


def gap_episodes(mask_up: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous down runs as ``(start, length)``."""
    gaps = []
    start = None
    for i, u in enumerate(mask_up):
        if not u and start is None:
            start = i
        elif u and start is not None:
            gaps.append((start, i - start))
            start = None
    if start is not None:
        gaps.append((start, len(mask_up) - start))
    return gaps


def lossy_channel(frames: Sequence, loss_rate: float, seed: int, burst_len: float = 1.0,
                  outages: Sequence = ()):
    """Drop frames according to :func:`link_schedule`.

    Returns ``(delivered, gaps)``: the surviving frames in order and the
    ``(start, length)`` index ranges that were lost.
    """
    up = link_schedule(len(frames), loss_rate, seed, burst_len, outages)
    return [f for f, u in zip(frames, up) if u], gap_episodes(up)


# -- dense oracle ---------------------------------------------------------


@njit(cache=True)
def _dense_misses(g0, targets, weights, occupied, lo, misses):
    out = np.empty((_max_walk_len(g0, targets), 3), dtype=np.int64)
    nx, ny, nz = occupied.shape
    for i in range(targets.shape[0]):
        n = _walk(g0[0], g0[1], g0[2], targets[i, 0], targets[i, 1], targets[i, 2], out)
        w = weights[i]
        for j in range(n):
            x = out[j, 0] - lo[0]
            y = out[j, 1] - lo[1]
            z = out[j, 2] - lo[2]
            if 0 <= x < nx and 0 <= y < ny and 0 <= z < nz and occupied[x, y, z]:
                misses[x, y, z] += w


@dataclass
class DenseGrid:
    lo: np.ndarray  # key of cell [0, 0, 0]
    l: np.ndarray
    occupied: np.ndarray  # cell is in the occupancy map
    state: np.ndarray  # OccState values

    def records(self) -> dict:
        """``key -> (l, OccState)`` for every cell in the occupancy map."""
        idx = np.argwhere(self.occupied)
        keys = idx + self.lo
        return {tuple(int(v) for v in k): (float(self.l[tuple(i)]), OccState(int(self.state[tuple(i)])))
                for k, i in zip(keys, idx)}


def dense_reference_map(frames: Sequence[SensorFrame], cfg: MapConfig, bounds) -> DenseGrid:
    """Array-based occupancy mapping over a bounded grid, used as an oracle.

    Mirrors the hash map's semantics without retention limits: a voxel enters
    the map on its first hit with the ``p_init`` prior, misses only count on
    voxels in the map, and a voxel leaves the map (forgetting its log-odds)
    when it turns free.
    """
    o = np.asarray(cfg.origin, dtype=np.float64)
    lo = np.floor((np.asarray(bounds[0], dtype=np.float64) - o) / cfg.res).astype(np.int64)
    hi = np.floor((np.asarray(bounds[1], dtype=np.float64) - o) / cfg.res).astype(np.int64)
    shape = tuple(int(v) for v in hi - lo + 1)
    l = np.zeros(shape)
    occupied = np.zeros(shape, dtype=bool)
    state = np.full(shape, int(OccState.UNKNOWN), dtype=np.int8)
    bonus = logit(cfg.p_init)
    for fi, fr in enumerate(frames):
        pts = fr.points
        if not math.isinf(cfg.d_in) and len(pts):
            pts = pts[np.linalg.norm(pts - np.asarray(fr.origin), axis=1) <= cfg.d_in]
        if not len(pts):
            continue
        keys = np.floor((pts - o) / cfg.res).astype(np.int64)
        if np.any(keys < lo) or np.any(keys > hi):
            raise ValueError(f"frame {fi} has points outside the oracle bounds")
        uk, cnt = np.unique(keys, axis=0, return_counts=True)
        idx = tuple((uk - lo).T)
        hits = np.zeros(shape, dtype=np.int64)
        hits[idx] = cnt
        fresh = hits.astype(bool) & ~occupied
        l[fresh] += bonus
        occupied |= fresh
        misses = np.zeros(shape, dtype=np.int64)
        _dense_misses(grid_start(fr.origin, cfg), uk, cnt.astype(np.int64), occupied, lo, misses)
        t = occupied & ((hits > 0) | (misses > 0))
        lt = l[t] + (hits[t] * cfg.l_hit + misses[t] * cfg.l_miss)
        lt = np.minimum(np.maximum(lt, cfg.l_min), cfg.l_max)
        l[t] = lt
        st = np.where(lt >= cfg.l_occ_th, int(OccState.OCC),
                      np.where(lt <= cfg.l_free_th, int(OccState.FREE), int(OccState.UNKNOWN)))
        state[t] = st
        freed = np.zeros(shape, dtype=bool)
        freed[t] = st == int(OccState.FREE)
        occupied &= ~freed
        l[freed] = 0.0
        state[freed] = int(OccState.UNKNOWN)
    return DenseGrid(lo=lo, l=l, occupied=occupied, state=state)


# -- scene files ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_scene_file(path, scene: Scene, sensor: Optional[SensorSpec] = None,
                     trajectory: Optional[dict] = None) -> None:
    lines = ["# vxmap scene", f"seed = {scene.seed}",
             f"bounds = {_fmt(list(scene.bounds[0]) + list(scene.bounds[1]))}",
             f"ground = {_fmt(scene.ground)}", f"enclosed = {_fmt(scene.enclosed)}"]
    lines += [f"box = {_fmt(b)}" for b in scene.boxes]
    lines += [f"cylinder = {_fmt(c)}" for c in scene.cylinders]
    if sensor is not None:
        lines += [f"sensor.{k} = {_fmt(v)}" for k, v in asdict(sensor).items()]
    if trajectory:
        for k in ("speed", "hover", "frames"):
            if trajectory.get(k) is not None:
                lines.append(f"trajectory.{k} = {_fmt(trajectory[k])}")
        lines += [f"waypoint = {_fmt([float(x) for x in w])}" for w in trajectory.get("waypoints", ())]
    Path(path).write_text("\n".join(lines) + "\n")


def _bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true/false, got {s!r}")


def read_scene_file(path):
    """Parse a scene file into ``(scene, sensor_or_None, trajectory_dict)``."""
    scene = Scene(bounds=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)))
    sensor: dict = {}
    traj: dict = {"waypoints": []}
    have_bounds = False
    for no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{no}: expected 'name = value'")
        name, value = (s.strip() for s in line.split("=", 1))
        vals = value.split()
        try:
            if name == "seed":
                scene.seed = int(value)
            elif name == "bounds":
                b = [float(v) for v in vals]
                if len(b) != 6:
                    raise ValueError("bounds needs 6 numbers")
                scene.bounds = (tuple(b[:3]), tuple(b[3:]))
                have_bounds = True
            elif name == "ground":
                scene.ground = _bool(value)
            elif name == "enclosed":
                scene.enclosed = _bool(value)
            elif name == "box":
                b = tuple(float(v) for v in vals)
                if len(b) != 6:
                    raise ValueError("box needs 6 numbers")
                scene.boxes.append(b)
            elif name == "cylinder":
                c = tuple(float(v) for v in vals)
                if len(c) != 5:
                    raise ValueError("cylinder needs 5 numbers")
                scene.cylinders.append(c)
            elif name.startswith("sensor."):
                key = name[len("sensor."):]
                if key not in SensorSpec.__dataclass_fields__:
                    raise ValueError(f"unknown sensor field {key!r}")
                sensor[key] = int(value) if key == "rays_per_frame" else float(value)
            elif name in ("trajectory.speed",):
                traj["speed"] = float(value)
            elif name in ("trajectory.hover", "trajectory.frames"):
                traj[name.split(".")[1]] = int(value)
            elif name == "waypoint":
                w = tuple(float(v) for v in vals)
                if len(w) != 3:
                    raise ValueError("waypoint needs 3 numbers")
                traj["waypoints"].append(w)
            else:
                raise ValueError(f"unknown key {name!r}")
        except ValueError as e:
            raise ValueError(f"{path}:{no}: {e}") from None
    if not have_bounds:
        raise ValueError(f"{path}: missing bounds")
    return scene, (SensorSpec(**sensor) if sensor else None), traj


def scenario_frames(scene: Scene, sensor: SensorSpec, traj: dict) -> list[SensorFrame]:
    """Frames for the trajectory described in a scene file."""
    poses = waypoint_path(traj["waypoints"], traj.get("speed", 1.0), sensor.rate,
                          traj.get("hover", 0), traj.get("frames"))
    check_path(scene, poses)
    return scan_sequence(scene, poses, sensor)
