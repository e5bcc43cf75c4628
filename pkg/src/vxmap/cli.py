"""``vxmap`` command line: replay, share-sim, gen and export.

Every run prints one JSON report on stdout. Exit codes: 0 success, 1 runtime
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import resource
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import MapConfig
from .integrate import SensorFrame
from .io import export_ply, read_frame_log, sniff_log, write_frame_log
from .pipeline import VoxelMapper
from .share import FrameRing, decode_frame, encode_frame, read_share_log, write_share_log
from .sim import (
    SensorSpec,
    check_path,
    gap_episodes,
    gen_scene,
    link_schedule,
    read_scene_file,
    scan_sequence,
    scenario_frames,
    waypoint_path,
    write_scene_file,
)

RAW_POINT_BYTES = 16
REPORT_VERSION = 1


class UsageError(Exception):
    """Bad flags, parameter files or configuration values (exit code 2)."""


# -- configuration --------------------------------------------------------


def _number(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


def parse_value(name: str, text: str):
    """Convert the text form of one MapConfig field."""
    if name == "origin":
        parts = text.replace(",", " ").split()
        if len(parts) != 3:
            raise UsageError(f"origin needs 3 numbers, got {text!r}")
        return tuple(float(p) for p in parts)
    if name == "ring_capacity":
        return int(text)
    v = _number(text)
    if name == "n_lim" and math.isfinite(v):
        if not v.is_integer():
            raise UsageError(f"n_lim must be an integer or inf, got {text!r}")
        return int(v)
    return v


def read_params_file(path) -> tuple[dict, dict]:
    """Parse a params file into ``(overrides, schedule)``.

    ``name = value`` lines override MapConfig fields. ``at N set name = value``
    stages a change before frame ``N`` (0-based). ``#`` starts a comment.
    """
    overrides: dict = {}
    schedule: dict = {}
    fields = MapConfig.field_names()
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read params file: {e}") from None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        target = overrides
        words = line.split(None, 3)
        if words[0] == "at":
            if len(words) < 4 or words[2] != "set":
                raise UsageError(f"{path}:{no}: expected 'at N set name = value'")
            try:
                frame = int(words[1])
            except ValueError:
                raise UsageError(f"{path}:{no}: bad frame number {words[1]!r}") from None
            if frame < 0:
                raise UsageError(f"{path}:{no}: frame number must be >= 0")
            target = schedule.setdefault(frame, {})
            line = words[3]
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected 'name = value'")
        name, value = (s.strip() for s in line.split("=", 1))
        if name not in fields:
            raise UsageError(f"{path}:{no}: unknown parameter {name!r}")
        if target is not overrides and name in ("res", "origin"):
            raise UsageError(f"{path}:{no}: {name} cannot change during a run")
        try:
            target[name] = parse_value(name, value)
        except ValueError as e:
            raise UsageError(f"{path}:{no}: {e}") from None
    return overrides, schedule


def add_map_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("map parameters (log-odds values in natural-log odds)")
    d = MapConfig()
    for name in MapConfig.field_names():
        flag = "--" + name.replace("_", "-")
        if name == "origin":
            g.add_argument(flag, type=float, nargs=3, metavar=("X", "Y", "Z"), default=None,
                           help=f"map origin in meters (default {' '.join(map(str, d.origin))})")
        elif name == "ring_capacity":
            g.add_argument(flag, type=int, default=None,
                           help=f"share outbox capacity in frames (default {d.ring_capacity})")
        else:
            g.add_argument(flag, type=str, default=None, metavar="V",
                           help=f"default {getattr(d, name):g}")
    p.add_argument("--params", metavar="FILE",
                   help="parameter file; overrides flags, may schedule 'at N set name = value'")


def config_from_args(args) -> tuple[MapConfig, dict]:
    values: dict = {}
    for name in MapConfig.field_names():
        v = getattr(args, name, None)
        if v is None:
            continue
        try:
            values[name] = tuple(v) if name == "origin" else (v if name == "ring_capacity" else parse_value(name, v))
        except ValueError as e:
            raise UsageError(f"--{name.replace('_', '-')}: {e}") from None
    schedule: dict = {}
    if getattr(args, "params", None):
        overrides, schedule = read_params_file(args.params)
        values.update(overrides)
    try:
        cfg = MapConfig(**values)
        for frame in sorted(schedule):
            cfg.with_changes(**schedule[frame])
    except (ValueError, TypeError) as e:
        raise UsageError(f"invalid map configuration: {e}") from None
    return cfg, schedule


# -- inputs ---------------------------------------------------------------


def load_frames(path, max_frames: Optional[int] = None) -> list[SensorFrame]:
    """Frames from a point log, or simulated from a scene file."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input {path} does not exist")
    head = p.read_bytes()[:8]
    try:
        kind = sniff_log(p)
    except ValueError:
        kind = None
    if kind == "share":
        raise UsageError(f"{path} is a share log; replay needs a point log or a scene file")
    if kind == "points":
        frames = []
        for fr in read_frame_log(p):
            if max_frames is not None and len(frames) >= max_frames:
                break
            frames.append(fr)
        return frames
    if b"\0" in head:
        raise UsageError(f"{path} is neither a point log nor a scene file")
    try:
        scene, sensor, traj = read_scene_file(p)
    except (ValueError, UnicodeDecodeError) as e:
        raise UsageError(str(e)) from None
    if not traj["waypoints"]:
        raise UsageError(f"{path}: scene file has no waypoints")
    if max_frames is not None:
        traj = {**traj, "frames": min(max_frames, traj.get("frames") or max_frames)}
    return scenario_frames(scene, sensor or SensorSpec(), traj)


# -- runs -----------------------------------------------------------------


def _peak_rss_mb() -> float:
    # ru_maxrss is KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _timing_summary(values: Sequence[float], prefix: str) -> dict:
    a = np.asarray(values, dtype=float)
    if not len(a):
        return {f"{prefix}_{k}": 0.0 for k in ("p50", "p90", "p99", "max")}
    return {
        f"{prefix}_p50": float(np.percentile(a, 50)),
        f"{prefix}_p90": float(np.percentile(a, 90)),
        f"{prefix}_p99": float(np.percentile(a, 99)),
        f"{prefix}_max": float(a.max()),
    }


def _cfg_dict(cfg: MapConfig) -> dict:
    out = {}
    for name in MapConfig.field_names():
        v = getattr(cfg, name)
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        out[name] = list(v) if isinstance(v, tuple) else v
    return out


def run_replay(frames: Sequence[SensorFrame], cfg: MapConfig, schedule: Optional[dict] = None,
               mapper: Optional[VoxelMapper] = None) -> tuple[dict, VoxelMapper]:
    """Run the full pipeline over ``frames`` and build the benchmark report."""
    schedule = schedule or {}
    m = mapper or VoxelMapper(cfg)
    t_tot, t_occ, t_inf, t_m, t_in = [], [], [], [], []
    n_inf_sum = 0
    n_points = 0
    for i, fr in enumerate(frames):
        if i in schedule:
            m.update_params(**schedule[i])
        s = m.update(fr)
        t_tot.append(s.t_total)
        t_in.append(s.t_input)
        t_occ.append(s.t_occupancy)
        t_inf.append(s.t_inflation)
        t_m.append(s.t_retention)
        n_inf_sum += m.n_inflated()
        n_points += s.n_points_in
    n = max(len(frames), 1)
    report = {
        "command": "replay",
        "report_version": REPORT_VERSION,
        "frames": len(frames),
        "points_mean": n_points / n,
        "n_occ": m.n_occ(),
        "n_inf": n_inf_sum / n,
        "n_inf_final": m.n_inflated(),
        "t_tot": float(np.mean(t_tot)) if t_tot else 0.0,
        "t_in": float(np.mean(t_in)) if t_in else 0.0,
        "t_occ": float(np.mean(t_occ)) if t_occ else 0.0,
        "t_inf": float(np.mean(t_inf)) if t_inf else 0.0,
        "t_m": float(np.mean(t_m)) if t_m else 0.0,
        **_timing_summary(t_tot, "t_tot"),
        "m_max_mb": _peak_rss_mb(),
        "config": _cfg_dict(m.cfg),
    }
    return report, m


def run_share_sim(frames: Sequence[SensorFrame], cfg: MapConfig, loss_rate: float = 0.0,
                  seed: int = 0, burst_len: float = 1.0, outages: Sequence = (),
                  schedule: Optional[dict] = None, share_log=None) -> tuple[dict, VoxelMapper, VoxelMapper]:
    """Sender-to-receiver relay over a simulated lossy link.

    Each cycle the sender exports its newly occupied keys into its outbox
    ring. Whenever the link is up, every held frame is transmitted, the
    receiver acknowledges the newest, and the sender drops what was
    acknowledged. A frame overwritten in the ring before the link came back is
    lost for good and shows up as a sequence gap at the receiver.
    """
    schedule = schedule or {}
    sender = VoxelMapper(cfg, sender_id=1)
    receiver = VoxelMapper(cfg, sender_id=2)
    ring = FrameRing(cfg.ring_capacity)
    up = link_schedule(len(frames), loss_rate, seed, burst_len, outages)
    wire: dict[int, bytes] = {}
    raw = encoded = transmitted = delivered = 0
    last_seq = 0
    n_delivered = 0
    seq_gaps = []
    sent_log = []
    t_rx = []
    for i, fr in enumerate(frames):
        if i in schedule:
            sender.update_params(**schedule[i])
            receiver.update_params(**schedule[i])
        s = sender.update(fr)
        raw += RAW_POINT_BYTES * (s.n_points_in - s.n_points_nonfinite)
        out = sender.export_frame(int(round(fr.stamp * 1e6)))
        data = encode_frame(out)
        encoded += len(data)
        wire[out.seq] = data
        ring.push(out)
        incoming = []
        if up[i]:
            held = ring.drain()
            for f in held:
                buf = wire[f.seq]
                transmitted += len(buf)
                got = decode_frame(buf)
                if got.seq <= last_seq:
                    continue
                if got.seq > last_seq + 1:
                    seq_gaps.append((last_seq + 1, got.seq - last_seq - 1))
                last_seq = got.seq
                delivered += len(buf)
                n_delivered += 1
                incoming.append(got)
                sent_log.append(got)
            if held:
                ring.ack(held[-1].seq)
            for seq in [k for k in wire if k <= last_seq]:
                del wire[seq]
        r = receiver.update(None, incoming)
        t_rx.append(r.t_total)
    if share_log is not None:
        write_share_log(share_log, sent_log)
    occ_s = sender.occupied_keys()
    occ_r = receiver.occupied_keys()
    kept = len(occ_s & occ_r)
    report = {
        "command": "share-sim",
        "report_version": REPORT_VERSION,
        "frames": len(frames),
        "raw_bytes": raw,
        "encoded_bytes": encoded,
        "transmitted_bytes": transmitted,
        "delivered_bytes": delivered,
        "reduction_pct": 100.0 * (1.0 - delivered / raw) if raw else 100.0,
        "encoded_reduction_pct": 100.0 * (1.0 - encoded / raw) if raw else 100.0,
        "share_frames": sender.seq,
        "frames_delivered": n_delivered,
        "frames_pending": len(ring),
        "ring_overwritten": ring.overwritten,
        "link_gaps": [list(g) for g in gap_episodes(up)],
        "seq_gaps": [list(g) for g in seq_gaps],
        "frames_lost": sum(g[1] for g in seq_gaps),
        "sender_n_occ": len(occ_s),
        "receiver_n_occ": len(occ_r),
        "retention_pct": 100.0 * kept / len(occ_s) if occ_s else 100.0,
        "t_rx": float(np.mean(t_rx)) if t_rx else 0.0,
        "m_max_mb": _peak_rss_mb(),
        "config": _cfg_dict(cfg),
    }
    return report, sender, receiver


def default_waypoints(bounds, z: Optional[float] = None) -> list:
    """A straight pass along the x axis through the middle of the bounds."""
    lo, hi = np.asarray(bounds[0], float), np.asarray(bounds[1], float)
    mid = (lo + hi) / 2
    zz = float(mid[2] if z is None else z)
    span = hi[0] - lo[0]
    return [(lo[0] + 0.1 * span, mid[1], zz), (hi[0] - 0.1 * span, mid[1], zz)]


def run_gen(seed: int, extent, density: float, sensor: SensorSpec, speed: float, hover: int,
            n_frames: Optional[int], waypoints=None, ground: bool = False,
            enclosed: bool = False, corridor: float = 1.5):
    """Generate a scene with a clear corridor along the flight path, plus its frames."""
    lo = (0.0, 0.0, 0.0)
    bounds = (lo, tuple(float(v) for v in extent))
    wps = [tuple(map(float, w)) for w in (waypoints or default_waypoints(bounds))]
    keepout = list(zip(wps[:-1], wps[1:])) if len(wps) > 1 else [(wps[0], wps[0])]
    scene = gen_scene(seed, extent, density, ground=ground, enclosed=enclosed,
                      keepout=keepout, clearance=corridor)
    traj = {"speed": speed, "hover": hover, "frames": n_frames, "waypoints": wps}
    # the whole route must be flyable even if the frame cap ends it early
    check_path(scene, [(*w, 0.0) for w in wps])
    poses = waypoint_path(wps, speed, sensor.rate, hover, n_frames)
    check_path(scene, poses)
    frames = scan_sequence(scene, poses, sensor)
    return scene, traj, frames


# -- argument parsing -----------------------------------------------------


def _outage(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        start, length = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:LENGTH in frames, got {text!r}") from None
    if start < 0 or length < 0:
        raise argparse.ArgumentTypeError("outage start and length must be >= 0")
    return start, length


def _waypoints(text: str) -> list:
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            v = [float(x) for x in chunk.replace(",", " ").split()]
            if len(v) != 3:
                raise argparse.ArgumentTypeError(f"waypoint needs 3 numbers, got {chunk!r}")
            out.append(tuple(v))
    if not out:
        raise argparse.ArgumentTypeError("no waypoints given")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vxmap", description="Voxel occupancy mapping: replay logs, simulate map sharing, generate scenes, export PLY.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("replay", help="run the mapping pipeline over a point log or scene file")
    r.add_argument("input", help="point log (VXPCLOG1) or scene file")
    r.add_argument("--frames", type=int, help="stop after this many frames")
    r.add_argument("--export", choices=("occupied", "inflated"), help="write a PLY of the final map")
    r.add_argument("--out", default="map.ply", help="PLY path for --export (default map.ply)")
    r.add_argument("--report", help="also write the JSON report to this file")
    add_map_flags(r)

    s = sub.add_parser("share-sim", help="relay map deltas from a sender to a receiver over a lossy link")
    s.add_argument("input", help="point log (VXPCLOG1) or scene file")
    s.add_argument("--frames", type=int, help="stop after this many frames")
    s.add_argument("--loss-rate", type=float, default=0.0, help="long-run fraction of ticks with the link down")
    s.add_argument("--burst-len", type=float, default=1.0, help="mean outage length in frames")
    s.add_argument("--outage", type=_outage, action="append", default=[], metavar="START:LEN",
                   help="forced outage in frames; repeatable")
    s.add_argument("--seed", type=int, default=0, help="link randomness seed")
    s.add_argument("--share-log", help="write the delivered share frames to this VXMLOG1 file")
    s.add_argument("--report", help="also write the JSON report to this file")
    add_map_flags(s)

    g = sub.add_parser("gen", help="generate a scene file and a simulated flight log")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--extent", type=float, nargs=3, default=(32.0, 32.0, 8.0), metavar=("X", "Y", "Z"))
    g.add_argument("--density", type=float, default=0.05, help="obstacle volume fraction")
    g.add_argument("--ground", action="store_true", help="add a floor plane")
    g.add_argument("--enclosed", action="store_true", help="close the scene with walls, floor and ceiling")
    g.add_argument("--waypoints", type=_waypoints, help="'x y z; x y z; ...' (default: pass along x)")
    g.add_argument("--corridor", type=float, default=1.5, help="obstacle-free radius around the path")
    g.add_argument("--speed", type=float, default=1.0, help="m/s")
    g.add_argument("--hover", type=int, default=0, help="frames at the first waypoint")
    g.add_argument("--frames", type=int, help="cap on the frame count")
    g.add_argument("--rays", type=int, default=4000, help="rays per frame")
    g.add_argument("--max-range", type=float, default=40.0)
    g.add_argument("--rate", type=float, default=10.0, help="frames per second")
    g.add_argument("--scene-out", default="scene.txt")
    g.add_argument("--log-out", default="frames.vxlog")

    e = sub.add_parser("export", help="build a map from a point or share log and write a PLY")
    e.add_argument("input", help="point log (VXPCLOG1) or share log (VXMLOG1)")
    e.add_argument("--out", default="map.ply")
    e.add_argument("--mode", choices=("occupied", "inflated"), default="occupied")
    add_map_flags(e)
    return p


def _emit(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, sort_keys=True)
    print(text)
    if path:
        Path(path).write_text(text + "\n")


def _cmd_replay(args) -> None:
    cfg, schedule = config_from_args(args)
    frames = load_frames(args.input, args.frames)
    report, m = run_replay(frames, cfg, schedule)
    report["input"] = str(args.input)
    if args.export:
        report["export_vertices"] = export_ply(m.state, args.out, args.export)
        report["export_path"] = str(args.out)
    _emit(report, args.report)


def _cmd_share_sim(args) -> None:
    cfg, schedule = config_from_args(args)
    if not 0.0 <= args.loss_rate <= 1.0:
        raise UsageError("--loss-rate must lie in [0, 1]")
    if args.burst_len < 1:
        raise UsageError("--burst-len must be >= 1")
    frames = load_frames(args.input, args.frames)
    report, _, _ = run_share_sim(frames, cfg, args.loss_rate, args.seed, args.burst_len,
                                 args.outage, schedule, args.share_log)
    report["input"] = str(args.input)
    _emit(report, args.report)


def _cmd_gen(args) -> None:
    try:
        sensor = SensorSpec(max_range=args.max_range, rate=args.rate, rays_per_frame=args.rays)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.speed <= 0 or args.hover < 0:
        raise UsageError("--speed must be > 0 and --hover >= 0")
    if not 0.0 <= args.density <= 0.5:
        raise UsageError("--density must lie in [0, 0.5]")
    scene, traj, frames = run_gen(args.seed, args.extent, args.density, sensor, args.speed,
                                  args.hover, args.frames, args.waypoints, args.ground,
                                  args.enclosed, args.corridor)
    write_scene_file(args.scene_out, scene, sensor, traj)
    write_frame_log(args.log_out, frames)
    n_pts = [len(f) for f in frames]
    _emit({
        "command": "gen",
        "report_version": REPORT_VERSION,
        "seed": args.seed,
        "frames": len(frames),
        "points_mean": float(np.mean(n_pts)) if n_pts else 0.0,
        "boxes": len(scene.boxes),
        "cylinders": len(scene.cylinders),
        "fill_fraction": scene.fill_fraction,
        "scene_path": str(args.scene_out),
        "log_path": str(args.log_out),
    }, None)


def _cmd_export(args) -> None:
    cfg, schedule = config_from_args(args)
    p = Path(args.input)
    if not p.is_file():
        raise UsageError(f"input {args.input} does not exist")
    try:
        kind = sniff_log(p)
    except ValueError as e:
        raise UsageError(str(e)) from None
    m = VoxelMapper(cfg)
    n = 0
    if kind == "points":
        for i, fr in enumerate(read_frame_log(p)):
            if i in schedule:
                m.update_params(**schedule[i])
            m.update(fr)
            n += 1
    else:
        for i, sf in enumerate(read_share_log(p)):
            if i in schedule:
                m.update_params(**schedule[i])
            m.update(None, [sf])
            n += 1
    count = export_ply(m.state, args.out, args.mode)
    _emit({
        "command": "export",
        "report_version": REPORT_VERSION,
        "input": str(args.input),
        "input_kind": kind,
        "frames": n,
        "mode": args.mode,
        "vertices": count,
        "n_occ": m.n_occ(),
        "n_inf_final": m.n_inflated(),
        "export_path": str(args.out),
    }, None)


COMMANDS = {"replay": _cmd_replay, "share-sim": _cmd_share_sim, "gen": _cmd_gen, "export": _cmd_export}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as e:
        print(f"vxmap {args.command}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"vxmap {args.command}: error: {e}", file=sys.stderr)
        return 1
    finally:
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
