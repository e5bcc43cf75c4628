"""Sensor-frame logs and PLY export.

Frame log layout (little-endian): the 8-byte magic ``b"VXPCLOG1"``, then per
frame ``stamp`` (float64), sensor origin (3 x float64), ``point_count``
(uint32) and the points (3 x float32 each).
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import OccState, key_to_center
from .integrate import SensorFrame

LOG_MAGIC = b"VXPCLOG1"
FRAME_HEAD = struct.Struct("<ddddI")
POINT_DTYPE = np.dtype("<f4")


class FrameLogError(ValueError):
    def __init__(self, msg: str, offset: int, frame_index: int):
        super().__init__(f"frame {frame_index}: {msg} (at byte offset {offset})")
        self.offset = offset
        self.frame_index = frame_index


def write_frame_log(path, frames: Iterable[SensorFrame]) -> int:
    n = 0
    with open(path, "wb") as f:
        f.write(LOG_MAGIC)
        for fr in frames:
            pts = np.asarray(fr.points, dtype=POINT_DTYPE).reshape(-1, 3)
            f.write(FRAME_HEAD.pack(fr.stamp, *fr.origin, len(pts)))
            f.write(pts.tobytes())
            n += 1
    return n


def read_frame_log(path) -> Iterator[SensorFrame]:
    """Stream frames in stored order. Non-finite points are dropped and
    counted in each frame's ``n_nonfinite``."""
    with open(path, "rb") as f:
        magic = f.read(len(LOG_MAGIC))
        if magic != LOG_MAGIC:
            raise FrameLogError(f"bad magic {magic!r}", 0, 0)
        offset = len(LOG_MAGIC)
        index = 0
        while True:
            head = f.read(FRAME_HEAD.size)
            if not head:
                return
            if len(head) < FRAME_HEAD.size:
                raise FrameLogError("truncated frame header", offset + len(head), index)
            stamp, ox, oy, oz, count = FRAME_HEAD.unpack(head)
            offset += FRAME_HEAD.size
            nbytes = count * 3 * POINT_DTYPE.itemsize
            body = f.read(nbytes)
            if len(body) < nbytes:
                raise FrameLogError(
                    f"truncated points ({len(body)} of {nbytes} bytes)", offset + len(body), index
                )
            offset += nbytes
            pts = np.frombuffer(body, dtype=POINT_DTYPE).reshape(-1, 3)
            yield SensorFrame(stamp, (ox, oy, oz), pts)
            index += 1


def sniff_log(path) -> str:
    """``"points"`` for a frame log, ``"share"`` for a share-frame log."""
    from .share import LOG_MAGIC as SHARE_MAGIC

    head = Path(path).read_bytes()[:8]
    if head == LOG_MAGIC:
        return "points"
    if head == SHARE_MAGIC:
        return "share"
    raise ValueError(f"{path}: unrecognised log magic {head!r}")


def export_ply(state, path, mode: str = "occupied") -> int:
    """Write voxel centers as ASCII PLY; returns the vertex count.

    ``occupied`` writes records in state Occ, ``inflated`` writes records with
    a non-zero inflation count.
    """
    if mode == "occupied":
        keys = [k for k, r in state.occ_map.items() if r.state is OccState.OCC]
    elif mode == "inflated":
        keys = [k for k, r in state.inf_map.items() if r.n_i > 0]
    else:
        raise ValueError(f"unknown export mode {mode!r}")
    lines = [
        "ply", "format ascii 1.0", f"comment vxmap {mode} voxels res {state.cfg.res}",
        f"element vertex {len(keys)}",
        "property float x", "property float y", "property float z", "end_header",
    ]
    for k in sorted(keys):
        x, y, z = key_to_center(k, state.cfg)
        lines.append(f"{x:.6f} {y:.6f} {z:.6f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return len(keys)
