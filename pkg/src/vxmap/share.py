"""Map sharing: newly-occupied delta frames, an outbox ring and the wire codec.

Wire layout (little-endian)::

    offset  size  field
    0       4     magic b"VXM1"
    4       4     sender_id   uint32
    8       4     seq         uint32
    12      8     stamp       uint64, microseconds
    20      4     res         float32, meters
    24      4     key_count   uint32
    28      12    first key   3 x int32          (only if key_count > 0)
    40      ...   remaining keys: per component, zig-zag varint of the
                  difference to the previous key

Keys are sorted lexicographically, so consecutive differences are small.
"""

from __future__ import annotations

import math
import struct
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import INT32_MAX, INT32_MIN

MAGIC = b"VXM1"
HEADER = struct.Struct("<4sIIQfI")
FIRST_KEY = struct.Struct("<iii")
LOG_MAGIC = b"VXMLOG1\0"
LEN_PREFIX = struct.Struct("<I")

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1


class DecodeError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (at byte offset {offset})")
        self.offset = offset


def _f32(x: float) -> float:
    return float(np.float32(x))


@dataclass(frozen=True)
class ShareFrame:
    """Keys that became occupied in one cycle of one sender.

    Keys are de-duplicated and sorted on construction and ``res`` is rounded
    to float32, so a frame always equals its own decoded encoding.
    """

    sender_id: int
    seq: int
    stamp: int
    res: float
    keys: tuple = ()

    def __post_init__(self):
        keys = tuple(sorted({(int(k[0]), int(k[1]), int(k[2])) for k in self.keys}))
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "res", _f32(self.res))
        for name, hi in (("sender_id", U32_MAX), ("seq", U32_MAX), ("stamp", U64_MAX)):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v <= hi):
                raise ValueError(f"{name}={v!r} out of range")
        if not (math.isfinite(self.res) and self.res > 0):
            raise ValueError(f"res must be finite and positive, got {self.res}")
        for k in keys:
            if not all(INT32_MIN <= c <= INT32_MAX for c in k):
                raise ValueError(f"key {k} does not fit in int32")

    @property
    def key_count(self) -> int:
        return len(self.keys)


def collect_export_frame(state, sender_id: int, seq: int, stamp: int = 0) -> ShareFrame:
    """Build the share frame for the cycle just completed and clear ``newly_occ``.

    Keys that arrived from peers this cycle are left out.
    """
    keys = [k for k in state.newly_occ if k not in state.received]
    state.newly_occ = []
    return ShareFrame(sender_id, seq, stamp, state.cfg.res, keys)


class FrameRing:
    """Fixed-capacity outbox. Pushing into a full ring overwrites the oldest frame.

    ``drain`` is non-destructive; ``ack`` drops frames the peer has received.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("ring capacity must be >= 1")
        self.capacity = capacity
        self._slots: deque[ShareFrame] = deque(maxlen=capacity)
        self._last_seq: int | None = None
        self.overwritten = 0

    def __len__(self) -> int:
        return len(self._slots)

    @property
    def next_seq(self) -> int:
        return 1 if self._last_seq is None else self._last_seq + 1

    def push(self, frame: ShareFrame) -> None:
        if self._last_seq is not None and frame.seq <= self._last_seq:
            raise ValueError(f"seq {frame.seq} not after last pushed seq {self._last_seq}")
        if len(self._slots) == self.capacity:
            self.overwritten += 1
        self._slots.append(frame)
        self._last_seq = frame.seq

    def drain(self) -> list[ShareFrame]:
        return list(self._slots)

    def ack(self, seq: int) -> int:
        """Drop held frames with ``seq`` up to and including the given one."""
        n = 0
        while self._slots and self._slots[0].seq <= seq:
            self._slots.popleft()
            n += 1
        return n


def _zigzag(n: int) -> int:
    return n << 1 if n >= 0 else ((-n) << 1) - 1


def _unzigzag(z: int) -> int:
    return z >> 1 if not z & 1 else -((z + 1) >> 1)


def _put_varint(out: bytearray, v: int) -> None:
    while v >= 0x80:
        out.append((v & 0x7F) | 0x80)
        v >>= 7
    out.append(v)


def _get_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    start = pos
    while True:
        if pos >= len(buf):
            raise DecodeError("truncated varint", start)
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift >= 70:
            raise DecodeError("varint longer than 10 bytes", start)


def encode_frame(frame: ShareFrame) -> bytes:
    out = bytearray(HEADER.pack(MAGIC, frame.sender_id, frame.seq, frame.stamp,
                                frame.res, frame.key_count))
    keys = frame.keys
    if keys:
        out += FIRST_KEY.pack(*keys[0])
        px, py, pz = keys[0]
        for x, y, z in keys[1:]:
            _put_varint(out, _zigzag(x - px))
            _put_varint(out, _zigzag(y - py))
            _put_varint(out, _zigzag(z - pz))
            px, py, pz = x, y, z
    return bytes(out)


def decode_frame(buf: bytes) -> ShareFrame:
    buf = bytes(buf)
    if len(buf) < HEADER.size:
        raise DecodeError(f"truncated header ({len(buf)} of {HEADER.size} bytes)", len(buf))
    magic, sender, seq, stamp, res, count = HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}", 0)
    if not (math.isfinite(res) and res > 0):
        raise DecodeError(f"invalid resolution {res}", 20)
    pos = HEADER.size
    keys = []
    if count:
        # every key after the first needs at least 3 bytes
        need = FIRST_KEY.size + 3 * (count - 1)
        if len(buf) - pos < need:
            raise DecodeError(f"key_count {count} exceeds payload of {len(buf) - pos} bytes", pos)
        px, py, pz = FIRST_KEY.unpack_from(buf, pos)
        pos += FIRST_KEY.size
        keys.append((px, py, pz))
        for _ in range(count - 1):
            at = pos
            dx, pos = _get_varint(buf, pos)
            dy, pos = _get_varint(buf, pos)
            dz, pos = _get_varint(buf, pos)
            k = (px + _unzigzag(dx), py + _unzigzag(dy), pz + _unzigzag(dz))
            if not all(INT32_MIN <= c <= INT32_MAX for c in k):
                raise DecodeError(f"key {k} out of int32 range", at)
            if k <= (px, py, pz):
                raise DecodeError("keys not strictly increasing", at)
            keys.append(k)
            px, py, pz = k
    if pos != len(buf):
        raise DecodeError(f"{len(buf) - pos} trailing bytes", pos)
    return ShareFrame(sender, seq, stamp, res, tuple(keys))


def write_share_log(path, frames: Iterable[ShareFrame]) -> int:
    """Write frames to a ``VXMLOG1`` container; returns the frame count."""
    n = 0
    with open(path, "wb") as f:
        f.write(LOG_MAGIC)
        for fr in frames:
            data = encode_frame(fr)
            f.write(LEN_PREFIX.pack(len(data)))
            f.write(data)
            n += 1
    return n


def read_share_log(path) -> Iterator[ShareFrame]:
    data = Path(path).read_bytes()
    if data[:len(LOG_MAGIC)] != LOG_MAGIC:
        raise DecodeError("not a VXMLOG1 file", 0)
    pos = len(LOG_MAGIC)
    while pos < len(data):
        if len(data) - pos < LEN_PREFIX.size:
            raise DecodeError("truncated length prefix", pos)
        (n,) = LEN_PREFIX.unpack_from(data, pos)
        pos += LEN_PREFIX.size
        if len(data) - pos < n:
            raise DecodeError(f"truncated frame of {n} bytes", pos)
        try:
            yield decode_frame(data[pos:pos + n])
        except DecodeError as e:
            raise DecodeError(f"bad frame in log: {e}", pos + e.offset) from None
        pos += n
