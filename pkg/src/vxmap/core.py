"""Grid/key arithmetic, log-odds helpers and the map configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import IntEnum
from typing import Tuple

import numpy as np

VoxelKey = Tuple[int, int, int]

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


class OccState(IntEnum):
    """Occupancy state. Ordered so that ``Free < Unknown < Occ``."""

    FREE = 0
    UNKNOWN = 1
    OCC = 2


def logit(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    return math.log(p / (1.0 - p))


def prob(l: float) -> float:
    # split on sign so exp never overflows
    if l >= 0:
        return 1.0 / (1.0 + math.exp(-l))
    e = math.exp(l)
    return e / (1.0 + e)


@dataclass(frozen=True)
class MapConfig:
    """Map parameters.

    Lengths are meters, log-odds values are natural-log odds. ``d_in``,
    ``d_inf`` and ``n_lim`` accept ``math.inf`` for "no limit".
    """

    res: float = 0.1
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    p_init: float = 0.80
    l_hit: float = field(default_factory=lambda: logit(0.65))
    l_miss: float = field(default_factory=lambda: logit(0.35))
    l_min: float = field(default_factory=lambda: logit(0.12))
    l_max: float = field(default_factory=lambda: logit(0.97))
    l_occ_th: float = field(default_factory=lambda: logit(0.80))
    l_free_th: float = field(default_factory=lambda: logit(0.30))
    d_in: float = math.inf
    d_inf: float = math.inf
    r_obs: float = 0.2
    n_lim: float = math.inf
    ring_capacity: int = 50

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        self.validate()

    def validate(self) -> None:
        if not (math.isfinite(self.res) and self.res > 0):
            raise ValueError(f"res must be finite and > 0, got {self.res}")
        if len(self.origin) != 3 or not all(math.isfinite(v) for v in self.origin):
            raise ValueError(f"origin must be 3 finite values, got {self.origin}")
        if not 0.0 < self.p_init < 1.0:
            raise ValueError(f"p_init must lie in (0, 1), got {self.p_init}")
        if not self.l_hit > 0:
            raise ValueError("l_hit must be > 0")
        if not self.l_miss < 0:
            raise ValueError("l_miss must be < 0")
        if not (self.l_min <= self.l_free_th < self.l_occ_th <= self.l_max):
            raise ValueError(
                "thresholds must satisfy l_min <= l_free_th < l_occ_th <= l_max, got "
                f"{self.l_min}, {self.l_free_th}, {self.l_occ_th}, {self.l_max}"
            )
        if not self.r_obs >= 0 or math.isinf(self.r_obs):
            raise ValueError(f"r_obs must be finite and >= 0, got {self.r_obs}")
        for name in ("d_in", "d_inf"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not (math.isinf(self.n_lim) or (self.n_lim >= 1 and float(self.n_lim).is_integer())):
            raise ValueError(f"n_lim must be an integer >= 1 or inf, got {self.n_lim}")
        if not (isinstance(self.ring_capacity, int) and self.ring_capacity >= 1):
            raise ValueError(f"ring_capacity must be an int >= 1, got {self.ring_capacity}")

    def with_changes(self, **changes) -> "MapConfig":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def pos_to_key(p, cfg: MapConfig) -> VoxelKey:
    o = cfg.origin
    r = cfg.res
    return (
        math.floor((p[0] - o[0]) / r),
        math.floor((p[1] - o[1]) / r),
        math.floor((p[2] - o[2]) / r),
    )


def pos_to_keys(points: np.ndarray, cfg: MapConfig) -> np.ndarray:
    """Vectorised :func:`pos_to_key` for an ``(N, 3)`` array; returns int64."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return np.floor((pts - np.asarray(cfg.origin)) / cfg.res).astype(np.int64)


def unique_rows(keys: np.ndarray, return_inverse: bool = False):
    """``np.unique(keys, axis=0, return_counts=True)`` for int64 ``(N, 3)`` keys.

    Rows are packed into one int64 (mixed radix over the bounding box, which
    keeps lexicographic order) so a flat sort does the work.
    """
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 3)
    if not len(keys):
        out = (keys.copy(), np.zeros(0, dtype=np.int64))
        return out + (np.zeros(0, dtype=np.int64),) if return_inverse else out
    lo = keys.min(axis=0)
    span = keys.max(axis=0) - lo + 1
    if float(span[0]) * float(span[1]) * float(span[2]) >= 2.0**62:
        r = np.unique(keys, axis=0, return_counts=True, return_inverse=return_inverse)
        return (r[0], r[2], r[1].reshape(-1)) if return_inverse else r
    sy, sz = int(span[1]), int(span[2])
    d = keys - lo
    packed = (d[:, 0] * sy + d[:, 1]) * sz + d[:, 2]
    r = np.unique(packed, return_counts=True, return_inverse=return_inverse)
    u = r[0]
    uk = np.empty((len(u), 3), dtype=np.int64)
    uk[:, 2] = u % sz
    q = u // sz
    uk[:, 1] = q % sy
    uk[:, 0] = q // sy
    uk += lo
    if return_inverse:
        return uk, r[2], r[1]
    return uk, r[1]


def key_to_center(k: VoxelKey, cfg: MapConfig) -> Tuple[float, float, float]:
    o = cfg.origin
    r = cfg.res
    return (o[0] + (k[0] + 0.5) * r, o[1] + (k[1] + 0.5) * r, o[2] + (k[2] + 0.5) * r)


def state_of(l: float, cfg: MapConfig) -> OccState:
    if l >= cfg.l_occ_th:
        return OccState.OCC
    if l <= cfg.l_free_th:
        return OccState.FREE
    return OccState.UNKNOWN
