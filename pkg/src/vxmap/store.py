"""Voxel records, the two hash containers, task buffers and history buffer.

Every key has exactly one :class:`VoxelRecord`; the occupancy map, inflation
map, task buffers, history buffer and other records' inflation tables all hold
references to that same object.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .core import MapConfig, OccState, VoxelKey
from .inflate import build_neighborhood, release_inflation
from .keyindex import KeyIndex
from .records import HistoryBuffer, VoxelRecord

OCC = "occ"
INF = "inf"


class MapState:
    """All mutable map state. Single writer; see :mod:`vxmap.pipeline`."""

    def __init__(self, cfg: Optional[MapConfig] = None):
        self.cfg = cfg if cfg is not None else MapConfig()
        self.offsets = build_neighborhood(self.cfg.res, self.cfg.r_obs)
        self.occ_map: dict[VoxelKey, VoxelRecord] = {}
        self.inf_map: dict[VoxelKey, VoxelRecord] = {}
        self.b_new: dict[VoxelKey, VoxelRecord] = {}
        self.b_keep: dict[VoxelKey, VoxelRecord] = {}
        self.b_del: dict[VoxelKey, VoxelRecord] = {}
        self.missed: dict[VoxelKey, VoxelRecord] = {}
        self.b_his = HistoryBuffer()
        self.occ_index = KeyIndex()
        # records whose occ_changed flag awaits an inflation pass
        self.inflate_pending: dict[VoxelKey, VoxelRecord] = {}
        self.newly_occ: list[VoxelKey] = []
        self.received: set[VoxelKey] = set()
        self.evicted: list[VoxelKey] = []
        self.pending_params: dict = {}
        self.cycle = 0
        self.n_inflated = 0
        self.pos_self = (0.0, 0.0, 0.0)
        self.last_stamp: Optional[float] = None
        self.prev_stamp: Optional[float] = None

    # -- records -----------------------------------------------------------

    def make_voxel(self, key: VoxelKey) -> VoxelRecord:
        assert key not in self.occ_map and key not in self.inf_map, f"duplicate voxel {key}"
        return VoxelRecord(key, self.cycle)

    def find_voxel(self, container: str, key: VoxelKey) -> Optional[VoxelRecord]:
        return self._container(container).get(key)

    def _container(self, name: str) -> dict:
        if name == OCC:
            return self.occ_map
        if name == INF:
            return self.inf_map
        return {"b_new": self.b_new, "b_keep": self.b_keep, "b_del": self.b_del}[name]

    def insert_handle(self, container: str, rec: VoxelRecord) -> None:
        if container == OCC:
            if not rec.in_occ:
                self.occ_map[rec.key] = rec
                self.occ_index.add(rec.key)
                rec.in_occ = True
        elif container == INF:
            if not rec.in_inf:
                self.inf_map[rec.key] = rec
                rec.in_inf = True
        else:
            self._container(container)[rec.key] = rec

    def remove_handle(self, container: str, rec: VoxelRecord) -> None:
        if container == OCC:
            if rec.in_occ:
                del self.occ_map[rec.key]
                self.occ_index.discard(rec.key)
                rec.in_occ = False
        elif container == INF:
            if rec.in_inf:
                del self.inf_map[rec.key]
                rec.in_inf = False
        else:
            self._container(container).pop(rec.key, None)

    def remove_from_map(self, rec: VoxelRecord) -> None:
        """Take a record out of the occupancy map.

        Any inflation it applies is released first. If other occupied voxels
        still inflate it, it stays in the inflation map as an inflated-only
        record with no occupancy evidence; otherwise it is destroyed.
        """
        if rec.t_inf:
            release_inflation(self, rec)
        if rec.hist_slot is not None:
            self.b_his.erase(rec.hist_slot)
            rec.hist_slot = None
        self.remove_handle(OCC, rec)
        self.inflate_pending.pop(rec.key, None)
        rec.l = 0.0
        rec.n_hit = rec.n_miss = 0
        rec.state = OccState.UNKNOWN
        rec.occ_changed = False
        if rec.n_i == 0:
            self.remove_handle(INF, rec)

    # -- queries -----------------------------------------------------------

    def n_occ(self) -> int:
        return sum(1 for r in self.occ_map.values() if r.state == OccState.OCC)

    def records(self) -> Iterator[VoxelRecord]:
        """Every live record once (the inflation map holds a superset of keys)."""
        yield from self.inf_map.values()
        for k, r in self.occ_map.items():
            if not r.in_inf:
                yield r

    def audit(self) -> list[str]:
        """Walk all containers and report broken invariants (empty when sound)."""
        problems: list[str] = []
        seen: dict[VoxelKey, VoxelRecord] = {}

        def same(rec, where):
            prior = seen.setdefault(rec.key, rec)
            if prior is not rec:
                problems.append(f"two records for key {rec.key} ({where})")

        for k, r in self.occ_map.items():
            if k != r.key or not r.in_occ:
                problems.append(f"occ_map entry {k} inconsistent")
            if k not in self.inf_map:
                problems.append(f"occ key {k} missing from inf_map")
            same(r, "occ_map")
            if not self.cfg.l_min <= r.l <= self.cfg.l_max:
                problems.append(f"{k} log-odds {r.l} outside clamp bounds")
        for k, r in self.inf_map.items():
            if k != r.key or not r.in_inf:
                problems.append(f"inf_map entry {k} inconsistent")
            same(r, "inf_map")
            if r.n_i < 0:
                problems.append(f"{k} negative inflation count")
            if not r.in_occ and r.n_i == 0:
                problems.append(f"inflated-only {k} has zero count")
        n_his = 0
        for r in self.b_his:
            n_his += 1
            same(r, "b_his")
            if not r.in_occ:
                problems.append(f"b_his holds {r.key} which is not in occ_map")
            if r.hist_slot is None:
                problems.append(f"b_his member {r.key} without slot")
        if n_his != len(self.b_his):
            problems.append("b_his length mismatch")
        refs: dict[VoxelKey, int] = {}
        for r in list(self.inf_map.values()) + list(self.occ_map.values()):
            if r.hist_slot is not None and r.hist_slot.rec is not r:
                problems.append(f"{r.key} slot points elsewhere")
        for r in self.records():
            for t in r.t_inf:
                if self.inf_map.get(t.key) is not t:
                    problems.append(f"{r.key} inflates dangling {t.key}")
                refs[t.key] = refs.get(t.key, 0) + 1
        for r in self.records():
            if r.n_i != refs.get(r.key, 0):
                problems.append(f"{r.key} n_i={r.n_i} but {refs.get(r.key, 0)} inflaters")
        n_inflated = sum(1 for r in self.inf_map.values() if r.n_i > 0)
        if n_inflated != self.n_inflated:
            problems.append(f"n_inflated counter {self.n_inflated} != {n_inflated}")
        if set(self.occ_map) != _index_keys(self.occ_index):
            problems.append("occ key index out of sync")
        return problems


def _index_keys(index: KeyIndex) -> set:
    from .keyindex import LIVE

    index.flush()
    live = index.used == LIVE
    return {tuple(int(v) for v in k) for k in index.keys[live]}

