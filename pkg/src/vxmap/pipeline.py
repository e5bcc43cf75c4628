"""One full update cycle: input, occupancy check, inflation, retention."""

from __future__ import annotations

import gc
import time
from typing import Iterable, Optional

from .core import MapConfig, OccState
from .inflate import apply_inflation
from .integrate import SensorFrame, UpdateStats, ingest_frame, ingest_shared_frame
from .occupancy import apply_occupancy_check
from .retain import apply_pending_params, apply_retention, update_params
from .share import ShareFrame, collect_export_frame
from .store import MapState


class VoxelMapper:
    """Owns a :class:`MapState` and runs update cycles on it.

    Not thread-safe: one caller drives ``update``; read-only queries are safe
    between cycles.
    """

    def __init__(self, cfg: Optional[MapConfig] = None, sender_id: int = 0):
        self.state = MapState(cfg)
        self.sender_id = sender_id
        self.seq = 0

    @property
    def cfg(self) -> MapConfig:
        return self.state.cfg

    def update(self, frame: Optional[SensorFrame] = None,
               shared: Iterable[ShareFrame] = ()) -> UpdateStats:
        # the map holds up to millions of small objects; a full collection in
        # the middle of a cycle costs more than the cycle itself
        paused = gc.isenabled()
        gc.disable()
        try:
            return self._update(frame, shared)
        finally:
            if paused:
                gc.enable()

    def _update(self, frame, shared) -> UpdateStats:
        st = self.state
        clock = time.perf_counter
        t0 = clock()
        apply_pending_params(st)
        st.cycle += 1
        st.newly_occ = []
        st.received = set()
        stats = UpdateStats()
        if frame is not None:
            ingest_frame(st, frame, stats)
        for share in shared:
            ingest_shared_frame(st, share, stats)
        t1 = clock()
        touched = {**st.b_new, **st.b_keep, **st.missed}
        stats.n_state_changes = apply_occupancy_check(st, touched.values())
        t2 = clock()
        stats.n_reinflated = apply_inflation(st, st.pos_self)
        t3 = clock()
        stats.n_evicted = apply_retention(st)
        t4 = clock()
        stats.t_input = (t1 - t0) * 1e3
        stats.t_occupancy = (t2 - t1) * 1e3
        stats.t_inflation = (t3 - t2) * 1e3
        stats.t_retention = (t4 - t3) * 1e3
        stats.t_total = (t4 - t0) * 1e3
        return stats

    def export_frame(self, stamp_us: int = 0) -> ShareFrame:
        """Newly occupied keys of the last cycle as the next share frame."""
        self.seq += 1
        return collect_export_frame(self.state, self.sender_id, self.seq, stamp_us)

    def update_params(self, **changes) -> MapConfig:
        return update_params(self.state, **changes)

    def n_occ(self) -> int:
        return self.state.n_occ()

    def n_inflated(self) -> int:
        return self.state.n_inflated

    def occupied_keys(self) -> set:
        return {k for k, r in self.state.occ_map.items() if r.state is OccState.OCC}
