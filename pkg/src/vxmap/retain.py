"""History-buffer maintenance, freed-voxel purge and size-limited eviction,
plus live parameter changes."""

from __future__ import annotations

from .core import MapConfig, OccState
from .inflate import build_neighborhood, release_inflation

# parameters fixed for the lifetime of a map: changing them invalidates keys
IMMUTABLE = ("res", "origin")


def apply_retention(state) -> int:
    """Update recency order, purge ``b_del`` and evict beyond ``n_lim``.

    New occupied records are appended to the back of the history buffer;
    re-observed records are moved to the back if still occupied. Freed records
    are removed before the size limit is enforced, so they never use up
    eviction budget. Evicted keys are left in ``state.evicted``. Returns the
    eviction count.
    """
    his = state.b_his
    OCC, FREE = OccState.OCC, OccState.FREE
    b_del = state.b_del
    for key, rec in state.b_new.items():
        if rec.state is OCC:
            if rec.hist_slot is None:
                rec.hist_slot = his.append(rec)
        elif rec.state is FREE:
            b_del[key] = rec
    for key, rec in state.b_keep.items():
        if rec.hist_slot is not None:
            his.erase(rec.hist_slot)
            rec.hist_slot = None
        if rec.state is OCC:
            rec.hist_slot = his.append(rec)
        elif rec.state is FREE:
            b_del[key] = rec
    for rec in b_del.values():
        if rec.in_occ:
            state.remove_from_map(rec)
    evicted = []
    n_lim = state.cfg.n_lim
    while len(his) > n_lim:
        rec = his.front()
        evicted.append(rec.key)
        state.remove_from_map(rec)
    state.b_new.clear()
    state.b_keep.clear()
    b_del.clear()
    state.missed.clear()
    state.evicted = evicted
    return len(evicted)


def update_params(state, **changes) -> MapConfig:
    """Stage parameter changes; they take effect at the start of the next cycle.

    Any field except ``res`` and ``origin`` may change. The merged
    configuration is validated now and returned.
    """
    bad = [k for k in changes if k in IMMUTABLE]
    if bad:
        raise ValueError(f"cannot change {', '.join(bad)} on a live map")
    unknown = [k for k in changes if k not in MapConfig.field_names()]
    if unknown:
        raise ValueError(f"unknown parameter(s): {', '.join(unknown)}")
    merged = {**state.pending_params, **changes}
    cfg = state.cfg.with_changes(**merged)
    state.pending_params = merged
    return cfg


def apply_pending_params(state) -> bool:
    """Install staged parameters. Returns True if anything changed."""
    if not state.pending_params:
        return False
    old = state.cfg
    state.cfg = old.with_changes(**state.pending_params)
    state.pending_params = {}
    if state.cfg.r_obs != old.r_obs:
        state.offsets = build_neighborhood(state.cfg.res, state.cfg.r_obs)
        # drop every table, then re-arm all occupied records for inflation
        for rec in list(state.occ_map.values()):
            if rec.t_inf:
                release_inflation(state, rec)
        for key, rec in state.occ_map.items():
            if rec.state is OccState.OCC:
                rec.occ_changed = True
                state.inflate_pending[key] = rec
    return True
