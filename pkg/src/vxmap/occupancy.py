"""Log-odds update of the records touched in one cycle."""

from __future__ import annotations

from typing import Iterable

from .core import OccState


def apply_occupancy_check(state, touched: Iterable) -> int:
    """Fold this cycle's hit/miss counts into each touched record.

    ``l <- clamp(l + (n_hit * l_hit + n_miss * l_miss), l_min, l_max)``, then the
    state is re-derived. Records crossing into or out of ``Occ`` get their
    ``occ_changed`` flag and are queued for inflation; records entering ``Occ``
    are appended to ``newly_occ``; ``Free`` records are scheduled in ``b_del``.
    Returns the number of records whose state changed.
    """
    cfg = state.cfg
    l_hit, l_miss = cfg.l_hit, cfg.l_miss
    l_min, l_max = cfg.l_min, cfg.l_max
    occ_th, free_th = cfg.l_occ_th, cfg.l_free_th
    OCC, FREE, UNKNOWN = OccState.OCC, OccState.FREE, OccState.UNKNOWN
    changes = 0
    for rec in touched:
        l = rec.l + (rec.n_hit * l_hit + rec.n_miss * l_miss)
        l = min(max(l, l_min), l_max)
        rec.l = l
        rec.n_hit = 0
        rec.n_miss = 0
        new = OCC if l >= occ_th else (FREE if l <= free_th else UNKNOWN)
        prev = rec.state
        if new is not prev:
            changes += 1
            rec.state = new
            if (prev is OCC) != (new is OCC):
                rec.occ_changed = True
                state.inflate_pending[rec.key] = rec
                if new is OCC:
                    state.newly_occ.append(rec.key)
        if new is FREE:
            state.b_del[rec.key] = rec
    return changes
