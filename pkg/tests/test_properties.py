"""Invariants checked after every cycle on random operation streams."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from vxmap import FrameRing, MapConfig, OccState, SensorFrame, ShareFrame, VoxelMapper
from conftest import brute_inflation_counts

coord = st.floats(-0.6, 0.6, allow_nan=False)
point = st.tuples(coord, coord, coord)
key = st.tuples(*[st.integers(-6, 6)] * 3)

op = st.one_of(
    st.tuples(st.just("scan"), point, st.lists(point, max_size=40)),
    st.tuples(st.just("share"), st.lists(key, max_size=10)),
    st.tuples(st.just("param"), st.sampled_from(["n_lim", "r_obs", "p_init", "d_inf"]),
              st.sampled_from([0, 1, 2, 3])),
    st.tuples(st.just("idle")),
)

PARAM_VALUES = {
    "n_lim": [1, 5, 30, math.inf],
    "r_obs": [0.0, 0.1, 0.2, 0.3],
    "p_init": [0.55, 0.7, 0.8, 0.9],
    "d_inf": [0.3, 0.8, 5.0, math.inf],
}


def check(m):
    st_ = m.state
    assert st_.audit() == []
    assert set(st_.occ_map) <= set(st_.inf_map)
    assert len(st_.b_his) <= st_.cfg.n_lim
    his = [r.key for r in st_.b_his]
    # records lowered by misses alone keep their slot until their next visit
    assert {k for k, r in st_.occ_map.items() if r.state is OccState.OCC} <= set(his) <= set(st_.occ_map)
    assert len(his) == len(set(his))
    for r in st_.occ_map.values():
        assert st_.cfg.l_min <= r.l <= st_.cfg.l_max
        assert r.state is not OccState.FREE
    if math.isinf(st_.cfg.d_inf):
        got = {k: r.n_i for k, r in st_.inf_map.items() if r.n_i}
        assert got == brute_inflation_counts(st_)


@settings(max_examples=120, deadline=None)
@given(st.lists(op, max_size=25))
def test_invariants_hold_on_random_streams(ops):
    m = VoxelMapper(MapConfig(res=0.1))
    t = 0.0
    for o in ops:
        t += 0.1
        if o[0] == "scan":
            m.update(SensorFrame(t, o[1], np.asarray(o[2], float).reshape(-1, 3)))
        elif o[0] == "share":
            m.update(None, [ShareFrame(3, int(t * 10), 0, 0.1, o[1])])
        elif o[0] == "param":
            m.update_params(**{o[1]: PARAM_VALUES[o[1]][o[2]]})
            m.update()
        else:
            m.update()
        check(m)
        m.export_frame()


@settings(max_examples=100, deadline=None)
@given(st.lists(point, min_size=1, max_size=60), st.randoms(use_true_random=False))
def test_point_order_invariance(pts, rnd):
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    out = []
    for p in (pts, shuffled):
        m = VoxelMapper()
        for i in range(3):
            m.update(SensorFrame(float(i), (0.01, 0.02, 0.03), np.asarray(p)))
        out.append({k: (r.l, r.state, r.n_i) for k, r in m.state.inf_map.items()})
    assert out[0] == out[1]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.lists(st.booleans(), max_size=40))
def test_ring_bounds_and_order(cap, acts):
    ring = FrameRing(cap)
    seq = 0
    for push in acts:
        if push:
            seq += 1
            ring.push(ShareFrame(0, seq, 0, 0.1))
        elif len(ring):
            ring.ack(ring.drain()[0].seq)
        held = [f.seq for f in ring.drain()]
        assert len(held) <= cap
        assert held == sorted(set(held))
        if held:
            assert held[-1] == seq
