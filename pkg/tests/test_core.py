import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from vxmap.core import (
    MapConfig,
    OccState,
    key_to_center,
    logit,
    pos_to_key,
    pos_to_keys,
    prob,
    state_of,
    unique_rows,
)


def mp_logit(p: str) -> float:
    mpmath.mp.dps = 50
    q = mpmath.mpf(p)
    return float(mpmath.log(q / (1 - q)))


@pytest.mark.parametrize("res,origin,p,expected", [
    (0.1, (0, 0, 0), (0.25, -0.13, 1.0), (2, -2, 10)),
    (0.2, (0.1, 0, 0), (0.1, 0.39, -0.01), (0, 1, -1)),
    (0.37, (1.5, -2.0, 3.0), (1.5, -2.0, 3.0), (0, 0, 0)),
])
def test_pos_to_key(res, origin, p, expected):
    cfg = MapConfig(res=res, origin=origin)
    assert pos_to_key(p, cfg) == expected
    assert tuple(pos_to_keys(np.array([p]), cfg)[0]) == expected


@pytest.mark.parametrize("k,center", [((0, 0, 0), (0.05, 0.05, 0.05)), ((2, -2, 10), (0.25, -0.15, 1.05))])
def test_key_to_center(k, center):
    assert key_to_center(k, MapConfig()) == pytest.approx(center, abs=1e-12)


def test_center_round_trip_random_keys():
    rng = np.random.default_rng(5)
    cfg = MapConfig(res=0.1, origin=(0.3, -1.7, 2.2))
    for k in rng.integers(-4500, 4500, size=(1000, 3)):
        k = tuple(int(v) for v in k)
        assert pos_to_key(key_to_center(k, cfg), cfg) == k


def test_keys_reach_int32_magnitudes():
    cfg = MapConfig(res=0.1)
    k = pos_to_key((2.0e8, -2.0e8, 0.0), cfg)
    assert k == (2_000_000_000, -2_000_000_000, 0)


@pytest.mark.parametrize("p", ["0.65", "0.97", "0.12", "0.35", "0.8", "0.3"])
def test_logit_against_high_precision(p):
    assert logit(float(p)) == pytest.approx(mp_logit(p), rel=1e-14, abs=1e-15)


def test_logit_known_values():
    assert logit(0.5) == 0.0
    assert logit(0.65) == pytest.approx(0.6190392084062235, abs=1e-15)
    assert logit(0.97) == pytest.approx(3.4760986898352724, abs=1e-15)
    for bad in (0.0, 1.0, -0.1, 1.5, math.nan):
        with pytest.raises(ValueError):
            logit(bad)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_prob_inverts_logit(p):
    assert prob(logit(p)) == pytest.approx(p, rel=1e-9)


def test_state_thresholds_inclusive():
    cfg = MapConfig()
    assert state_of(cfg.l_occ_th, cfg) is OccState.OCC
    assert state_of(cfg.l_free_th, cfg) is OccState.FREE
    assert state_of((cfg.l_occ_th + cfg.l_free_th) / 2, cfg) is OccState.UNKNOWN
    assert state_of(0.0, cfg) is OccState.UNKNOWN
    assert OccState.FREE < OccState.UNKNOWN < OccState.OCC


def test_defaults():
    cfg = MapConfig()
    assert cfg.res == 0.1 and cfg.r_obs == 0.2 and cfg.ring_capacity == 50
    assert math.isinf(cfg.d_in) and math.isinf(cfg.d_inf) and math.isinf(cfg.n_lim)
    assert cfg.l_free_th < 0 < cfg.l_occ_th


@pytest.mark.parametrize("change", [
    {"res": 0}, {"res": -0.1}, {"res": math.inf}, {"r_obs": -1}, {"n_lim": 0}, {"n_lim": 2.5},
    {"ring_capacity": 0}, {"p_init": 1.0}, {"l_hit": -0.1}, {"l_miss": 0.2},
    {"l_free_th": 2.0}, {"l_min": 0.0}, {"d_in": 0}, {"origin": (0, 0, math.nan)},
])
def test_config_validation(change):
    with pytest.raises(ValueError):
        MapConfig(**change)


def test_unique_rows_matches_numpy():
    rng = np.random.default_rng(1)
    for lo, hi in ((-3, 3), (-10**6, 10**6)):
        a = rng.integers(lo, hi, size=(500, 3))
        u, c, inv = unique_rows(a, return_inverse=True)
        u2, inv2, c2 = np.unique(a, axis=0, return_inverse=True, return_counts=True)
        assert np.array_equal(u, u2) and np.array_equal(c, c2)
        assert np.array_equal(inv, inv2.reshape(-1))
    u, c = unique_rows(np.zeros((0, 3), dtype=np.int64))
    assert u.shape == (0, 3) and len(c) == 0
