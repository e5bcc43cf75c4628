import numpy as np
import pytest

from vxmap import MapConfig, SensorFrame, ShareFrame, VoxelMapper
from vxmap.io import FrameLogError, export_ply, read_frame_log, sniff_log, write_frame_log
from vxmap.share import write_share_log


def _frames(n=3):
    rng = np.random.default_rng(0)
    return [SensorFrame(0.1 * i, tuple(rng.normal(size=3)), rng.normal(size=(10 + i, 3)).astype(np.float32))
            for i in range(n)]


def test_round_trip(tmp_path):
    p = tmp_path / "f.vxlog"
    frames = _frames()
    assert write_frame_log(p, frames) == 3
    back = list(read_frame_log(p))
    assert len(back) == 3
    for a, b in zip(frames, back):
        assert a.stamp == b.stamp and a.origin == b.origin
        assert np.array_equal(a.points, b.points)
    assert sniff_log(p) == "points"


def test_empty_log(tmp_path):
    p = tmp_path / "e.vxlog"
    write_frame_log(p, [])
    assert list(read_frame_log(p)) == []


def test_truncated_log_names_frame(tmp_path):
    p = tmp_path / "t.vxlog"
    write_frame_log(p, _frames())
    p.write_bytes(p.read_bytes()[:-5])
    with pytest.raises(FrameLogError) as e:
        list(read_frame_log(p))
    assert e.value.frame_index == 2 and "frame 2" in str(e.value)


def test_sniff(tmp_path):
    p = tmp_path / "s.vxm"
    write_share_log(p, [ShareFrame(1, 1, 0, 0.1)])
    assert sniff_log(p) == "share"
    q = tmp_path / "x"
    q.write_bytes(b"nothing here")
    with pytest.raises(ValueError):
        sniff_log(q)


def _read_ply(path):
    lines = path.read_text().splitlines()
    n = int(next(l for l in lines if l.startswith("element vertex")).split()[-1])
    body = lines[lines.index("end_header") + 1:]
    return n, body


def test_ply_empty_and_single(tmp_path):
    m = VoxelMapper(MapConfig())
    p = tmp_path / "a.ply"
    assert export_ply(m.state, p) == 0
    assert _read_ply(p) == (0, [])
    m.update(None, [ShareFrame(1, 1, 0, 0.1, [(0, 0, 0)])])
    assert export_ply(m.state, p) == 1
    n, body = _read_ply(p)
    assert n == 1 and [float(v) for v in body[0].split()] == [0.05, 0.05, 0.05]
    assert export_ply(m.state, p, "inflated") == 33 == m.n_inflated()
    with pytest.raises(ValueError):
        export_ply(m.state, p, "bogus")
