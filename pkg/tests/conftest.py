import numpy as np
import pytest

from vxmap import MapConfig, MapState, SensorFrame


def brute_inflation_counts(state) -> dict:
    """n_i for every key, recounted from scratch over the occupied records."""
    res, r = state.cfg.res, state.cfg.r_obs
    n = int(r // res) + 1
    counts: dict = {}
    for rec in state.occ_map.values():
        if rec.state.name != "OCC":
            continue
        kx, ky, kz = rec.key
        for dx in range(-n, n + 1):
            for dy in range(-n, n + 1):
                for dz in range(-n, n + 1):
                    if (dx * dx + dy * dy + dz * dz) ** 0.5 * res <= r + 1e-9:
                        k = (kx + dx, ky + dy, kz + dz)
                        counts[k] = counts.get(k, 0) + 1
    return counts


def frame(points, origin=(0.05, 0.05, 0.05), stamp=0.0) -> SensorFrame:
    return SensorFrame(stamp, origin, np.asarray(points, dtype=float).reshape(-1, 3))


@pytest.fixture
def state():
    return MapState(MapConfig())


ACCEPTANCE_LINES: list = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
