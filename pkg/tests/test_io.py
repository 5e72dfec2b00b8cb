import numpy as np
import pytest

from gbbm import io
from gbbm.grid import GridSpec


def test_snapshot_round_trip(tmp_path, rng):
    g = GridSpec(4.0, 2.0, 8, 10)
    v, u = rng.standard_normal((2,) + g.shape)
    path = tmp_path / "s.bin"
    io.write_snapshot(path, g, 0.25, 0.5, "bbm", v, u)
    data = path.read_bytes()
    assert data[:5] == b"GBBM1"
    assert len(data) == io.HEADER_SIZE + 2 * 8 * 9 * 8
    snap = io.read_snapshot(path)
    assert (snap.N1, snap.N2, snap.L1, snap.L2, snap.t, snap.nu1, snap.flux_name) == (8, 10, 4.0, 2.0, 0.25, 0.5, "bbm")
    np.testing.assert_array_equal(snap.v, v)
    np.testing.assert_array_equal(snap.u, u)
    assert not any(p.name.endswith(".tmp") for p in tmp_path.iterdir())


def test_snapshot_rejects_corrupt(tmp_path):
    g = GridSpec(4.0, 2.0, 8, 8)
    path = tmp_path / "s.bin"
    io.write_snapshot(path, g, 0.0, 0.0, "zero", g.zeros(), g.zeros())
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        io.read_snapshot(path)
    path.write_bytes(b"XXXX" + bytes(200))
    with pytest.raises(ValueError):
        io.read_snapshot(path)


def test_csv_exact_round_trip(tmp_path, rng):
    x = rng.standard_normal((5, 3)) * 10.0 ** rng.integers(-300, 300, (5, 3))
    io.write_csv(tmp_path / "a.csv", ["a", "b", "c"], x)
    cols, back = io.read_csv(tmp_path / "a.csv")
    assert cols == ["a", "b", "c"]
    np.testing.assert_array_equal(back, x)
