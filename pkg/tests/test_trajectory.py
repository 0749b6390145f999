"""
Tests for trajectory storage, resampling and polyline helpers
"""
import json

import numpy as np
import pytest

from pysysid.CalibError import MetricMismatchError
from pysysid.Trajectory import Trajectory, arc_length, resample_polyline, sidecar_path


@pytest.fixture
def wave():
    t = np.arange(50) / 25.0
    points = np.stack([np.stack([np.full_like(t, i * 10.0), 100 + 5 * np.sin(2 * np.pi * t) * i], axis=1) for i in range(3)], axis=1)
    return Trajectory(points, 25, "px", {"source": "test"})


class TestTrajectory:
    def test_shape_checks(self):
        with pytest.raises(ValueError):
            Trajectory(np.zeros((4, 2)), 25)
        with pytest.raises(ValueError):
            Trajectory(np.zeros((4, 1, 2)), 0)
        with pytest.raises(ValueError):
            Trajectory(np.zeros((4, 1, 2)), 25, "inch")

    def test_properties(self, wave):
        assert wave.n_frames == 50
        assert wave.n_points == 3
        assert wave.duration == pytest.approx(2.0)
        assert wave.times[25] == pytest.approx(1.0)

    def test_csv_layout(self, wave, tmp_path):
        path = str(tmp_path / "traj.csv")
        sidecar = wave.save(path)
        assert sidecar == sidecar_path(path) == str(tmp_path / "traj.json")
        lines = open(path).read().splitlines()
        assert lines[0] == "frame,point,x,y"
        assert len(lines) == 1 + 50 * 3
        meta = json.load(open(sidecar))
        assert meta["fps"] == 25 and meta["space"] == "px" and meta["metadata"] == {"source": "test"}
        assert Trajectory.load(path) == wave

    def test_load_without_sidecar_needs_fps(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("frame,point,x,y\n0,0,1.0,2.0\n1,0,1.5,2.5\n")
        with pytest.raises(ValueError):
            Trajectory.load(str(path))
        assert Trajectory.load(str(path), fps=30).n_frames == 2

    def test_ragged_file(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("frame,point,x,y\n0,0,1,1\n0,1,2,2\n1,0,1,1\n")
        with pytest.raises(MetricMismatchError):
            Trajectory.load(str(path), fps=25)

    def test_resample(self, wave):
        up = wave.resample(50)
        assert up.n_frames == 100
        assert up.points[2] == pytest.approx(wave.points[1])
        assert wave.resample(25) is wave

    def test_crop(self, wave):
        assert wave.crop(10, 20).n_frames == 10
        assert np.array_equal(wave.crop(10).points[0], wave.points[10])


class TestPolyline:
    def test_even_spacing(self):
        line = np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 6.0]])
        out = resample_polyline(line, 10)
        assert out.shape == (10, 2)
        assert np.allclose(np.linalg.norm(np.diff(out, axis=0), axis=1), 1.0)
        assert np.allclose(out[0], line[0]) and np.allclose(out[-1], line[-1])

    def test_arc_length(self):
        assert arc_length([[0, 0], [3, 4], [3, 10]]) == pytest.approx(11.0)
