"""
Tests for lag estimation, transient trimming, error metrics and arc-length normalization
"""
import itertools

import numpy as np
import pytest

from pysysid.Alignment import (AlignedPair, align, arclength_normalize, compare, mae_centerline, mae_tip, normalize_frame,
                               trim_transient)
from pysysid.CalibError import InsufficientOverlapError, MetricMismatchError
from pysysid.Trajectory import Trajectory

FPS = 30


def tip(signal, fps=FPS):
    signal = np.asarray(signal, dtype=float)
    return Trajectory(np.stack([np.full_like(signal, 200.0), signal], axis=1)[:, None, :], fps)

def sinusoid(delay=0.0, seconds=10.0):
    t = np.arange(int(seconds * FPS)) / FPS
    return tip(100 + 20 * np.sin(2 * np.pi * 0.3 * (t - delay)))

def pulse(center, seconds=10.0):
    t = np.arange(int(seconds * FPS)) / FPS
    return tip(100 + 50 * np.exp(-0.5 * ((t - center) / 0.5) ** 2))

def pair_of(sim_points, real_points, fps=FPS):
    sim, real = Trajectory(sim_points, fps), Trajectory(real_points, fps)
    return AlignedPair(sim, real, 0, sim.n_frames, ())


class TestAlign:
    def test_identical(self):
        result = align(sinusoid(), sinusoid())
        assert result.lag_frames == 0
        assert result.overlap == 300
        assert result.flags == ()

    @pytest.mark.parametrize("shift", [-0.9, -0.4, 0.0, 0.4, 0.9])
    def test_recovers_shift(self, shift):
        result = align(sinusoid(), sinusoid(delay=shift), max_lag=1.0)
        assert abs(result.lag_frames - shift * FPS) <= 1
        assert result.sim.n_frames == result.real.n_frames == result.overlap
        assert abs(result.lag_frames) <= FPS

    @pytest.mark.parametrize("shift,edge", [(1.5, 30), (-1.5, -30)])
    def test_shift_beyond_window(self, shift, edge):
        result = align(pulse(4.5), pulse(4.5 + shift), max_lag=1.0)
        assert result.lag_frames == edge
        assert "lag_at_window_edge" in result.flags

    def test_flat_signal(self):
        result = align(tip(np.full(120, 5.0)), tip(np.full(120, 5.0)))
        assert result.lag_frames == 0
        assert "flat_signal" in result.flags

    def test_fps_mismatch(self):
        with pytest.raises(MetricMismatchError):
            align(sinusoid(), tip(np.zeros(300), fps=25))

    def test_point_count_mismatch(self):
        two = Trajectory(np.zeros((300, 2, 2)), FPS)
        with pytest.raises(MetricMismatchError):
            align(sinusoid(), two)

    def test_short_overlap(self):
        with pytest.raises(InsufficientOverlapError):
            align(sinusoid(seconds=1.5), sinusoid(seconds=1.5))


class TestTrimTransient:
    def test_frames_remaining(self):
        pair = align(sinusoid(), sinusoid())
        trimmed = trim_transient(pair, 5.0)
        assert trimmed.overlap == 150
        assert trimmed.sim.n_frames == trimmed.real.n_frames == 150

    def test_zero_skip_identity(self):
        pair = align(sinusoid(), sinusoid())
        assert trim_transient(pair, 0.0) is pair

    def test_too_short(self):
        pair = align(sinusoid(seconds=4.0), sinusoid(seconds=4.0))
        with pytest.raises(InsufficientOverlapError):
            trim_transient(pair, 5.0)


class TestMetrics:
    def test_identical_zero(self):
        pts = np.random.default_rng(0).normal(size=(5, 10, 2))
        assert mae_centerline(pair_of(pts, pts)) == 0.0

    def test_three_four_five(self):
        pts = np.random.default_rng(1).normal(size=(6, 10, 2))
        assert mae_centerline(pair_of(pts, pts + [3.0, 4.0])) == pytest.approx(5.0)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(3, 2, 2)), rng.normal(size=(3, 2, 2))
        total = 0.0
        for t, i in itertools.product(range(3), range(2)):
            total += ((a[t, i, 0] - b[t, i, 0]) ** 2 + (a[t, i, 1] - b[t, i, 1]) ** 2) ** 0.5
        assert mae_centerline(pair_of(a, b)) == pytest.approx(total / 6, abs=1e-9)

    def test_tip_offset(self):
        pts = np.random.default_rng(3).normal(size=(8, 1, 2))
        pair = pair_of(pts, pts + [0.0, 7.0])
        assert mae_tip(pair) == pytest.approx(7.0)
        assert abs(mae_tip(pair) - mae_centerline(pair)) < 1e-12

    def test_tip_needs_one_point(self):
        pts = np.zeros((4, 2, 2))
        with pytest.raises(MetricMismatchError):
            mae_tip(pair_of(pts, pts))


class TestArcLength:
    def test_identity_at_target(self):
        frame = np.array([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]])
        assert normalize_frame(frame, 10.0) == pytest.approx(frame, abs=1e-12)

    def test_halving(self):
        frame = np.array([[1.0, 1.0], [1.0, 5.0], [4.0, 9.0]])
        out = normalize_frame(frame, 4.5)
        assert np.linalg.norm(np.diff(out, axis=0), axis=1) == pytest.approx([2.0, 2.5])

    def test_straight_line_spacing(self):
        line = np.stack([np.linspace(0, 90, 10), np.zeros(10)], axis=1)
        traj = arclength_normalize(Trajectory(line[None], 25), 180.0)
        assert np.diff(traj.points[0, :, 0]) == pytest.approx(np.full(9, 20.0))

    def test_zero_length_frame_interpolated(self):
        line = np.stack([np.linspace(0, 90, 10), np.zeros(10)], axis=1)
        frames = np.stack([line, np.zeros((10, 2)), line])
        traj = arclength_normalize(Trajectory(frames, 25), 90.0)
        assert traj.points[1] == pytest.approx(line)


class TestCompare:
    def test_shifted_offset_tip(self):
        sim = sinusoid()
        real = sinusoid(delay=0.4)
        real = real.with_points(real.points + [0.0, 2.0])
        report = compare(sim, real, "tip", max_lag=1.0, skip=5.0)
        assert report.lag_frames == 12
        assert report.mae == pytest.approx(2.0)
        assert report.to_dict() == {"lag_frames": 12, "mae": pytest.approx(2.0), "T": report.frames, "N": 1, "flags": []}

    def test_centerline_scale_free(self):
        t = np.arange(200) / 25.0
        base = np.stack([np.zeros(10), np.linspace(0, 90, 10)], axis=1)
        frames = np.stack([base + [[5 * np.sin(2 * np.pi * 0.5 * ti) * k / 9, 0] for k in range(10)] for ti in t])
        sim = Trajectory(frames, 25)
        real = Trajectory(frames * 2.0, 25)
        report = compare(sim, real, "centerline", max_lag=0.5, skip=1.0, normalize_arclength=True, signal="mean_x")
        assert report.mae == pytest.approx(0.0, abs=1e-9)
        assert report.points == 10

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            compare(sinusoid(), sinusoid(), "area")
