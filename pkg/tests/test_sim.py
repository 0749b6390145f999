"""
Tests for the finger and rod surrogates and the sim2sim scenario
"""
import numpy as np
import pytest

from pysysid.CalibError import DivergedSimulationError
from pysysid.Control import ControlChannel, ControlProfile, control_bounds, holdout_suite, training_profile
from pysysid.ParameterSpace import ParameterBounds, ParameterVector
from pysysid.Platforms import Platforms
from pysysid.Trajectory import arc_length
from pysysid.sim import (CAMERAS, FingerModel, RodModel, ScenarioSource, ground_truth_scenario, physical_params, run_finger, run_rod,
                         simulate)


def finger_control(a0, a1):
    return ControlProfile([ControlChannel(a0, 0.3, 0.0), ControlChannel(a1, 0.35, 0.0)], "finger")

def tentacle_control(amplitude, frequency=0.15):
    return ControlProfile([ControlChannel(amplitude, frequency, 0.0)], "tentacle")

def peak_to_peak(traj):
    tip = traj.points[:, -1, :]
    return float(np.max(np.ptp(tip, axis=0)))


class TestCamera:
    def test_pixel_projection(self):
        cam = CAMERAS[Platforms.FINGER]
        assert list(cam.project([0.0, 0.0])) == [760.0, 540.0]
        assert list(cam.project([0.01, 0.01])) == pytest.approx([800.0, 500.0])

    def test_mm_space(self):
        assert list(CAMERAS[Platforms.FINGER].project([0.01, -0.02], "mm")) == pytest.approx([10.0, -20.0])


class TestFinger:
    def test_zero_amplitude_stationary(self):
        traj = run_finger(FingerModel(), finger_control(0.0, 0.0), duration=2.0, fps=30, settle=0.5)
        assert traj.n_points == 1
        assert np.max(np.abs(np.diff(traj.points, axis=0))) < 1e-6

    def test_frame_count(self):
        traj = run_finger(FingerModel(), finger_control(10.0, 10.0), duration=2.0, fps=30, settle=0.0)
        assert traj.n_frames == 60
        assert traj.fps == 30

    def test_damping_reduces_oscillation(self):
        control = finger_control(30.0, 30.0)
        loose = run_finger(FingerModel(frictionloss=0.0, damping=10.0), control, duration=4.0, fps=30, settle=0.5)
        stiff = run_finger(FingerModel(frictionloss=0.0, damping=200.0), control, duration=4.0, fps=30, settle=0.5)
        assert peak_to_peak(stiff) < peak_to_peak(loose)

    def test_deterministic(self):
        model = FingerModel(70.0, 55.0, 2.0, 8.0)
        a = run_finger(model, finger_control(20.0, 15.0), duration=1.0, fps=30, settle=0.2)
        b = run_finger(model, finger_control(20.0, 15.0), duration=1.0, fps=30, settle=0.2)
        assert np.array_equal(a.points, b.points)

    def test_divergence_reports_step(self):
        model = FingerModel(frictionloss=0.0, damping=-260.0, armature=0.1, density=1.0)
        with pytest.raises(DivergedSimulationError) as info:
            run_finger(model, finger_control(20.0, 20.0), duration=2.0, fps=30, settle=0.0)
        assert info.value.step >= 1
        assert info.value.time == pytest.approx(info.value.step * FingerModel.DT)

    def test_positive_inertia(self, finger_physics):
        lowest = ParameterVector(finger_physics, finger_physics.lower)
        assert np.all(FingerModel.from_params(lowest).inertia > 0)


class TestRod:
    def test_rest_shape_holds(self):
        model = RodModel()
        run = model.integrate(lambda t: np.zeros_like(t), duration=1.0, fps=25, settle=0.0)
        rest = model.rest_state()
        assert np.max(np.abs(run.positions[:, 1:, :] - rest)) < 1e-6
        assert np.all(run.positions[:, :, 0] == pytest.approx(0.0, abs=1e-9))

    def test_centerline_ordered_base_to_tip(self):
        traj = run_rod(RodModel(), tentacle_control(0.9, 0.5), duration=1.0, fps=25, settle=0.0)
        assert traj.n_points == 10
        for frame in traj.points:
            seg = np.linalg.norm(np.diff(frame, axis=0), axis=1)
            assert np.all(seg > 0)
        assert arc_length(traj.points[0]) > 0

    def test_drag_reduces_excursion(self):
        control = tentacle_control(0.9, 0.5)
        dry = run_rod(RodModel(), control, duration=2.0, fps=25, settle=0.0, environment=False, setting=Platforms.TENTACLE_AIR)
        wet = run_rod(RodModel(fluid_density=1000.0, perp_drag=50.0, tang_drag=1.0), control, duration=2.0, fps=25, settle=0.0,
                      environment=True, setting=Platforms.TENTACLE_AIR)
        dry_x = np.max(np.abs(dry.points[:, -1, 0] - dry.points[0, -1, 0]))
        wet_x = np.max(np.abs(wet.points[:, -1, 0] - wet.points[0, -1, 0]))
        assert wet_x < dry_x

    def test_energy_dissipates_after_impulse(self):
        model = RodModel(damping_const=3.0)
        angles = lambda t: np.where(t < 1.0, 0.5 * np.sin(2 * np.pi * t), 0.0)
        run = model.integrate(angles, duration=3.0, fps=25, settle=0.0, record_energy=True)
        after = run.energy[run.times >= 1.0]
        slack = 1e-8 * np.max(np.abs(run.energy))
        assert np.all(np.diff(after) <= slack)
        assert after[-1] < after[0]

    def test_damping_is_a_rate(self):
        # stiffness and node mass scaled together leave accelerations unchanged only when damping scales with mass
        angles = lambda t: 0.5 * np.sin(2 * np.pi * 0.5 * t)
        light = RodModel(youngs_modulus=2e5, rod_density=1000.0, damping_const=3.0)
        heavy = RodModel(youngs_modulus=8e5, rod_density=4000.0, damping_const=3.0)
        a = light.integrate(angles, duration=2.0, fps=25, settle=0.0)
        b = heavy.integrate(angles, duration=2.0, fps=25, settle=0.0)
        assert np.allclose(a.positions, b.positions, rtol=1e-6, atol=1e-9)

    def test_negative_damping_diverges(self):
        model = RodModel(damping_const=-900.0)
        with pytest.raises(DivergedSimulationError) as info:
            run_rod(model, holdout_suite("tentacle")[0], duration=2.0, fps=25, settle=0.0, setting=Platforms.TENTACLE_AIR)
        assert info.value.step is not None

    def test_deterministic(self):
        model = RodModel(youngs_modulus=1e6, rod_density=2000.0)
        a = run_rod(model, tentacle_control(0.6), duration=1.0, fps=25, settle=0.0)
        b = run_rod(model, tentacle_control(0.6), duration=1.0, fps=25, settle=0.0)
        assert np.array_equal(a.points, b.points)


class TestSensitivity:
    """Every tuned parameter changes the simulated trajectory."""

    @pytest.mark.parametrize("setting", [Platforms.FINGER, Platforms.TENTACLE_AIR, Platforms.TENTACLE_WATER])
    def test_each_tunable_observable(self, setting):
        bounds = ParameterBounds.load(Platforms.bounds_path(setting), setting)
        tuned = bounds.select(Platforms.TUNED_KINDS[setting])
        cb = control_bounds(setting, bounds)
        control = training_profile(cb, [bounds[n].nominal for n in cb.names])
        base = tuned.nominal()
        reference = simulate(setting, physical_params(bounds, base), control, duration=1.5, settle=0.2)
        for name in tuned.names:
            value = base[name] * 1.1 if base[name] else tuned[name].max * 0.1
            if value > tuned[name].max:
                value = base[name] * 0.9
            bumped = base.replace(**{name: value})
            traj = simulate(setting, physical_params(bounds, bumped), control, duration=1.5, settle=0.2)
            assert np.any(traj.points != reference.points), name


class TestScenario:
    def test_same_seed_same_observations(self):
        a = ground_truth_scenario(Platforms.FINGER, 3, duration=1.0, settle=0.2)
        b = ground_truth_scenario(Platforms.FINGER, 3, duration=1.0, settle=0.2)
        assert np.array_equal(a.gt.array, b.gt.array)
        assert list(a.observations) == ["training", "H1", "H2", "H3", "H4"]
        for key in a.observations:
            assert a.observations[key] == b.observations[key]

    def test_gt_in_bounds_and_self_consistent(self, finger_bounds):
        scenario = ground_truth_scenario(Platforms.FINGER, 5, finger_bounds, duration=1.0, settle=0.2)
        assert scenario.gt.in_bounds()
        sim = simulate(Platforms.FINGER, physical_params(finger_bounds, scenario.gt),
                       scenario.source.resolve(holdout_suite("finger")[0]), duration=1.0, settle=0.2)
        assert sim == scenario.observations["H1"]

    def test_table_ground_truth_in_bounds(self, finger_physics):
        gt = ParameterVector(finger_physics, [90.4, 114.3, 3.60, 11.4])
        assert gt.in_bounds()

    def test_water_keeps_body_fixed(self, water_bounds):
        scenario = ground_truth_scenario(Platforms.TENTACLE_WATER, 1, water_bounds, duration=0.5, settle=0.0)
        assert scenario.gt.bounds.names == ["fluid_density", "perp_drag", "tang_drag"]
        assert scenario.source.gt_params["youngs_modulus"] == 2e5
        assert scenario.observations["training"].n_points == 10

    def test_noise_differs_between_repeats(self, air_bounds):
        source = ScenarioSource(Platforms.TENTACLE_AIR, physical_params(air_bounds), duration=0.5, settle=0.0, noise=1.0, seed=2)
        h = holdout_suite("tentacle")[1]
        r0, r1 = source.observe(h, 0), source.observe(h, 1)
        assert not np.array_equal(r0.points, r1.points)
        assert source.observe(h, 0) == r0
