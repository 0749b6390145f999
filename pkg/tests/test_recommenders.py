"""
Tests for the black-box recommenders, the GP surrogate and run histories
"""
import json
import math

import numpy as np
import pytest
from scipy.stats import kstest

from pysysid.CalibError import ConfigError, LayoutError, NoValidIterationError
from pysysid.Control import ControlBounds, training_profile
from pysysid.ParameterSpace import ParameterVector
from pysysid.recommenders import (BayesOpt, CMAES, Evaluation, GaussianProcess, GoldenCD, IterationRecord, NelderMead,
                                  RandomSearch, RunHistory, ScriptedRecommender, expected_improvement, finite_error,
                                  golden_section, golden_steps, make_recommender, make_request, population_size, reflect,
                                  select_best_iteration)


@pytest.fixture
def cbounds():
    return ControlBounds("tentacle", ["amp_rad"], [0.2], [1.0], [0.15])

def sphere(center):
    center = np.asarray(center, dtype=float)
    return lambda x: float(np.sum((np.asarray(x) - center) ** 2))

def drive(recommender, f, theta0, cbounds, evaluations):
    """
    Run a recommender against `f` the way the calibration loop does, until `evaluations` points were scored

    Returns:
        (tuple): best unit point, best value, number of evaluations made
    """
    control = training_profile(cbounds, [0.5])
    bounds = recommender.bounds
    x0 = ParameterVector(bounds, theta0)
    pending = [Evaluation(x0, control, f(x0.array))]
    best = (x0.array, pending[0].error)
    used = 1
    iteration = 1
    while used < evaluations:
        req = make_request(iteration, x0, control, best[1], bounds, cbounds, evaluations=pending)
        pending = []
        for response in recommender.propose(req):
            if used >= evaluations:
                break
            value = f(response.params.array)
            pending.append(Evaluation(response.params, response.control, value))
            used += 1
            if value < best[1]:
                best = (response.params.array, value)
        iteration += 1
    return best[0], best[1], used


class TestHelpers:
    def test_reflect(self):
        assert reflect([1.2, -0.3, 2.5, 0.4]) == pytest.approx([0.8, 0.3, 0.5, 0.4])

    def test_finite_error(self):
        assert finite_error(None) == math.inf
        assert finite_error(float("nan")) == math.inf
        assert finite_error(3) == 3.0

    def test_population_size(self):
        assert population_size(4) == 8
        assert population_size(2) == 7
        assert population_size(1) == 6

    def test_registry(self, unit_bounds):
        assert isinstance(make_recommender("golden_cd", unit_bounds, budget=20), GoldenCD)
        assert isinstance(make_recommender("cmaes", unit_bounds), CMAES)
        with pytest.raises(ConfigError) as info:
            make_recommender("vlm", unit_bounds)
        assert info.value.field == "endpoint"
        with pytest.raises(ConfigError):
            make_recommender("annealing", unit_bounds)


class TestRandomSearch:
    def test_within_bounds_and_seeded(self, finger_physics, cbounds):
        def proposals(seed):
            rec = RandomSearch(finger_physics, seed)
            req = make_request(1, finger_physics.nominal(), training_profile(cbounds, [0.5]), 10.0, finger_physics, cbounds)
            return [rec.recommend(req).params.array for _ in range(20)]
        a, b = proposals(4), proposals(4)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)
            assert np.all(x >= finger_physics.lower) and np.all(x <= finger_physics.upper)
        assert not np.array_equal(a[0], proposals(5)[0])

    def test_marginals_uniform(self, finger_physics, cbounds):
        rec = RandomSearch(finger_physics, 11)
        req = make_request(1, finger_physics.nominal(), training_profile(cbounds, [0.5]), 10.0, finger_physics, cbounds)
        draws = np.array([rec.recommend(req).params.array for _ in range(400)])
        unit = (draws - finger_physics.lower) / (finger_physics.upper - finger_physics.lower)
        for j in range(unit.shape[1]):
            assert kstest(unit[:, j], "uniform").pvalue > 1e-3


class TestNelderMead:
    def test_initial_simplex(self, square_bounds):
        simplex = NelderMead(square_bounds).initial_simplex(np.array([0.0, 0.98]))
        assert simplex[1] == pytest.approx([0.00025, 0.98])
        assert simplex[2] == pytest.approx([0.0, 0.93])

    def test_converges_on_quadratic(self, square_bounds, cbounds):
        best, value, used = drive(NelderMead(square_bounds), sphere([0.55, 0.6]), [0.4, 0.4], cbounds, 50)
        assert used == 50
        assert best == pytest.approx([0.55, 0.6], abs=1e-2)

    def test_diverged_points_are_worst(self, square_bounds, cbounds):
        f = sphere([0.3, 0.3])
        diverging = lambda x: math.inf if x[0] > 0.6 else f(x)
        best, value, _ = drive(NelderMead(square_bounds), diverging, [0.5, 0.5], cbounds, 30)
        assert math.isfinite(value)
        assert value < f([0.5, 0.5])


class TestGoldenSection:
    def test_bracket_width(self):
        result = golden_section(lambda x: (x - 2) ** 2, 0.0, 5.0, 12)
        assert result.upper - result.lower == pytest.approx(5 * 0.6180339887 ** 12, rel=1e-6)
        assert result.lower <= 2 <= result.upper
        assert result.x == pytest.approx(2, abs=0.02)

    def test_evaluation_count(self):
        calls = []
        golden_section(lambda x: calls.append(x) or abs(x - 0.3), 0.0, 1.0, 4)
        assert len(calls) == 5

    def test_zero_shrinks_is_midpoint(self):
        steps = golden_steps(0.0, 1.0, 0)
        assert next(steps) == 0.5
        with pytest.raises(StopIteration) as stop:
            steps.send(1.0)
        assert stop.value.value.x == 0.5


class TestGoldenCD:
    def test_allocation(self, unit_bounds, square_bounds):
        assert GoldenCD(unit_bounds, budget=41).allocation() == [10, 10, 10, 10]
        assert GoldenCD(unit_bounds, budget=10).allocation() == [3, 2, 2, 2]
        assert GoldenCD(unit_bounds, budget=3).allocation() == [1, 1, 1, 1]
        assert GoldenCD(square_bounds, budget=10).allocation() == [5, 4]

    def test_finds_separable_minimum(self, square_bounds, cbounds):
        best, _, used = drive(GoldenCD(square_bounds, budget=10), sphere([0.3, 0.7]), [0.9, 0.1], cbounds, 10)
        assert used == 10
        assert best == pytest.approx([0.3, 0.7], abs=0.1)

    def test_first_axis_points(self, square_bounds, cbounds):
        rec = GoldenCD(square_bounds, budget=10)
        control = training_profile(cbounds, [0.5])
        x0 = ParameterVector(square_bounds, [0.9, 0.1])
        first = rec.recommend(make_request(1, x0, control, 1.0, square_bounds, cbounds))
        assert first.params.array == pytest.approx([0.3819660113, 0.1])


class TestGaussianProcess:
    def test_interpolates_training_points(self):
        x = np.linspace(0, 1, 7)[:, None]
        y = np.sin(6 * x[:, 0])
        gp = GaussianProcess().fit(x, y)
        mu, sigma = gp.predict(x)
        assert mu == pytest.approx(y, abs=1e-2)
        _, far = gp.predict(np.array([[3.0]]))
        assert far[0] > 2 * sigma.max()

    def test_expected_improvement(self):
        ei = expected_improvement([1.0, 2.0, 0.5], [0.0, 0.0, 0.3], 1.5)
        assert ei[0] == pytest.approx(0.5)
        assert ei[1] == 0.0
        assert ei[2] >= 1.0 - 1e-12


class TestBayesOpt:
    def test_initial_proposals_random(self, unit_bounds):
        rec = BayesOpt(unit_bounds, seed=1)
        first = [rec.ask() for _ in range(3)]
        expected = np.random.default_rng(1).uniform(0.0, 1.0, (3, 4))
        assert np.array(first) == pytest.approx(expected)

    def test_all_diverged_falls_back_to_random(self, unit_bounds):
        rec = BayesOpt(unit_bounds, seed=0, n_initial=0)
        for _ in range(4):
            rec.tell(np.full(4, 0.5), float("nan"))
        x = rec.ask()
        assert x.shape == (4,)
        assert np.all((x >= 0) & (x <= 1))

    def test_beats_random_search(self, unit_bounds, cbounds):
        f = sphere([0.4, 0.6, 0.5, 0.45])
        bo, rs = [], []
        for seed in range(20):
            theta0 = np.random.default_rng(100 + seed).uniform(0, 1, 4)
            bo.append(drive(BayesOpt(unit_bounds, seed), f, theta0, cbounds, 10)[1])
            rs.append(drive(RandomSearch(unit_bounds, seed), f, theta0, cbounds, 10)[1])
        assert np.median(bo) < np.median(rs)


class TestCMAES:
    def test_generation_size_and_bounds(self, unit_bounds, cbounds):
        rec = CMAES(unit_bounds, seed=0)
        control = training_profile(cbounds, [0.5])
        req = make_request(1, ParameterVector(unit_bounds, [0.95] * 4), control, 1.0, unit_bounds, cbounds)
        responses = rec.propose(req)
        assert len(responses) == 8
        for r in responses:
            assert r.params.in_bounds()
            assert r.control == control

    def test_converges(self, unit_bounds, cbounds):
        center = [0.4, 0.6, 0.5, 0.45]
        hits = 0
        for seed in range(3):
            best, _, _ = drive(CMAES(unit_bounds, seed), sphere(center), [0.2, 0.8, 0.2, 0.8], cbounds, 1 + 20 * 8)
            hits += np.max(np.abs(best - center)) <= 0.1
        assert hits >= 2

    def test_seeded(self, unit_bounds, cbounds):
        f = sphere([0.4, 0.6, 0.5, 0.45])
        a = drive(CMAES(unit_bounds, 7), f, [0.5] * 4, cbounds, 33)
        b = drive(CMAES(unit_bounds, 7), f, [0.5] * 4, cbounds, 33)
        assert np.array_equal(a[0], b[0])


class TestScripted:
    def test_replays_and_repeats_last(self, finger_physics, cbounds, caplog):
        script = [
            {"parameter_recommendations": [{"name": "damping", "suggested_value": 70}], "confidence": 0.8},
            {"parameter_recommendations": [{"name": "damping", "suggested_value": 60}], "confidence": 0.9},
        ]
        rec = ScriptedRecommender(finger_physics, script)
        req = make_request(1, finger_physics.nominal(), training_profile(cbounds, [0.5]), 5.0, finger_physics, cbounds)
        values = [rec.recommend(req).params["damping"] for _ in range(3)]
        assert values == [70, 60, 60]
        assert "exhausted" in caplog.text

    def test_json_file_unclamped(self, finger_physics, cbounds, tmp_path):
        path = tmp_path / "script.json"
        path.write_text(json.dumps([{"parameter_recommendations": [{"name": "damping", "suggested_value": 500}], "confidence": 0.7}]))
        rec = ScriptedRecommender(finger_physics, str(path))
        req = make_request(1, finger_physics.nominal(), training_profile(cbounds, [0.5]), 5.0, finger_physics, cbounds)
        response = rec.recommend(req)
        assert response.params["damping"] == 500.0
        assert response.confidence == 0.7

    def test_empty_script(self, finger_physics):
        with pytest.raises(ValueError):
            ScriptedRecommender(finger_physics, [])


class TestRunHistory:
    @pytest.fixture
    def history(self, square_bounds, cbounds):
        errors = [5.0, math.inf, 3.0, 3.0, 4.0]
        records = []
        for k, e in enumerate(errors, start=1):
            records.append(IterationRecord(k, ParameterVector(square_bounds, [0.1 * k, 0.5]), training_profile(cbounds, [0.5]), e,
                                           None if k == 1 else 0.7, "step {}".format(k), k, None if math.isinf(e) else 3,
                                           ("diverged",) if math.isinf(e) else ()))
        return RunHistory(square_bounds, cbounds, records)

    def test_select_best_iteration(self, history):
        assert select_best_iteration(history) == 3
        assert select_best_iteration([math.inf, 2.0, 1.0, 1.0]) == 3
        with pytest.raises(NoValidIterationError):
            select_best_iteration([math.inf, math.nan])

    def test_best_so_far(self, history):
        assert history.best_so_far() == [5.0, 5.0, 3.0, 3.0, 3.0]

    def test_contiguous_iterations(self, history, square_bounds, cbounds):
        with pytest.raises(LayoutError):
            history.append(IterationRecord(7, ParameterVector(square_bounds, [0, 0]), training_profile(cbounds, [0.5]),
                                           1.0, None, "", 7, None, ()))

    def test_table(self, history):
        text = history.table()
        assert text.splitlines()[0].split("|")[0].strip() == "Iter"
        assert "diverged" in text
        assert len(text.splitlines()) == 6

    def test_csv(self, history, square_bounds, cbounds, tmp_path):
        path = str(tmp_path / "history.csv")
        history.save(path)
        header = open(path).readline().strip().split(",")
        assert header == ["iteration", "evaluations", "error", "best_error", "confidence", "lag_frames", "flags", "a", "b",
                          "amp_rad", "rationale"]
        loaded = RunHistory.load(path, square_bounds, cbounds)
        assert loaded.errors == history.errors
        assert loaded[0].confidence is None
        assert loaded[1].flags == ("diverged",)
        assert loaded[2].params.array == pytest.approx([0.3, 0.5])

    def test_missing_columns(self, square_bounds, cbounds, tmp_path):
        path = tmp_path / "history.csv"
        path.write_text("iteration,error\n1,2.0\n")
        with pytest.raises(LayoutError):
            RunHistory.load(str(path), square_bounds, cbounds)
