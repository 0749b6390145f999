"""
Tests for experiment spec files
"""
import pytest

from pysysid.CalibError import ConfigError
from pysysid.Experiment import ExperimentSpec, load_experiment, override, spec_from_dict

SPEC = """
platform: finger
methods: [cmaes, golden_cd]
flags: no-video,no-cot
seeds: [0, 1]
budget: 5
output: results
simulation:
  duration: 6
  skip: 2
endpoint:
  url: http://localhost:8000/recommend
  model: some-model
  decoding: {temperature: 0.2}
"""


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "experiment.yaml"
    path.write_text(SPEC)
    return path


class TestLoadExperiment:
    def test_fields(self, spec_file, tmp_path):
        spec = load_experiment(str(spec_file))
        assert spec.platform == "finger"
        assert spec.methods == ["cmaes", "golden_cd"]
        assert spec.flags == ["no-video", "no-cot"]
        assert spec.flag_mask == 0x5
        assert spec.output == str(tmp_path / "results")
        assert (spec.simulation.duration, spec.simulation.skip, spec.simulation.settle) == (6, 2, 2.0)
        assert spec.endpoint.decoding == {"temperature": 0.2}
        assert spec.bounds_path.endswith("finger.bounds")

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_experiment(str(tmp_path / "absent.yaml"))
        assert info.value.field == "spec"

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- finger\n")
        with pytest.raises(ConfigError):
            load_experiment(str(path))


class TestValidation:
    @pytest.mark.parametrize("data, field", [
        ({}, "platform"),
        ({"platform": "gripper"}, "platform"),
        ({"platform": "finger", "mode": "live"}, "mode"),
        ({"platform": "finger", "mode": "replay"}, "manifest"),
        ({"platform": "finger", "seeds": []}, "seeds"),
        ({"platform": "finger", "seeds": [1, 1]}, "seeds"),
        ({"platform": "finger", "budget": -1}, "budget"),
        ({"platform": "finger", "repeats": 0}, "repeats"),
        ({"platform": "finger", "methods": ["annealing"]}, "methods"),
        ({"platform": "finger", "methods": ["vlm"]}, "endpoint"),
        ({"platform": "finger", "methods": ["scripted"]}, "script"),
        ({"platform": "finger", "flags": ["no-audio"]}, "flags"),
        ({"platform": "finger", "colour": "red"}, "colour"),
        ({"platform": "finger", "simulation": {"fps": 60}}, "simulation.fps"),
        ({"platform": "finger", "simulation": {"duration": 4, "skip": 5}}, "simulation.skip"),
        ({"platform": "finger", "simulation": {"metric": "area"}}, "simulation.metric"),
        ({"platform": "finger", "bounds": "missing.bounds"}, "bounds"),
        ({"platform": "finger", "methods": ["vlm"], "endpoint": {"url": "http://x", "media_mode": "upload"}}, "endpoint.media_mode"),
    ])
    def test_offending_field(self, data, field, tmp_path):
        with pytest.raises(ConfigError) as info:
            spec_from_dict(data, str(tmp_path))
        assert info.value.field == field

    def test_defaults(self):
        spec = spec_from_dict({"platform": "tentacle_air"})
        assert spec.methods == ["cmaes"]
        assert spec.seeds == [0, 1, 2]
        assert (spec.budget, spec.repeats, spec.workers) == (10, 3, 1)
        assert spec.endpoint is None

    def test_override_revalidates(self, spec_file):
        spec = load_experiment(str(spec_file))
        changed = override(spec, seeds=[4], budget=0, methods=["random"])
        assert (changed.seeds, changed.budget, changed.methods) == ([4], 0, ["random"])
        assert changed.output == spec.output
        with pytest.raises(ConfigError):
            override(spec, seeds=[1, 1])

    def test_round_trip_dict(self):
        spec = ExperimentSpec("finger", seeds=[3])
        assert spec.to_dict()["simulation"]["max_lag"] == 1.0
        assert spec.validate() is spec
