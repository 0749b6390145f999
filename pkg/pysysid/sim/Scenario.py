import collections
import logging
import os
import threading
import zlib
import numpy as np
import yaml
from ..CalibError import BoundsError, ConfigError, MissingRecordingError
from ..Control import ControlProfile, control_bounds, holdout_suite, training_profile
from ..ParameterSpace import ParameterBounds, ParameterVector, sample_uniform
from ..Platforms import Platforms
from ..Trajectory import Trajectory, sidecar_path
from .FingerModel import FingerModel
from .RodModel import RodModel

from typing import Dict, List, Mapping

logger = logging.getLogger(__name__)

GroundTruthScenario = collections.namedtuple('GroundTruthScenario', 'gt observations source')
"""
NamedTuple returned by `ground_truth_scenario`

**Properties:**
- `gt` - Ground-truth `ParameterVector` over the tuned coordinates
- `observations` - Dict `training`, `H1` ... `H4` -> `Trajectory`
- `source` - The `ScenarioSource` that produced them (reuse it for calibration and holdouts)
"""

def physical_params(bounds:ParameterBounds, values:Mapping[str, float]=None) -> Dict[str, float]:
    """
    Every physical value a simulator needs: fixed values, then nominal values of the non-control entries, then `values`

    Parameters:
        bounds (ParameterBounds): Full bounds of the setting
        values (mapping): Searched values (e.g. a `ParameterVector` over the tuned kinds)
    """
    params = dict(bounds.fixed)
    params.update((e.name, e.nominal) for e in bounds if e.kind != "control")
    if values is not None:
        params.update((k, float(v)) for k, v in values.items())
    return params

def simulate(setting:str, params:Mapping[str, float], control:ControlProfile, duration:float=10.0, fps:float=None, settle:float=2.0, space:str="px") -> Trajectory:
    """
    Run the surrogate of a setting

    Parameters:
        setting (str): `finger`, `tentacle_air` or `tentacle_water`
        params (mapping): Physical values by name (see `physical_params`)
        control (ControlProfile): Actuation
        duration (float): Recorded seconds
        fps (float): Output frame rate (default: the setting's)
        settle (float): Discarded seconds at rest before motion
        space (str): `px` or `mm`

    Returns:
        (Trajectory): Tip (finger) or 10-point centerline (tentacle)
    """
    Platforms.check(setting)
    fps = fps or Platforms.FPS[setting]
    if Platforms.rig(setting) == Platforms.RIG_FINGER:
        return FingerModel.from_params(params).run(control, duration, fps, settle, space=space)
    return RodModel.from_params(params).run(control, duration, fps, settle, space=space,
                                            environment=Platforms.ENVIRONMENT[setting], setting=setting)


class ScenarioSource:
    """
    Observation source of a sim2sim experiment: the surrogate run with ground-truth parameters stands in for the hardware.

    Noise-free runs are cached per control profile. With `noise > 0` every observation gets seeded Gaussian
    pixel noise that differs between repeats.
    """
    def __init__(self, setting:str, gt_params:Mapping[str, float], duration:float=10.0, settle:float=2.0, fps:float=None, noise:float=0.0, seed:int=0, space:str="px"):
        """
        Parameters:
            setting (str): Setting name
            gt_params (mapping): Full physical ground truth (see `physical_params`)
            duration (float): Recorded seconds per observation
            settle (float): Settle time passed to the simulator
            fps (float): Frame rate (default: the setting's)
            noise (float): Standard deviation of the observation noise in output units
            seed (int): Noise seed
            space (str): `px` or `mm`
        """
        self.setting = Platforms.check(setting)
        self.gt_params = dict(gt_params)
        self.duration = duration
        self.settle = settle
        self.fps = fps or Platforms.FPS[setting]
        self.noise = float(noise)
        self.seed = int(seed)
        self.space = space
        self._cache = {}
        self._lock = threading.Lock()

    def resolve(self, control:ControlProfile) -> ControlProfile:
        """Every profile can be observed"""
        return control

    def _clean(self, control:ControlProfile) -> Trajectory:
        key = control.key()
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        traj = simulate(self.setting, self.gt_params, control, self.duration, self.fps, self.settle, self.space)
        with self._lock:
            self._cache[key] = traj
        return traj

    def observe(self, control:ControlProfile, repeat:int=0) -> Trajectory:
        """
        Observation of the ground truth under `control`

        Parameters:
            control (ControlProfile): Actuation
            repeat (int): Repeat index (selects the noise draw)
        """
        traj = self._clean(control)
        if self.noise <= 0:
            return traj
        rng = np.random.default_rng([self.seed, int(repeat), zlib.crc32(control.key().encode())])
        return traj.with_points(traj.points + rng.normal(0.0, self.noise, traj.points.shape))

    def __repr__(self):
        return "ScenarioSource({!r}, noise={:g})".format(self.setting, self.noise)


class ReplaySource:
    """
    Observation source backed by captured trajectories listed in a YAML manifest

    Manifest layout:

        fps: 25
        space: px
        recordings:
          - {profile: {platform: tentacle, channels: [{amplitude: 1.0, frequency: 0.15, phase: 0.0}]}, repeat: 0, path: train.csv}

    Relative paths are resolved against the manifest's directory.
    """
    def __init__(self, recordings:List[Dict], fps:float=None, space:str="px", root:str="."):
        self.fps = fps
        """Target frame rate. Recordings are resampled onto it when set"""
        self.space = space
        self._profiles = collections.OrderedDict()
        self._paths = {}
        self._cache = {}
        self._lock = threading.Lock()
        for i, entry in enumerate(recordings):
            try:
                profile = ControlProfile.from_dict(entry["profile"])
                path = entry["path"]
            except (KeyError, TypeError, ValueError, BoundsError) as e:
                raise ConfigError("Recording {} of the manifest is malformed: {}".format(i, e), field="manifest")
            self._profiles.setdefault(profile.key(), profile)
            self._paths[(profile.key(), int(entry.get("repeat", 0)))] = path if os.path.isabs(path) else os.path.join(root, path)

    @classmethod
    def load(cls, path:str, fps:float=None) -> "ReplaySource":
        """
        Read a manifest

        Parameters:
            path (str): Manifest path
            fps (float): Frame rate to resample onto (default: the manifest's `fps`)
        """
        try:
            with open(path, "r") as f:
                document = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError("Cannot read manifest {}: {}".format(path, e), field="manifest")
        if not isinstance(document, dict) or "recordings" not in document:
            raise ConfigError("Manifest {} lists no recordings".format(path), field="manifest")
        return cls(document["recordings"], fps or document.get("fps"), document.get("space", "px"), os.path.dirname(os.path.abspath(path)))

    @property
    def profiles(self) -> List[ControlProfile]:
        """Recorded profiles in manifest order"""
        return list(self._profiles.values())

    def resolve(self, control:ControlProfile) -> ControlProfile:
        """
        The recorded profile for `control`: the same profile if recorded, else the nearest recorded one
        (same platform and channel count, Euclidean distance over amplitudes) with a warning
        """
        key = control.key()
        if key in self._profiles:
            return self._profiles[key]
        candidates = [p for p in self._profiles.values() if p.platform == control.platform and len(p.channels) == len(control.channels)]
        if not candidates:
            raise MissingRecordingError("No recording for {} profiles with {} channels".format(control.platform, len(control.channels)))
        nearest = min(candidates, key=lambda p: float(np.linalg.norm(p.amplitudes - control.amplitudes)))
        logger.warning("No recording for %s; using nearest recorded profile %s", key, nearest.key())
        return nearest

    def observe(self, control:ControlProfile, repeat:int=0) -> Trajectory:
        """
        Recording of `control` (or its nearest recorded profile) for one repeat
        """
        profile = self.resolve(control)
        key = (profile.key(), int(repeat))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        if key not in self._paths:
            raise MissingRecordingError("No recording of repeat {} for {}".format(repeat, profile.key()))
        path = self._paths[key]
        traj = Trajectory.load(path, fps=None if os.path.exists(sidecar_path(path)) else self.fps, space=self.space)
        if self.fps is not None:
            traj = traj.resample(self.fps)
        with self._lock:
            self._cache[key] = traj
        return traj

    def __repr__(self):
        return "ReplaySource({} profiles)".format(len(self._profiles))


def ground_truth_scenario(setting:str, seed:int, bounds:ParameterBounds=None, duration:float=10.0, settle:float=2.0, fps:float=None, noise:float=0.0, space:str="px") -> GroundTruthScenario:
    """
    Draw a ground truth over the tuned coordinates and observe it under the training control and H1-H4

    Non-tuned coordinates stay at their fixed/nominal values. The training control uses the nominal amplitudes.

    Parameters:
        setting (str): Setting name
        seed (int): Seed of the ground-truth draw
        bounds (ParameterBounds): Full bounds (default: the shipped file of the setting)

    Returns:
        (GroundTruthScenario): gt, observations and the source
    """
    Platforms.check(setting)
    bounds = bounds if bounds is not None else ParameterBounds.load(Platforms.bounds_path(setting), setting)
    tuned = bounds.select(Platforms.TUNED_KINDS[setting])
    gt = sample_uniform(tuned, seed)
    source = ScenarioSource(setting, physical_params(bounds, gt), duration, settle, fps, noise, seed, space)
    cb = control_bounds(setting, bounds)
    training = training_profile(cb, [bounds[name].nominal for name in cb.names])
    observations = collections.OrderedDict([("training", source.observe(training))])
    for profile in holdout_suite(setting):
        observations[profile.name] = source.observe(profile)
    return GroundTruthScenario(gt, observations, source)
