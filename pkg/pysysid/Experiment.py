import dataclasses
import os
import yaml
from .Ablations import Ablations
from .CalibError import ConfigError, UnknownPlatformError
from .Platforms import Platforms
from .recommenders import METHODS

from typing import Dict, List, Optional

MODES = ("sim2sim", "replay")
MEDIA_MODES = ("path", "inline")

@dataclasses.dataclass
class SimulationConfig:
    """Simulation and scoring settings of an experiment"""
    duration: float = 10.0
    """Recorded seconds per run"""
    settle: float = 2.0
    """Discarded settle seconds before the control starts"""
    skip: float = 5.0
    """Transient seconds ignored when scoring"""
    max_lag: float = 1.0
    """Alignment window half width in seconds"""
    observation_noise: float = 0.0
    """Gaussian pixel noise of sim2sim observations"""
    metric: Optional[str] = None
    normalize_arclength: Optional[bool] = None
    space: str = "px"

@dataclasses.dataclass
class EndpointConfig:
    """Connection settings of the VLM recommender"""
    url: str
    model: Optional[str] = None
    timeout: float = 120.0
    retries: int = 3
    backoff: float = 1.0
    media_mode: str = "path"
    decoding: Dict = dataclasses.field(default_factory=dict)

@dataclasses.dataclass
class ExperimentSpec:
    """
    One experiment: a setting, its methods and seeds, and where results go
    """
    platform: str
    """Setting name"""
    mode: str = "sim2sim"
    bounds: Optional[str] = None
    """Bounds file; the shipped file of the setting when None"""
    methods: List[str] = dataclasses.field(default_factory=lambda: ["cmaes"])
    flags: List[str] = dataclasses.field(default_factory=list)
    """Ablation names"""
    seeds: List[int] = dataclasses.field(default_factory=lambda: [0, 1, 2])
    budget: int = 10
    repeats: int = 3
    output: str = "runs"
    manifest: Optional[str] = None
    """Replay recordings manifest"""
    script: Optional[str] = None
    """Script file of the scripted method"""
    endpoint: Optional[EndpointConfig] = None
    simulation: SimulationConfig = dataclasses.field(default_factory=SimulationConfig)
    workers: int = 1

    @property
    def bounds_path(self) -> str:
        return self.bounds or Platforms.bounds_path(self.platform)

    @property
    def flag_mask(self) -> int:
        return Ablations.parse(self.flags)

    def validate(self) -> "ExperimentSpec":
        """
        Check every field

        Raises:
            ConfigError: The first offending field
        """
        try:
            Platforms.check(self.platform)
        except UnknownPlatformError as e:
            raise ConfigError(str(e), field="platform")
        if self.mode not in MODES:
            raise ConfigError("mode must be one of {}, got '{}'".format(MODES, self.mode), field="mode")
        if self.mode == "replay" and not self.manifest:
            raise ConfigError("replay mode needs a recordings manifest", field="manifest")
        if not self.seeds:
            raise ConfigError("seeds must not be empty", field="seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct, got {}".format(self.seeds), field="seeds")
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in self.seeds):
            raise ConfigError("seeds must be integers, got {}".format(self.seeds), field="seeds")
        if not isinstance(self.budget, int) or self.budget < 0:
            raise ConfigError("budget must be an integer >= 0, got {!r}".format(self.budget), field="budget")
        if not isinstance(self.repeats, int) or self.repeats < 1:
            raise ConfigError("repeats must be an integer >= 1, got {!r}".format(self.repeats), field="repeats")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be an integer >= 1, got {!r}".format(self.workers), field="workers")
        if not self.methods:
            raise ConfigError("methods must not be empty", field="methods")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("Unknown method '{}'. Expected one of {}".format(m, sorted(METHODS)), field="methods")
        if "vlm" in self.methods and self.endpoint is None:
            raise ConfigError("The vlm method needs an endpoint section", field="endpoint")
        if "scripted" in self.methods and not self.script:
            raise ConfigError("The scripted method needs a script", field="script")
        if self.endpoint is not None and self.endpoint.media_mode not in MEDIA_MODES:
            raise ConfigError("media_mode must be one of {}".format(MEDIA_MODES), field="endpoint.media_mode")
        if self.simulation.metric not in (None, "tip", "centerline"):
            raise ConfigError("metric must be tip or centerline", field="simulation.metric")
        if self.simulation.skip >= self.simulation.duration:
            raise ConfigError("skip must be shorter than duration", field="simulation.skip")
        Ablations.parse(self.flags)
        if self.bounds is not None and not os.path.exists(self.bounds):
            raise ConfigError("Bounds file {} not found".format(self.bounds), field="bounds")
        return self

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)

def _section(cls, data, field:str):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigError("{} must be a mapping".format(field), field=field)
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError("Unknown key '{}' in {}".format(key, field), field="{}.{}".format(field, key))
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError("Bad {} section: {}".format(field, e), field=field)

def spec_from_dict(data:Dict, base_dir:str=".") -> ExperimentSpec:
    """
    Build and validate an `ExperimentSpec` from a parsed mapping

    Relative paths (bounds, manifest, script, output) are resolved against `base_dir`.
    """
    if not isinstance(data, dict):
        raise ConfigError("An experiment spec must be a mapping", field="spec")
    data = dict(data)
    endpoint = _section(EndpointConfig, data.pop("endpoint", None), "endpoint")
    simulation = _section(SimulationConfig, data.pop("simulation", None), "simulation") or SimulationConfig()
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    for key in data:
        if key not in known:
            raise ConfigError("Unknown key '{}'".format(key), field=key)
    if "platform" not in data:
        raise ConfigError("platform is required", field="platform")
    if isinstance(data.get("methods"), str):
        data["methods"] = [data["methods"]]
    if isinstance(data.get("flags"), str):
        data["flags"] = [f for f in data["flags"].split(",") if f]
    for key in ("bounds", "manifest", "script", "output"):
        if data.get(key) and not os.path.isabs(data[key]):
            data[key] = os.path.join(base_dir, data[key])
    spec = ExperimentSpec(endpoint=endpoint, simulation=simulation, **data)
    return spec.validate()

def load_experiment(path:str) -> ExperimentSpec:
    """
    Read an experiment spec (YAML)

    Raises:
        ConfigError: Unreadable file or invalid field
    """
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError("Cannot read experiment spec {}: {}".format(path, e), field="spec")
    return spec_from_dict(data, os.path.dirname(os.path.abspath(path)))

def override(spec:ExperimentSpec, seeds:List[int]=None, budget:int=None, methods:List[str]=None, flags:List[str]=None,
             output:str=None) -> ExperimentSpec:
    """Copy of `spec` with command-line values replacing the file's, validated again"""
    changes = {k: v for k, v in dict(seeds=seeds, budget=budget, methods=methods, flags=flags, output=output).items() if v is not None}
    return dataclasses.replace(spec, **changes).validate()
