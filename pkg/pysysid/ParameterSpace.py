import collections
import collections.abc
import logging
import math
import numpy as np
import yaml
from .CalibError import BoundsError, LayoutError

from typing import Dict, Iterable, List, Mapping, Sequence, Union

logger = logging.getLogger(__name__)

KINDS = ("physics", "environment", "control")

ParameterBound = collections.namedtuple('ParameterBound', 'name min max unit kind nominal description')
"""
NamedTuple describing one searchable parameter. Bounds are inclusive.

**Properties:**
- `name` - Unique parameter name (e.g. `damping`)
- `min` - Lower bound
- `max` - Upper bound (strictly greater than `min`)
- `unit` - Display unit
- `kind` - One of `physics`, `environment`, `control`
- `nominal` - Hand-tuned reference value
- `description` - Free text
"""

NormalizedVector = collections.namedtuple('NormalizedVector', 'unit clamped')
"""
NamedTuple returned by `normalize`

**Properties:**
- `unit` - Coordinates in [0, 1]^d (numpy array)
- `clamped` - True if the input had to be clamped first
"""

RelativeErrorReport = collections.namedtuple('RelativeErrorReport', 'per_parameter mean')
"""
NamedTuple returned by `relative_error`

**Properties:**
- `per_parameter` - OrderedDict name -> percentage (None where the ground truth is 0)
- `mean` - Arithmetic mean over the defined percentages (None if there are none)
"""

class ParameterBounds(collections.abc.Sequence):
    """
    Ordered, named box bounds. The entry order is the vector layout every optimizer indexes by.

    Behaves like a read-only list of `ParameterBound`.
    """
    def __init__(self, entries:Iterable[Union[ParameterBound, Mapping]], fixed:Mapping[str, float]=None, setting:str=None):
        """
        Parameters:
            entries (iterable): `ParameterBound`s or mappings with the same keys (`unit`, `kind`, `nominal`, `description` optional)
            fixed (dict): Values of non-searched parameters that belong with these bounds
            setting (str): Setting the bounds were loaded for
        """
        parsed = []
        for entry in entries:
            if not isinstance(entry, ParameterBound):
                entry = self._from_mapping(entry)
            parsed.append(entry)

        names = [e.name for e in parsed]
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise BoundsError("Duplicate parameter names: {}".format(", ".join(duplicates)))
        for e in parsed:
            if not (math.isfinite(e.min) and math.isfinite(e.max)):
                raise BoundsError("Bounds of '{}' must be finite".format(e.name))
            if not e.min < e.max:
                raise BoundsError("Bounds of '{}' need min < max, got [{}, {}]".format(e.name, e.min, e.max))
            if e.kind not in KINDS:
                raise BoundsError("Kind of '{}' must be one of {}, got '{}'".format(e.name, KINDS, e.kind))
            if not e.min <= e.nominal <= e.max:
                raise BoundsError("Nominal value of '{}' ({}) lies outside [{}, {}]".format(e.name, e.nominal, e.min, e.max))

        self._entries = tuple(parsed)
        self.fixed = collections.OrderedDict((str(k), float(v)) for k, v in (fixed or {}).items())
        """Values of parameters that are not searched"""
        self.setting = setting
        """Setting name (None if built by hand)"""

    @staticmethod
    def _from_mapping(entry:Mapping) -> ParameterBound:
        try:
            lo, hi = float(entry["min"]), float(entry["max"])
            name = str(entry["name"])
        except (KeyError, TypeError, ValueError) as e:
            raise BoundsError("Malformed bounds entry {!r}: {}".format(entry, e))
        nominal = entry.get("nominal")
        return ParameterBound(
            name=name,
            min=lo,
            max=hi,
            unit=str(entry.get("unit", "")),
            kind=str(entry.get("kind", "physics")),
            nominal=(lo+hi)/2 if nominal is None else float(nominal),
            description=str(entry.get("description", "")),
        )

    @classmethod
    def load(cls, path:str, setting:str=None) -> "ParameterBounds":
        """
        Load bounds from a YAML bounds file

        Parameters:
            path (str): Path of the `.bounds` file
            setting (str): Section to read. May be omitted if the file has exactly one section

        Returns:
            (ParameterBounds): The bounds of that section
        """
        with open(path, "r") as f:
            document = yaml.safe_load(f)
        if not isinstance(document, dict) or not document:
            raise BoundsError("Bounds file {} has no sections".format(path))
        if setting is None:
            if len(document) != 1:
                raise BoundsError("Bounds file {} has sections {}; choose one".format(path, sorted(document)))
            setting = next(iter(document))
        if setting not in document:
            raise BoundsError("Bounds file {} has no section '{}'".format(path, setting))
        section = document[setting] or {}
        return cls(section.get("parameters", []), fixed=section.get("fixed"), setting=setting)

    def to_dict(self) -> Dict:
        """Mapping in the bounds file layout (one section)"""
        section = {"parameters": [dict(e._asdict()) for e in self._entries]}
        if self.fixed:
            section["fixed"] = dict(self.fixed)
        return {self.setting or "bounds": section}

    @classmethod
    def from_dict(cls, document:Dict) -> "ParameterBounds":
        """Inverse of `to_dict`"""
        if not isinstance(document, dict) or len(document) != 1:
            raise BoundsError("Expected exactly one bounds section, got {}".format(document))
        setting, section = next(iter(document.items()))
        return cls(section.get("parameters", []), fixed=section.get("fixed"), setting=None if setting == "bounds" else setting)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self._entries[self.position(key)]
        return self._entries[key]

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if not isinstance(other, ParameterBounds):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return "ParameterBounds([{}])".format(", ".join("{}: [{}, {}]".format(e.name, e.min, e.max) for e in self._entries))

    def position(self, name:str) -> int:
        """Index of a parameter in the vector layout"""
        for i, e in enumerate(self._entries):
            if e.name == name:
                return i
        raise KeyError("No parameter named '{}'".format(name))

    @property
    def names(self) -> List[str]:
        """Parameter names in layout order"""
        return [e.name for e in self._entries]

    @property
    def lower(self) -> np.ndarray:
        """Lower bounds"""
        return np.array([e.min for e in self._entries], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        """Upper bounds"""
        return np.array([e.max for e in self._entries], dtype=float)

    @property
    def span(self) -> np.ndarray:
        """max - min per parameter"""
        return self.upper - self.lower

    def select(self, kinds:Iterable[str]) -> "ParameterBounds":
        """
        Sub-bounds holding only the given kinds, order preserved

        Parameters:
            kinds (iterable[str]): Kinds to keep, e.g. `("physics",)`
        """
        kinds = tuple(kinds)
        return ParameterBounds([e for e in self._entries if e.kind in kinds], fixed=self.fixed, setting=self.setting)

    def nominal(self) -> "ParameterVector":
        """Vector of the nominal values"""
        return ParameterVector(self, [e.nominal for e in self._entries])

    def to_unit(self, values:Sequence[float]) -> np.ndarray:
        """Map raw values to unit-cube coordinates (no clamping)"""
        return (np.asarray(values, dtype=float) - self.lower) / self.span

    def from_unit(self, unit:Sequence[float]) -> np.ndarray:
        """Map unit-cube coordinates back to raw values (no clamping)"""
        return self.lower + np.asarray(unit, dtype=float) * self.span


class ParameterVector(collections.abc.Mapping):
    """
    Named parameter values laid out like a `ParameterBounds`.

    Behaves like a read-only dict name -> value. Use `.array` for the numpy layout.
    """
    def __init__(self, bounds:ParameterBounds, values:Union[Sequence[float], Mapping[str, float]]):
        """
        Parameters:
            bounds (ParameterBounds): Layout
            values (list or dict): Values in layout order, or a mapping containing every name
        """
        self.bounds = bounds
        """The layout"""
        if isinstance(values, collections.abc.Mapping):
            missing = [n for n in bounds.names if n not in values]
            if missing:
                raise LayoutError("Values for {} are missing".format(", ".join(missing)))
            values = [values[n] for n in bounds.names]
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.shape[0] != len(bounds):
            raise LayoutError("Expected {} values, got {}".format(len(bounds), arr.shape[0]))
        arr.setflags(write=False)
        self._values = arr

    @property
    def array(self) -> np.ndarray:
        """Values in layout order (copy)"""
        return self._values.copy()

    def __getitem__(self, name):
        return float(self._values[self.bounds.position(name)])

    def __iter__(self):
        return iter(self.bounds.names)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return "ParameterVector({})".format(", ".join("{}={:.6g}".format(n, v) for n, v in zip(self.bounds.names, self._values)))

    def replace(self, **values) -> "ParameterVector":
        """Copy with some values changed"""
        arr = self.array
        for name, value in values.items():
            arr[self.bounds.position(name)] = value
        return ParameterVector(self.bounds, arr)

    def as_dict(self) -> "collections.OrderedDict[str, float]":
        """OrderedDict in layout order"""
        return collections.OrderedDict((n, float(v)) for n, v in zip(self.bounds.names, self._values))

    def in_bounds(self) -> bool:
        """True if every value lies inside its (inclusive) bound"""
        return bool(np.all((self._values >= self.bounds.lower) & (self._values <= self.bounds.upper)))


def _check_layout(params:ParameterVector, bounds:ParameterBounds):
    if params.bounds.names != bounds.names:
        raise LayoutError("Parameter layout {} does not match bounds {}".format(params.bounds.names, bounds.names))

def clamp(params:ParameterVector, bounds:ParameterBounds) -> ParameterVector:
    """
    Project every value onto its [min, max] interval. NaN values are replaced by the nominal value.

    Parameters:
        params (ParameterVector): Values to clamp
        bounds (ParameterBounds): Bounds with the same layout

    Returns:
        (ParameterVector): Clamped copy laid out by `bounds`
    """
    _check_layout(params, bounds)
    values = params.array
    nan = np.isnan(values)
    if nan.any():
        logger.warning("NaN for %s replaced by nominal values", [n for n, bad in zip(bounds.names, nan) if bad])
        values[nan] = np.array([e.nominal for e in bounds])[nan]
    return ParameterVector(bounds, np.clip(values, bounds.lower, bounds.upper))

def sample_uniform(bounds:ParameterBounds, seed:int) -> ParameterVector:
    """
    Draw every coordinate independently and uniformly from its interval

    Parameters:
        bounds (ParameterBounds): Bounds to sample from
        seed (int): Seed. The same seed always gives the same vector

    Returns:
        (ParameterVector): The sample
    """
    rng = np.random.default_rng(seed)
    values = rng.uniform(bounds.lower, bounds.upper)
    return ParameterVector(bounds, np.minimum(values, bounds.upper))

def normalize(params:ParameterVector, bounds:ParameterBounds) -> NormalizedVector:
    """
    Map a vector to the unit cube: (v - min) / (max - min). Out-of-bounds input is clamped first.

    Returns:
        (NormalizedVector): `unit` coordinates and whether clamping happened
    """
    _check_layout(params, bounds)
    clamped = not params.in_bounds()
    if clamped:
        params = clamp(params, bounds)
    return NormalizedVector(bounds.to_unit(params.array), clamped)

def denormalize(unit:Sequence[float], bounds:ParameterBounds) -> ParameterVector:
    """Inverse of `normalize`"""
    return ParameterVector(bounds, bounds.from_unit(unit))

def relative_error(estimate:ParameterVector, ground_truth:ParameterVector) -> RelativeErrorReport:
    """
    Per-parameter |(estimate - gt) / gt| * 100 and their mean

    Parameters with a ground truth of exactly 0 are reported as None and left out of the mean.

    Returns:
        (RelativeErrorReport): Percentages and mean
    """
    if list(estimate.keys()) != list(ground_truth.keys()):
        raise LayoutError("Estimate layout {} does not match ground truth {}".format(list(estimate.keys()), list(ground_truth.keys())))
    per_parameter = collections.OrderedDict()
    for name in ground_truth:
        gt = ground_truth[name]
        if gt == 0:
            logger.warning("Ground truth of '%s' is 0; relative error undefined", name)
            per_parameter[name] = None
        else:
            per_parameter[name] = abs((estimate[name] - gt) / gt) * 100
    defined = [v for v in per_parameter.values() if v is not None]
    return RelativeErrorReport(per_parameter, float(np.mean(defined)) if defined else None)

def normalized_distance(estimate:ParameterVector, ground_truth:ParameterVector, bounds:ParameterBounds) -> float:
    """Euclidean distance between the unit-cube images of two vectors"""
    a = normalize(estimate, bounds).unit
    b = normalize(ground_truth, bounds).unit
    return float(np.linalg.norm(a - b))
