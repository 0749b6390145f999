import collections
import logging
import math
import numpy as np
from .CalibError import BoundsError, InvalidChannelError, LayoutError, UnknownPlatformError
from .Platforms import Platforms
from .ParameterSpace import ParameterBounds

from typing import Dict, List, Sequence, Union

logger = logging.getLogger(__name__)

ControlChannel = collections.namedtuple('ControlChannel', 'amplitude frequency phase')
"""
NamedTuple for one actuated channel, u(t) = amplitude * sin(2 pi frequency t + phase)

**Properties:**
- `amplitude` - In channel units (deg for the finger, rad for the tentacle)
- `frequency` - Hz, strictly positive
- `phase` - rad
"""

FINGER_PHASE_OFFSET = math.radians(45)

HOLDOUTS = {
    Platforms.RIG_FINGER: [
        ("H1", (50.0, 50.0)),
        ("H2", (50.0, 8.0)),
        ("H3", (8.0, 50.0)),
        ("H4", (8.0, 8.0)),
    ],
    Platforms.RIG_TENTACLE: [
        ("H1", (0.9, 0.5)),
        ("H2", (0.9, 0.15)),
        ("H3", (0.3, 0.5)),
        ("H4", (0.3, 0.15)),
    ],
}
"""Holdout controls: finger (MCP deg, PIP deg); tentacle (amplitude rad, frequency Hz)"""

HOLDOUT_NAMES = ["H1", "H2", "H3", "H4"]


class ControlProfile:
    """
    Sinusoidal actuation, one `ControlChannel` per actuated channel
    """
    def __init__(self, channels:Sequence[ControlChannel], platform:str, name:str=None):
        """
        Parameters:
            channels (list[ControlChannel]): Channels in actuator order
            platform (str): Rig or setting the profile drives
            name (str): Optional label (e.g. `H1`, `training`)
        """
        self.channels = tuple(ControlChannel(*(float(v) for v in c)) for c in channels)
        """Channels in actuator order"""
        if not self.channels:
            raise LayoutError("A control profile needs at least one channel")
        for i, c in enumerate(self.channels):
            if not c.frequency > 0:
                raise BoundsError("Channel {} frequency must be > 0, got {}".format(i, c.frequency))
        self.platform = Platforms.rig(platform)
        """Rig name"""
        self.name = name
        """Label"""

    @property
    def amplitudes(self) -> np.ndarray:
        """Channel amplitudes"""
        return np.array([c.amplitude for c in self.channels])

    def evaluate(self, channel:int, t:float) -> float:
        """A sin(2 pi f t + phi) of one channel"""
        if not isinstance(channel, (int, np.integer)) or not 0 <= channel < len(self.channels):
            raise InvalidChannelError("Channel {} does not exist (profile has {})".format(channel, len(self.channels)))
        c = self.channels[channel]
        return c.amplitude * math.sin(2 * math.pi * c.frequency * t + c.phase)

    def signal(self, t:Union[float, np.ndarray]) -> np.ndarray:
        """
        All channels at once

        Parameters:
            t (float or array): Time(s) in seconds

        Returns:
            (np.ndarray): shape `t.shape + (channels,)`
        """
        t = np.asarray(t, dtype=float)[..., None]
        a = np.array([c.amplitude for c in self.channels])
        f = np.array([c.frequency for c in self.channels])
        p = np.array([c.phase for c in self.channels])
        return a * np.sin(2 * np.pi * f * t + p)

    def with_amplitudes(self, amplitudes:Sequence[float], name:str=None) -> "ControlProfile":
        """Copy with new amplitudes, frequencies and phases kept"""
        if len(amplitudes) != len(self.channels):
            raise LayoutError("Expected {} amplitudes, got {}".format(len(self.channels), len(amplitudes)))
        return ControlProfile([c._replace(amplitude=float(a)) for c, a in zip(self.channels, amplitudes)], self.platform, name or self.name)

    def key(self) -> str:
        """Stable lookup key (rounded to 1e-6) used to match recordings"""
        return "{}:".format(self.platform) + "|".join("A={:.6f},f={:.6f},p={:.6f}".format(*c) for c in self.channels)

    def to_dict(self) -> Dict:
        d = {"platform": self.platform, "channels": [dict(c._asdict()) for c in self.channels]}
        if self.name is not None:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d:Dict) -> "ControlProfile":
        channels = [ControlChannel(c["amplitude"], c["frequency"], c.get("phase", 0.0)) for c in d["channels"]]
        return cls(channels, d["platform"], d.get("name"))

    def __eq__(self, other):
        if not isinstance(other, ControlProfile):
            return NotImplemented
        return self.platform == other.platform and self.channels == other.channels

    def __hash__(self):
        return hash((self.platform, self.channels))

    def __repr__(self):
        return "ControlProfile({!r}, {}{})".format(self.platform, list(self.channels), ", name={!r}".format(self.name) if self.name else "")


class ControlBounds:
    """
    Amplitude bounds of a rig plus its fixed training frequencies and phases
    """
    def __init__(self, platform:str, names:Sequence[str], lower:Sequence[float], upper:Sequence[float], frequencies:Sequence[float], phases:Sequence[float]=None):
        self.platform = Platforms.rig(platform)
        """Rig name"""
        self.names = list(names)
        """Amplitude parameter names, one per channel"""
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.frequencies = tuple(float(f) for f in frequencies)
        """Training frequency per channel"""
        self.phases = tuple(float(p) for p in phases) if phases is not None else (0.0,) * len(self.names)
        """Training phase per channel"""
        if not len(self.names) == len(self.lower) == len(self.upper) == len(self.frequencies) == len(self.phases):
            raise LayoutError("Control bounds need one entry per channel")
        if np.any(self.lower >= self.upper):
            raise BoundsError("Control amplitude bounds need min < max")

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return "ControlBounds({!r}, {})".format(self.platform, ", ".join("{}: [{}, {}]".format(n, lo, hi) for n, lo, hi in zip(self.names, self.lower, self.upper)))


def evaluate(profile:ControlProfile, channel:int, t:float) -> float:
    """
    Actuation value A sin(2 pi f t + phi) of one channel at time t

    Parameters:
        profile (ControlProfile): The profile
        channel (int): Channel index
        t (float): Seconds since motion start
    """
    return profile.evaluate(channel, t)

def control_bounds(platform:str, bounds:ParameterBounds) -> ControlBounds:
    """
    Build the control bounds from the `control` entries of a bounds file

    Parameters:
        platform (str): Setting or rig
        bounds (ParameterBounds): Full bounds of the setting
    """
    rig = Platforms.rig(platform)
    entries = [e for e in bounds if e.kind == "control"]
    frequencies = Platforms.TRAINING_FREQUENCIES[rig]
    if len(entries) != len(frequencies):
        raise LayoutError("{} rig has {} channels but the bounds list {} control entries".format(rig, len(frequencies), len(entries)))
    return ControlBounds(rig, [e.name for e in entries], [e.min for e in entries], [e.max for e in entries], frequencies)

def training_profile(cbounds:ControlBounds, amplitudes:Sequence[float]) -> ControlProfile:
    """Training profile with the given amplitudes and the fixed training frequencies/phases"""
    if len(amplitudes) != len(cbounds):
        raise LayoutError("Expected {} amplitudes, got {}".format(len(cbounds), len(amplitudes)))
    channels = [ControlChannel(a, f, p) for a, f, p in zip(amplitudes, cbounds.frequencies, cbounds.phases)]
    return ControlProfile(channels, cbounds.platform, "training")

def holdout_suite(platform:str) -> List[ControlProfile]:
    """
    The four fixed holdout profiles H1-H4 of a rig

    Finger holdouts use f0 = 0.3 Hz, f1 = 0.35 Hz and a 45 degree phase offset on channel 1.

    Parameters:
        platform (str): `finger`, `tentacle` or a setting name

    Returns:
        (list[ControlProfile]): H1, H2, H3, H4
    """
    try:
        rig = Platforms.rig(platform)
    except UnknownPlatformError:
        raise UnknownPlatformError("No holdout suite for platform '{}'".format(platform))
    suite = []
    for name, values in HOLDOUTS[rig]:
        if rig == Platforms.RIG_FINGER:
            f0, f1 = Platforms.TRAINING_FREQUENCIES[rig]
            channels = [ControlChannel(values[0], f0, 0.0), ControlChannel(values[1], f1, FINGER_PHASE_OFFSET)]
        else:
            channels = [ControlChannel(values[0], values[1], 0.0)]
        suite.append(ControlProfile(channels, rig, name))
    return suite

def clamp_control(proposed:ControlProfile, cbounds:ControlBounds) -> ControlProfile:
    """
    Project amplitudes into their bounds and hold frequencies and phases at the training values

    A proposed frequency change is reset with a warning; frequency is not a degree of freedom.

    Parameters:
        proposed (ControlProfile): Profile suggested by a recommender
        cbounds (ControlBounds): Bounds of the rig

    Returns:
        (ControlProfile): The safe profile
    """
    if proposed.platform != cbounds.platform or len(proposed.channels) != len(cbounds):
        raise LayoutError("Profile for {} with {} channels does not match {}".format(proposed.platform, len(proposed.channels), cbounds))
    channels = []
    for i, c in enumerate(proposed.channels):
        amplitude = c.amplitude if not math.isnan(c.amplitude) else cbounds.lower[i]
        amplitude = float(min(max(amplitude, cbounds.lower[i]), cbounds.upper[i]))
        if c.frequency != cbounds.frequencies[i]:
            logger.warning("Frequency %.4g Hz on channel %d reset to training frequency %.4g Hz", c.frequency, i, cbounds.frequencies[i])
        channels.append(ControlChannel(amplitude, cbounds.frequencies[i], cbounds.phases[i]))
    return ControlProfile(channels, cbounds.platform, proposed.name)
