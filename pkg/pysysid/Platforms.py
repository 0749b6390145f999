import os
from .CalibError import UnknownPlatformError

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")

class Platforms:
    """Calibration settings, the rigs they run on and their per-setting constants"""

    FINGER = "finger"
    """Tendon-driven finger (3 joints, 2 actuated channels), tip tracked by a colour marker"""
    TENTACLE_AIR = "tentacle_air"
    """Soft tentacle oscillated from its base in air. Body parameters are tuned"""
    TENTACLE_WATER = "tentacle_water"
    """Soft tentacle oscillated in water. Only the environment (drag) parameters are tuned"""

    SETTINGS = [FINGER, TENTACLE_AIR, TENTACLE_WATER]
    """All settings in report order"""

    RIG_FINGER = "finger"
    """Rig name of the finger"""
    RIG_TENTACLE = "tentacle"
    """Rig name shared by both tentacle settings"""

    RIGS = {
        FINGER: RIG_FINGER,
        TENTACLE_AIR: RIG_TENTACLE,
        TENTACLE_WATER: RIG_TENTACLE,
    }
    """Setting -> rig"""

    FPS = {
        FINGER: 30.0,
        TENTACLE_AIR: 25.0,
        TENTACLE_WATER: 25.0,
    }
    """Output frame rate of simulated trajectories. Water recordings (captured at 120 fps) are resampled on import"""

    FRAME_SIZE = {
        FINGER: (1920, 1080),
        TENTACLE_AIR: (640, 480),
        TENTACLE_WATER: (1920, 1080),
    }
    """(width, height) of the camera frame in pixels"""

    BASE_EDGE = {
        FINGER: "left",
        TENTACLE_AIR: "top",
        TENTACLE_WATER: "top",
    }
    """Frame edge the body is mounted on. The extracted centerline starts at this end"""

    TUNED_KINDS = {
        FINGER: ("physics",),
        TENTACLE_AIR: ("physics",),
        TENTACLE_WATER: ("environment",),
    }
    """Parameter kinds searched by the recommenders. Everything else is held at its fixed/nominal value"""

    ENVIRONMENT = {
        FINGER: False,
        TENTACLE_AIR: False,
        TENTACLE_WATER: True,
    }
    """Whether fluid drag acts on the body"""

    METRIC = {
        FINGER: "tip",
        TENTACLE_AIR: "centerline",
        TENTACLE_WATER: "centerline",
    }
    """Trajectory error metric"""

    BOUNDS_FILES = {
        FINGER: "finger.bounds",
        TENTACLE_AIR: "tentacle_air.bounds",
        TENTACLE_WATER: "tentacle_water.bounds",
    }
    """Shipped bounds file per setting (inside `pysysid/data`)"""

    TRAINING_FREQUENCIES = {
        RIG_FINGER: (0.3, 0.35),
        RIG_TENTACLE: (0.15,),
    }
    """Fixed per-channel training frequencies in Hz"""

    CONTROL_UNITS = {
        RIG_FINGER: "deg",
        RIG_TENTACLE: "rad",
    }
    """Units of the control amplitudes"""

    @staticmethod
    def check(setting:str) -> str:
        """
        Validate a setting name

        Returns:
            (str): The setting name
        """
        if setting not in Platforms.RIGS:
            raise UnknownPlatformError("Unknown setting '{}'. Expected one of {}".format(setting, Platforms.SETTINGS))
        return setting

    @staticmethod
    def rig(name:str) -> str:
        """
        Rig of a setting. Rig names map to themselves

        Parameters:
            name (str): Setting (`finger`, `tentacle_air`, `tentacle_water`) or rig (`finger`, `tentacle`)

        Returns:
            (str): `finger` or `tentacle`
        """
        if name in Platforms.RIGS:
            return Platforms.RIGS[name]
        if name == Platforms.RIG_TENTACLE:
            return name
        raise UnknownPlatformError("Unknown platform '{}'".format(name))

    @staticmethod
    def bounds_path(setting:str) -> str:
        """Absolute path of the shipped bounds file of a setting"""
        return os.path.join(DATA_DIR, Platforms.BOUNDS_FILES[Platforms.check(setting)])
