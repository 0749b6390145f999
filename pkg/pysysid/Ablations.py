import collections
from functools import reduce
from .CalibError import ConfigError

from typing import List, Iterable

RequestFlags = collections.namedtuple('RequestFlags', 'include_video include_history chain_of_thought tune_control')
"""
NamedTuple of the recommendation request switches. All on is the full method.

**Properties:**
- `include_video` - Attach the sim and real recordings
- `include_history` - Send the iteration history table
- `chain_of_thought` - Ask the model to reason step by step
- `tune_control` - Allow the recommender to change control amplitudes
"""

class Ablations:
    """
    Building blocks for the ablation mask of a calibration run

    Masks are combined with `|`. The empty mask (0) is the full method
    """

    NO_VIDEO = 0x1
    """Recordings are not attached to the request"""
    NO_HISTORY = 0x2
    """The parameter history table is left out of the request"""
    NO_COT = 0x4
    """The step-by-step reasoning instruction is removed"""
    FIXED_CONTROL = 0x8
    """Control amplitudes are locked at their initial values"""

    NAMES = {
        "no-video": NO_VIDEO,
        "no-history": NO_HISTORY,
        "no-cot": NO_COT,
        "fixed-control": FIXED_CONTROL,
    }
    """Command-line names of the flags"""

    @staticmethod
    def parse(names:Iterable[str]) -> int:
        """
        Combine flag names into a mask

        Parameters:
            names (iterable[str]): Names from `Ablations.NAMES`, or a comma separated string

        Returns:
            (int): The mask
        """
        if isinstance(names, str):
            names = [n for n in names.split(",")]
        flags = []
        for name in names:
            name = name.strip()
            if not name:
                continue
            if name not in Ablations.NAMES:
                raise ConfigError("Unknown flag '{}'. Expected some of {}".format(name, sorted(Ablations.NAMES)), field="flags")
            flags.append(Ablations.NAMES[name])
        return reduce(lambda acc, f : acc | f, flags, 0)

    @staticmethod
    def names(mask:int) -> List[str]:
        """Flag names set in a mask, in declaration order"""
        return [name for name, flag in Ablations.NAMES.items() if mask & flag]

    @staticmethod
    def request_flags(mask:int=0) -> RequestFlags:
        """Translate a mask into the switches of a recommendation request"""
        return RequestFlags(
            include_video=not mask & Ablations.NO_VIDEO,
            include_history=not mask & Ablations.NO_HISTORY,
            chain_of_thought=not mask & Ablations.NO_COT,
            tune_control=not mask & Ablations.FIXED_CONTROL,
        )
