import numpy as np
from ..CalibError import MetricMismatchError, UnrecoverablePerceptionError

from typing import Optional, Sequence

def interpolate_missing(frames:Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """
    Fill missing frames (None) by per-coordinate linear interpolation between the nearest valid frames

    Leading and trailing gaps copy the nearest valid frame.

    Parameters:
        frames (list): Per-frame point arrays `(N, 2)` (or `(2,)` for a single point), None where missing

    Returns:
        (np.ndarray): `(T, N, 2)`
    """
    valid = [i for i, f in enumerate(frames) if f is not None]
    if not valid:
        raise UnrecoverablePerceptionError("All {} frames are missing".format(len(frames)))
    shape = np.asarray(frames[valid[0]], dtype=float).reshape(-1, 2).shape
    known = np.empty((len(valid),) + shape)
    for k, i in enumerate(valid):
        f = np.asarray(frames[i], dtype=float).reshape(-1, 2)
        if f.shape != shape:
            raise MetricMismatchError("Frame {} has {} points, frame {} has {}".format(i, f.shape[0], valid[0], shape[0]))
        known[k] = f
    if len(valid) == len(frames):
        return known
    flat = known.reshape(len(valid), -1)
    t = np.arange(len(frames))
    out = np.stack([np.interp(t, valid, flat[:, j]) for j in range(flat.shape[1])], axis=1)
    return out.reshape((len(frames),) + shape)
