import collections
import logging
import numpy as np
from .CalibError import InsufficientOverlapError, MetricMismatchError
from .Trajectory import Trajectory, arc_length
from .perception.Missing import interpolate_missing

from typing import Dict, Optional

logger = logging.getLogger(__name__)

SIGNALS = ("mean_y", "mean_x")
"""Scalar per-frame signals `align` can correlate"""

METRICS = ("tip", "centerline")

AlignedPair = collections.namedtuple('AlignedPair', 'sim real lag_frames overlap flags')
"""
NamedTuple returned by `align` and `trim_transient`

**Properties:**
- `sim` - Simulated trajectory cropped to the overlap
- `real` - Observed trajectory cropped to the overlap
- `lag_frames` - Delay of `real` relative to `sim` in frames (positive: real lags behind)
- `overlap` - Frame count T of both crops
- `flags` - Tuple of notes (`lag_at_window_edge`, `flat_signal`)
"""

class MetricsReport(collections.namedtuple('MetricsReport', 'lag_frames mae frames points flags')):
    """
    Outcome of comparing one simulated and one observed trajectory

    **Properties:**
    - `lag_frames` - Alignment lag
    - `mae` - Error in trajectory units
    - `frames` - T, frames compared after trimming
    - `points` - N, points per frame
    - `flags` - Tuple of alignment notes
    """
    __slots__ = ()

    def to_dict(self) -> Dict:
        """JSON layout {lag_frames, mae, T, N, flags}"""
        return {"lag_frames": int(self.lag_frames), "mae": float(self.mae), "T": int(self.frames), "N": int(self.points), "flags": list(self.flags)}

def _signal(traj:Trajectory, signal:str) -> np.ndarray:
    if signal not in SIGNALS:
        raise ValueError("signal must be one of {}, got '{}'".format(SIGNALS, signal))
    axis = 1 if signal == "mean_y" else 0
    return traj.points[:, :, axis].mean(axis=1)

def _crop(sim:Trajectory, real:Trajectory, lag:int):
    if lag >= 0:
        n = min(sim.n_frames, real.n_frames - lag)
        return sim.crop(0, n), real.crop(lag, lag + n), n
    n = min(sim.n_frames + lag, real.n_frames)
    return sim.crop(-lag, -lag + n), real.crop(0, n), n

def align(sim:Trajectory, real:Trajectory, max_lag:float=1.0, min_overlap:float=2.0, signal:str="mean_y") -> AlignedPair:
    """
    Estimate the delay between two recordings by normalized cross-correlation and crop both to their overlap

    Lags are searched in [-max_lag, +max_lag]; for each lag the Pearson correlation of the overlapping parts of the
    per-frame signal is computed. The highest correlation wins, ties go to the smallest |lag|.

    Parameters:
        sim (Trajectory): Simulated trajectory
        real (Trajectory): Observed trajectory (same fps and point count)
        max_lag (float): Half width of the lag window in seconds
        min_overlap (float): Minimum overlap in seconds after shifting
        signal (str): `mean_y` (per-frame mean vertical coordinate) or `mean_x`

    Returns:
        (AlignedPair): Cropped pair and the lag
    """
    if sim.fps != real.fps:
        raise MetricMismatchError("Frame rates differ: {} vs {}".format(sim.fps, real.fps))
    if sim.n_points != real.n_points:
        raise MetricMismatchError("Point counts differ: {} vs {}".format(sim.n_points, real.n_points))
    if sim.n_frames == 0 or real.n_frames == 0:
        raise InsufficientOverlapError("Cannot align an empty trajectory")
    a, b = _signal(sim, signal), _signal(real, signal)
    window = int(round(max_lag * sim.fps))
    best_lag, best_corr = 0, None
    for lag in sorted(range(-window, window + 1), key=lambda k: (abs(k), -k)):
        if lag >= 0:
            n = min(a.size, b.size - lag)
            x, y = a[:n], b[lag:lag + n]
        else:
            n = min(a.size + lag, b.size)
            x, y = a[-lag:-lag + n], b[:n]
        if n < 2:
            continue
        x = x - x.mean()
        y = y - y.mean()
        denom = np.sqrt(np.dot(x, x) * np.dot(y, y))
        if denom <= 0:
            continue
        corr = np.dot(x, y) / denom
        if best_corr is None or corr > best_corr + 1e-12:
            best_lag, best_corr = lag, corr
    flags = []
    if best_corr is None:
        flags.append("flat_signal")
    elif window > 0 and abs(best_lag) == window:
        logger.warning("Alignment lag %d frames sits at the edge of the +/-%d frame window", best_lag, window)
        flags.append("lag_at_window_edge")
    sim_c, real_c, n = _crop(sim, real, best_lag)
    if n < min_overlap * sim.fps:
        raise InsufficientOverlapError("Overlap of {} frames is shorter than {:g} s".format(max(n, 0), min_overlap))
    return AlignedPair(sim_c, real_c, best_lag, n, tuple(flags))

def trim_transient(pair:AlignedPair, skip:float=5.0) -> AlignedPair:
    """
    Drop the first `skip` seconds of both trajectories

    Raises InsufficientOverlapError if nothing would remain.
    """
    frames = int(round(skip * pair.sim.fps))
    if frames == 0:
        return pair
    if pair.overlap <= frames:
        raise InsufficientOverlapError("Overlap of {} frames does not exceed the {:g} s transient".format(pair.overlap, skip))
    return pair._replace(sim=pair.sim.crop(frames), real=pair.real.crop(frames), overlap=pair.overlap - frames)

def mae_centerline(pair:AlignedPair) -> float:
    """Mean Euclidean distance over all frames and points"""
    if pair.sim.points.shape != pair.real.points.shape:
        raise MetricMismatchError("Shapes differ: {} vs {}".format(pair.sim.points.shape, pair.real.points.shape))
    return float(np.mean(np.linalg.norm(pair.sim.points - pair.real.points, axis=2)))

def mae_tip(pair:AlignedPair) -> float:
    """Mean Euclidean tip distance. Both trajectories must carry exactly one point per frame"""
    if pair.sim.n_points != 1 or pair.real.n_points != 1:
        raise MetricMismatchError("Tip metric needs 1 point per frame, got {} and {}".format(pair.sim.n_points, pair.real.n_points))
    return mae_centerline(pair)

def normalize_frame(points, target_length:float) -> Optional[np.ndarray]:
    """Scale one frame about its first (base) point to the given arc length. None if the frame has zero length"""
    points = np.asarray(points, dtype=float)
    length = arc_length(points)
    if not length > 0:
        return None
    return points[0] + (points - points[0]) * (target_length / length)

def arclength_normalize(traj:Trajectory, target_length:float) -> Trajectory:
    """
    Rescale every frame about its base point so its arc length equals `target_length`

    Zero-length frames are treated as missing and interpolated from their neighbours.
    """
    if traj.n_points < 2:
        raise MetricMismatchError("Arc-length normalization needs at least 2 points per frame")
    return traj.with_points(interpolate_missing([normalize_frame(p, target_length) for p in traj.points]))

def median_arc_length(traj:Trajectory) -> float:
    """Median over frames of the per-frame arc length"""
    return float(np.median([arc_length(p) for p in traj.points]))

def compare(sim:Trajectory, real:Trajectory, metric:str="tip", max_lag:float=1.0, skip:float=5.0, normalize_arclength:bool=False, signal:str="mean_y") -> MetricsReport:
    """
    Align, trim and score a simulated trajectory against an observation

    With `normalize_arclength` both trajectories are rescaled to the median arc length of the observation first.

    Returns:
        (MetricsReport): Lag, MAE and sizes
    """
    if metric not in METRICS:
        raise ValueError("metric must be one of {}, got '{}'".format(METRICS, metric))
    if normalize_arclength:
        target = median_arc_length(real)
        sim, real = arclength_normalize(sim, target), arclength_normalize(real, target)
    pair = trim_transient(align(sim, real, max_lag, signal=signal), skip)
    mae = mae_tip(pair) if metric == "tip" else mae_centerline(pair)
    return MetricsReport(pair.lag_frames, mae, pair.overlap, pair.sim.n_points, pair.flags)
