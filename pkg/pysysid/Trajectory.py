import csv
import io
import json
import os
import numpy as np
from .AtomicFile import atomic_write
from .CalibError import MetricMismatchError

from typing import Dict

SPACES = ("px", "mm")

class Trajectory:
    """
    Time-indexed 2D point sets: 1 point per frame for tip tracking, 10 for centerlines.

    Frames are stored as a `(T, N, 2)` float array. Frame `k` is at time `k / fps`.
    """
    def __init__(self, points, fps:float, space:str="px", metadata:Dict=None):
        """
        Parameters:
            points (array-like): Shape `(T, N, 2)`
            fps (float): Frame rate in Hz (> 0)
            space (str): Coordinate space, `px` or `mm`
            metadata (dict): Free-form generation details (parameters, control, ...)
        """
        points = np.array(points, dtype=float)
        if points.ndim != 3 or points.shape[2] != 2:
            raise ValueError("Trajectory points need shape (T, N, 2), got {}".format(points.shape))
        if not fps > 0:
            raise ValueError("fps must be > 0, got {}".format(fps))
        if space not in SPACES:
            raise ValueError("space must be one of {}, got '{}'".format(SPACES, space))
        self.points = points
        """Frames as a (T, N, 2) array"""
        self.fps = float(fps)
        """Frame rate in Hz"""
        self.space = space
        """Coordinate space tag"""
        self.metadata = dict(metadata or {})
        """Generation details, written to the JSON sidecar"""

    @property
    def n_frames(self) -> int:
        return self.points.shape[0]

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    @property
    def duration(self) -> float:
        """n_frames / fps"""
        return self.n_frames / self.fps

    @property
    def times(self) -> np.ndarray:
        """Frame times in seconds"""
        return np.arange(self.n_frames) / self.fps

    def __len__(self):
        return self.n_frames

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.fps == other.fps and self.space == other.space and np.array_equal(self.points, other.points)

    def __repr__(self):
        return "Trajectory({} frames x {} points @ {:g} fps, {})".format(self.n_frames, self.n_points, self.fps, self.space)

    def crop(self, start:int, stop:int=None) -> "Trajectory":
        """Frames [start, stop) as a new trajectory"""
        return Trajectory(self.points[start:stop], self.fps, self.space, self.metadata)

    def with_points(self, points) -> "Trajectory":
        """Same fps, space and metadata, different points"""
        return Trajectory(points, self.fps, self.space, self.metadata)

    def resample(self, fps:float) -> "Trajectory":
        """
        Linearly interpolate to another frame rate (e.g. 120 fps captures onto the 25 fps simulation grid)
        """
        if fps == self.fps:
            return self
        n = int(round(self.duration * fps))
        t_new = np.arange(n) / fps
        flat = self.points.reshape(self.n_frames, -1)
        out = np.stack([np.interp(t_new, self.times, flat[:, j]) for j in range(flat.shape[1])], axis=1)
        return Trajectory(out.reshape(n, self.n_points, 2), fps, self.space, self.metadata)

    def to_csv(self) -> str:
        """CSV text: header `frame,point,x,y`, one row per (frame, point)"""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["frame", "point", "x", "y"])
        for t in range(self.n_frames):
            for i in range(self.n_points):
                writer.writerow([t, i, repr(float(self.points[t, i, 0])), repr(float(self.points[t, i, 1]))])
        return buf.getvalue()

    def save(self, path:str) -> str:
        """
        Write `path` (CSV) and its JSON sidecar `path` with `.json` in place of the extension

        Returns:
            (str): Path of the sidecar
        """
        sidecar = sidecar_path(path)
        atomic_write(path, self.to_csv())
        atomic_write(sidecar, json.dumps({
            "fps": self.fps,
            "space": self.space,
            "frames": self.n_frames,
            "points": self.n_points,
            "metadata": self.metadata,
        }, indent=2, sort_keys=True, default=float))
        return sidecar

    @classmethod
    def load(cls, path:str, fps:float=None, space:str=None) -> "Trajectory":
        """
        Read a trajectory CSV. fps and space come from the sidecar unless given

        This is also the import path for externally captured trajectories.
        """
        sidecar = sidecar_path(path)
        meta = {}
        if os.path.exists(sidecar):
            with open(sidecar, "r") as f:
                meta = json.load(f)
        fps = fps if fps is not None else meta.get("fps")
        if fps is None:
            raise ValueError("No fps for {} (no sidecar and none given)".format(path))
        rows = []
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)
            missing = {"frame", "point", "x", "y"} - set(reader.fieldnames or [])
            if missing:
                raise ValueError("{} lacks columns {}".format(path, sorted(missing)))
            for row in reader:
                rows.append((int(row["frame"]), int(row["point"]), float(row["x"]), float(row["y"])))
        if not rows:
            return cls(np.zeros((0, 1, 2)), fps, space or meta.get("space", "px"), meta.get("metadata"))
        n_frames = max(r[0] for r in rows) + 1
        n_points = max(r[1] for r in rows) + 1
        if len(rows) != n_frames * n_points:
            raise MetricMismatchError("{}: frames do not all have {} points".format(path, n_points))
        points = np.full((n_frames, n_points, 2), np.nan)
        for t, i, x, y in rows:
            points[t, i] = (x, y)
        if np.isnan(points).any():
            raise MetricMismatchError("{}: some (frame, point) rows are missing".format(path))
        return cls(points, fps, space or meta.get("space", "px"), meta.get("metadata"))

def sidecar_path(path:str) -> str:
    """JSON sidecar path of a trajectory CSV"""
    return os.path.splitext(path)[0] + ".json"

def resample_polyline(points, n:int) -> np.ndarray:
    """
    `n` points evenly spaced in arc length along a polyline, endpoints included

    Parameters:
        points (array-like): Polyline vertices `(M, 2)`
        n (int): Number of output points

    Returns:
        (np.ndarray): `(n, 2)`
    """
    points = np.asarray(points, dtype=float)
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    targets = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(targets, s, points[:, 0]), np.interp(targets, s, points[:, 1])], axis=1)

def arc_length(points) -> float:
    """Total length of a polyline"""
    return float(np.sum(np.linalg.norm(np.diff(np.asarray(points, dtype=float), axis=0), axis=1)))
