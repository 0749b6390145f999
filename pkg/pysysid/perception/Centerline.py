import logging
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from skimage.morphology import skeletonize
from ..CalibError import DegenerateGeometryError
from ..Trajectory import Trajectory, arc_length, resample_polyline
from .Frames import MaskFrame
from .Missing import interpolate_missing

from typing import List, Optional, Sequence

logger = logging.getLogger(__name__)

BASE_EDGES = ("left", "right", "top", "bottom")

NEIGHBOURS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]

SMOOTHING = 5
"""Moving-average window (skeleton pixels) applied along the path"""

def _longest_path(skeleton:np.ndarray) -> np.ndarray:
    """Pixels (row, col) of the longest geodesic path in the largest 8-connected skeleton component"""
    rows, cols = np.nonzero(skeleton)
    index = -np.ones(skeleton.shape, dtype=int)
    index[rows, cols] = np.arange(rows.size)
    src, dst, weight = [], [], []
    h, w = skeleton.shape
    for dr, dc in NEIGHBOURS:
        r, c = rows + dr, cols + dc
        ok = (r >= 0) & (r < h) & (c >= 0) & (c < w)
        j = np.full(rows.size, -1)
        j[ok] = index[r[ok], c[ok]]
        keep = j >= 0
        src.append(np.flatnonzero(keep))
        dst.append(j[keep])
        weight.append(np.full(keep.sum(), np.hypot(dr, dc)))
    graph = coo_matrix((np.concatenate(weight), (np.concatenate(src), np.concatenate(dst))), shape=(rows.size, rows.size)).tocsr()

    _, labels = connected_components(graph, directed=False)
    largest = np.argmax(np.bincount(labels))
    start = int(np.flatnonzero(labels == largest)[0])
    dist = dijkstra(graph, directed=False, indices=start)
    a = int(np.argmax(np.where(np.isfinite(dist), dist, -1)))
    dist, pred = dijkstra(graph, directed=False, indices=a, return_predecessors=True)
    b = int(np.argmax(np.where(np.isfinite(dist), dist, -1)))
    path = [b]
    while path[-1] != a:
        path.append(int(pred[path[-1]]))
    path = np.array(path[::-1])
    return np.stack([rows[path], cols[path]], axis=1)

def _trim_caps(path:np.ndarray, distance:np.ndarray) -> np.ndarray:
    """Drop the path ends that run into the rounded/square caps, where the body is thinner than along the middle"""
    radius = distance[path[:, 0], path[:, 1]]
    keep = np.flatnonzero(radius >= np.median(radius) - 0.5)
    if keep.size < 2:
        return path
    return path[keep[0]:keep[-1] + 1]

def _orient(points:np.ndarray, base_edge:str) -> np.ndarray:
    first, last = points[0], points[-1]
    if base_edge == "left":
        flip = last[0] < first[0]
    elif base_edge == "right":
        flip = last[0] > first[0]
    elif base_edge == "top":
        flip = last[1] < first[1]
    else:
        flip = last[1] > first[1]
    return points[::-1] if flip else points

def extract_centerline(mask:MaskFrame, n_points:int=10, base_edge:str="top") -> Optional[np.ndarray]:
    """
    Ordered centerline of the foreground, base to tip

    The mask is thinned to a one pixel skeleton, the longest skeleton path is kept, the ends running into the
    caps are trimmed, the path is smoothed and resampled at `n_points` equal arc-length steps.

    Parameters:
        mask (MaskFrame): Segmentation mask
        n_points (int): Output point count
        base_edge (str): Frame edge the body is mounted on (`left`, `right`, `top`, `bottom`). Point 0 is the end nearest to it

    Returns:
        (np.ndarray): `(n_points, 2)` pixel coordinates, or None for an empty mask (missing frame)
    """
    if base_edge not in BASE_EDGES:
        raise ValueError("base_edge must be one of {}, got '{}'".format(BASE_EDGES, base_edge))
    if mask.is_empty():
        return None
    skeleton = skeletonize(mask.bits)
    if np.count_nonzero(skeleton) < 3:
        raise DegenerateGeometryError("Skeleton has {} pixels; need at least 3".format(np.count_nonzero(skeleton)))
    path = _longest_path(skeleton)
    path = _trim_caps(path, ndimage.distance_transform_edt(mask.bits))
    points = np.stack([path[:, 1] + 0.5, path[:, 0] + 0.5], axis=1)
    if len(points) > SMOOTHING:
        smooth = ndimage.uniform_filter1d(points, SMOOTHING, axis=0, mode="nearest")
        smooth[0], smooth[-1] = points[0], points[-1]
        points = smooth
    if arc_length(points) <= 0:
        raise DegenerateGeometryError("Skeleton path has zero length")
    return _orient(resample_polyline(points, n_points), base_edge)

def extract_trajectory(masks:Sequence[MaskFrame], fps:float, n_points:int=10, base_edge:str="top", workers:int=1) -> Trajectory:
    """
    Centerlines of a mask sequence with missing frames repaired

    Parameters:
        masks (list[MaskFrame]): Frames in order
        fps (float): Frame rate
        n_points (int): Points per frame
        base_edge (str): Mounting edge
        workers (int): Threads for per-frame extraction (results keep frame order)
    """
    def one(mask):
        return extract_centerline(mask, n_points, base_edge)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(one, masks))
    else:
        frames = [one(m) for m in masks]
    missing = sum(f is None for f in frames)
    if missing:
        logger.info("%d of %d frames had no foreground; interpolated", missing, len(frames))
    return Trajectory(interpolate_missing(frames), fps, "px", {"source": "masks", "missing_frames": missing})
