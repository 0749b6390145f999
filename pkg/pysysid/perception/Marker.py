import logging
import cv2
import numpy as np
from ..Trajectory import Trajectory
from .Frames import ColorFrame
from .Missing import interpolate_missing

from typing import Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

def _threshold(hsv:np.ndarray, lower, upper) -> np.ndarray:
    lower = np.array(lower, dtype=np.uint8)
    upper = np.array(upper, dtype=np.uint8)
    if lower[0] <= upper[0]:
        return cv2.inRange(hsv, lower, upper)
    # Hue wraps around (e.g. red: 170..10)
    high = cv2.inRange(hsv, lower, np.array([179, upper[1], upper[2]], dtype=np.uint8))
    low = cv2.inRange(hsv, np.array([0, lower[1], lower[2]], dtype=np.uint8), upper)
    return cv2.bitwise_or(high, low)

def track_marker(frame:ColorFrame, hsv_range:Tuple[Sequence[int], Sequence[int]], roi:Tuple[int, int, int, int]=None) -> Optional[Tuple[float, float]]:
    """
    Centroid of the largest marker-coloured blob

    Parameters:
        frame (ColorFrame): RGB frame
        hsv_range (tuple): (lower, upper) HSV bounds in OpenCV units (H 0-179, S and V 0-255). lower H > upper H wraps
        roi (tuple): (x, y, width, height) search window, default the whole frame

    Returns:
        (tuple): (x, y) in full-frame pixel coordinates (pixel centers at +0.5), or None if nothing matches
    """
    x0, y0, w, h = roi if roi is not None else (0, 0, frame.width, frame.height)
    if x0 < 0 or y0 < 0 or w < 1 or h < 1 or x0 + w > frame.width or y0 + h > frame.height:
        raise ValueError("ROI {} is not inside the {}x{} frame".format(roi, frame.width, frame.height))
    crop = frame.rgb[y0:y0 + h, x0:x0 + w]
    hsv = cv2.cvtColor(np.ascontiguousarray(crop), cv2.COLOR_RGB2HSV)
    mask = _threshold(hsv, hsv_range[0], hsv_range[1])
    n, _, stats, centroids = cv2.connectedComponentsWithStats(mask, connectivity=8)
    if n <= 1:
        return None
    largest = 1 + int(np.argmax(stats[1:, cv2.CC_STAT_AREA]))
    cx, cy = centroids[largest]
    return float(cx) + 0.5 + x0, float(cy) + 0.5 + y0

def track_trajectory(frames:Sequence[ColorFrame], fps:float, hsv_range, roi=None) -> Trajectory:
    """Tip trajectory (1 point per frame) of a colour frame sequence, missing frames interpolated"""
    points = [track_marker(f, hsv_range, roi) for f in frames]
    missing = sum(p is None for p in points)
    if missing:
        logger.info("Marker not found in %d of %d frames; interpolated", missing, len(points))
    return Trajectory(interpolate_missing([None if p is None else np.array(p) for p in points]), fps, "px", {"source": "marker", "missing_frames": missing})
