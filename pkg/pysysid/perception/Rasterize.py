import logging
import math
import numpy as np
from ..CalibError import DegenerateGeometryError
from .Frames import MaskFrame

from typing import Tuple

logger = logging.getLogger(__name__)

def rasterize_rod(points, thickness:float, size:Tuple[int, int]) -> MaskFrame:
    """
    Draw a thick polyline: every pixel whose center lies within thickness / 2 of the polyline is foreground

    Parameters:
        points (array-like): Centerline `(M, 2)` in pixels, M >= 2
        thickness (float): Body width in pixels (>= 2)
        size (tuple): Frame (width, height)

    Returns:
        (MaskFrame): The mask. Parts outside the frame are clipped
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 2:
        raise DegenerateGeometryError("A rod needs at least 2 points, got shape {}".format(points.shape))
    if thickness < 2:
        raise ValueError("thickness must be >= 2 px, got {}".format(thickness))
    width, height = int(size[0]), int(size[1])
    seg = np.diff(points, axis=0)
    seg_len2 = np.sum(seg * seg, axis=1)
    if not np.any(seg_len2 > 0):
        raise DegenerateGeometryError("Polyline has zero length")

    radius = thickness / 2.0
    if np.any(points - radius < 0) or np.any(points[:, 0] + radius > width) or np.any(points[:, 1] + radius > height):
        logger.warning("Rod extends outside the %dx%d frame; clipped", width, height)

    bits = np.zeros((height, width), dtype=bool)
    r2 = radius * radius
    for a, d, l2 in zip(points[:-1], seg, seg_len2):
        lo = np.floor(np.minimum(a, a + d) - radius).astype(int)
        hi = np.ceil(np.maximum(a, a + d) + radius).astype(int)
        c0, r0 = max(lo[0], 0), max(lo[1], 0)
        c1, r1 = min(hi[0] + 1, width), min(hi[1] + 1, height)
        if c0 >= c1 or r0 >= r1:
            continue
        cx = np.arange(c0, c1) + 0.5
        cy = np.arange(r0, r1) + 0.5
        px = cx[None, :] - a[0]
        py = cy[:, None] - a[1]
        t = np.clip((px * d[0] + py * d[1]) / l2, 0.0, 1.0) if l2 > 0 else 0.0
        dx = px - t * d[0]
        dy = py - t * d[1]
        bits[r0:r1, c0:c1] |= dx * dx + dy * dy <= r2
    return MaskFrame(bits)

def capsule_area(length:float, thickness:float) -> float:
    """Area of a straight rod drawn by `rasterize_rod`: L w + pi (w/2)^2"""
    return length * thickness + math.pi * (thickness / 2.0) ** 2
