import numpy as np
from ..Platforms import Platforms

class Camera:
    """
    Fixed orthographic camera looking at the plane of motion.

    World coordinates are metres with y up and the base at the origin. Pixel coordinates have y down.
    """
    def __init__(self, scale:float, origin, size):
        """
        Parameters:
            scale (float): Pixels per metre
            origin (tuple): Pixel position of the base
            size (tuple): Frame (width, height)
        """
        self.scale = float(scale)
        self.origin = (float(origin[0]), float(origin[1]))
        self.size = (int(size[0]), int(size[1]))

    def project(self, xy, space:str="px") -> np.ndarray:
        """
        Map world points (..., 2) to the given coordinate space

        `px` is the camera image; `mm` is the world plane in millimetres (sim2sim reporting)
        """
        xy = np.asarray(xy, dtype=float)
        if space == "mm":
            return xy * 1000.0
        out = np.empty_like(xy)
        out[..., 0] = self.origin[0] + self.scale * xy[..., 0]
        out[..., 1] = self.origin[1] - self.scale * xy[..., 1]
        return out

    def __repr__(self):
        return "Camera({:g} px/m, origin={}, size={})".format(self.scale, self.origin, self.size)

CAMERAS = {
    Platforms.FINGER: Camera(4000.0, (760.0, 540.0), Platforms.FRAME_SIZE[Platforms.FINGER]),
    Platforms.TENTACLE_AIR: Camera(2000.0, (320.0, 40.0), Platforms.FRAME_SIZE[Platforms.TENTACLE_AIR]),
    Platforms.TENTACLE_WATER: Camera(4000.0, (960.0, 100.0), Platforms.FRAME_SIZE[Platforms.TENTACLE_WATER]),
}
"""Camera per setting: 4 px/mm for the finger, the rod fills most of the tentacle frames"""
