import numpy as np

class MaskFrame:
    """
    Binary segmentation mask. Pixel (col, row) covers [col, col+1) x [row, row+1); its center is (col + 0.5, row + 0.5)
    """
    def __init__(self, bits):
        """
        Parameters:
            bits (array-like): 2D array, nonzero is foreground
        """
        bits = np.asarray(bits).astype(bool)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("A mask needs a non-empty 2D grid, got shape {}".format(bits.shape))
        self.bits = bits
        """Boolean (height, width) grid"""

    @classmethod
    def blank(cls, width:int, height:int) -> "MaskFrame":
        """All-background mask"""
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        """Foreground pixel count"""
        return int(np.count_nonzero(self.bits))

    def is_empty(self) -> bool:
        return not self.bits.any()

    def bbox(self):
        """
        Foreground bounding box

        Returns:
            (tuple): (x0, y0, width, height) in pixels, or None for an empty mask
        """
        rows = np.flatnonzero(self.bits.any(axis=1))
        cols = np.flatnonzero(self.bits.any(axis=0))
        if rows.size == 0:
            return None
        return int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1)

    def __eq__(self, other):
        if not isinstance(other, MaskFrame):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return "MaskFrame({}x{}, area={})".format(self.width, self.height, self.area)

class ColorFrame:
    """RGB camera frame, uint8 (height, width, 3)"""
    def __init__(self, rgb):
        rgb = np.asarray(rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] < 1 or rgb.shape[1] < 1:
            raise ValueError("A colour frame needs shape (height, width, 3), got {}".format(rgb.shape))
        self.rgb = np.ascontiguousarray(rgb, dtype=np.uint8)

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    def __repr__(self):
        return "ColorFrame({}x{})".format(self.width, self.height)
