from .Frames import MaskFrame, ColorFrame
from .Rasterize import rasterize_rod, capsule_area
from .Centerline import extract_centerline, extract_trajectory
from .Marker import track_marker, track_trajectory
from .Missing import interpolate_missing
from .MaskSequence import save_masks, load_masks
