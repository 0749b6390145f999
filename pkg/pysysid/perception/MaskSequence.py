import json
import os
import cv2
import numpy as np
from ..AtomicFile import atomic_write
from ..CalibError import ConfigError
from .Frames import MaskFrame

from typing import List, Sequence, Tuple

INDEX_FILE = "index.json"

def save_masks(masks:Sequence[MaskFrame], directory:str, fps:float) -> str:
    """
    Write masks as `frame_00000.pgm`, ... plus `index.json` with fps, dimensions and the frame list

    Returns:
        (str): Path of the index
    """
    if not masks:
        raise ValueError("Nothing to save")
    width, height = masks[0].width, masks[0].height
    os.makedirs(directory, exist_ok=True)
    names = []
    for i, mask in enumerate(masks):
        if (mask.width, mask.height) != (width, height):
            raise ValueError("Frame {} is {}x{}, expected {}x{}".format(i, mask.width, mask.height, width, height))
        name = "frame_{:05d}.pgm".format(i)
        if not cv2.imwrite(os.path.join(directory, name), mask.bits.astype(np.uint8) * 255):
            raise IOError("Could not write {}".format(name))
        names.append(name)
    index = os.path.join(directory, INDEX_FILE)
    atomic_write(index, json.dumps({"fps": float(fps), "width": width, "height": height, "frames": names}, indent=2))
    return index

def load_masks(directory:str) -> Tuple[List[MaskFrame], float]:
    """
    Read a mask sequence written by `save_masks` (or by an external segmenter using the same layout)

    Returns:
        (tuple): (masks, fps)
    """
    path = os.path.join(directory, INDEX_FILE)
    try:
        with open(path, "r") as f:
            index = json.load(f)
        fps, width, height, names = float(index["fps"]), int(index["width"]), int(index["height"]), index["frames"]
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise ConfigError("Bad mask index {}: {}".format(path, e), field="masks")
    masks = []
    for name in names:
        image = cv2.imread(os.path.join(directory, name), cv2.IMREAD_GRAYSCALE)
        if image is None:
            raise ConfigError("Mask frame {} is unreadable".format(name), field="masks")
        if image.shape != (height, width):
            raise ConfigError("Mask frame {} is {}x{}, index says {}x{}".format(name, image.shape[1], image.shape[0], width, height), field="masks")
        masks.append(MaskFrame(image > 127))
    return masks, fps
