"""8-bit PNG / binary PPM reading and writing for frames and masks."""
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError, UsageError
from .imagecore import ColorSpace, RasterImage


def to_uint8(values):
    return np.clip(np.rint(np.asarray(values) * 255.0), 0, 255).astype(np.uint8)


def read_image(path):
    """Read an RGB frame (PNG or P6 PPM); samples become ``v / 255``."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: cannot decode image ({exc})") from exc
    return RasterImage(arr / 255.0, ColorSpace.RGB)


def write_image(img, path):
    """Write an RGB raster; the format follows the suffix (``.png`` or ``.ppm``)."""
    if isinstance(img, RasterImage):
        if img.space is not ColorSpace.RGB:
            raise UsageError("only RGB rasters can be written")
        img = img.data
    path = Path(path)
    fmt = "PPM" if path.suffix.lower() in (".ppm", ".pnm") else "PNG"
    Image.fromarray(to_uint8(img)).save(path, format=fmt)


def read_mask(path):
    """Read a grayscale mask; any value >= 128 is set."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"))
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: cannot decode mask ({exc})") from exc
    return arr >= 128


def write_mask(mask, path):
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr).save(Path(path), format="PNG")
