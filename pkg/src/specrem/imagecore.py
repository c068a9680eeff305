"""Image containers, color conversion, window statistics and mask morphology.

Images are ``(height, width, 3)`` float64 arrays in [0, 1] wrapped in
:class:`RasterImage`, which records whether the planes are RGB or HSV.
Masks are plain ``(height, width)`` boolean arrays.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .errors import UsageError

_EIGHT = np.ones((3, 3), dtype=bool)


class ColorSpace(str, Enum):
    RGB = "RGB"
    HSV = "HSV"


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Three-plane raster of samples in [0, 1] tagged with its color space."""

    data: np.ndarray
    space: ColorSpace = ColorSpace.RGB

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3 or data.shape[0] < 1 or data.shape[1] < 1:
            raise UsageError(f"expected an (H, W, 3) array, got shape {data.shape}")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise UsageError("samples must lie in [0, 1]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "space", ColorSpace(self.space))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape[:2]

    def plane(self, index):
        return self.data[:, :, index]


@dataclass(frozen=True)
class ComponentRegion:
    """One 8-connected blob of a mask.

    ``pixels`` is an ``(n, 2)`` int array of (row, col) in row-major order,
    ``bbox`` is ``(top, left, height, width)``.
    """

    pixels: np.ndarray
    bbox: tuple
    centroid: tuple

    @classmethod
    def from_pixels(cls, pixels):
        pixels = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((pixels[:, 1], pixels[:, 0]))
        pixels = pixels[order]
        top, left = pixels.min(axis=0)
        bottom, right = pixels.max(axis=0)
        bbox = (int(top), int(left), int(bottom - top + 1), int(right - left + 1))
        centroid = tuple(float(v) for v in pixels.mean(axis=0))
        return cls(pixels=pixels, bbox=bbox, centroid=centroid)

    def __len__(self):
        return len(self.pixels)

    def to_mask(self, shape):
        out = np.zeros(shape, dtype=bool)
        out[self.pixels[:, 0], self.pixels[:, 1]] = True
        return out


def require_space(img, space):
    if not isinstance(img, RasterImage):
        raise UsageError("expected a RasterImage")
    if img.space is not space:
        raise UsageError(f"expected a {space.value} image, got {img.space.value}")


def rgb_to_hsv(img):
    """Hexcone RGB to HSV. Hue is scaled to [0, 1); achromatic pixels get H = S = 0."""
    require_space(img, ColorSpace.RGB)
    rgb = img.data
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=2)
    chroma = v - rgb.min(axis=2)
    s = np.divide(chroma, v, out=np.zeros_like(v), where=v > 0)

    h = np.zeros_like(v)
    safe = np.where(chroma > 0, chroma, 1.0)
    is_r = (chroma > 0) & (v == r)
    is_g = (chroma > 0) & (v == g) & ~is_r
    is_b = (chroma > 0) & ~is_r & ~is_g
    h[is_r] = np.mod((g - b)[is_r] / safe[is_r], 6.0)
    h[is_g] = (b - r)[is_g] / safe[is_g] + 2.0
    h[is_b] = (r - g)[is_b] / safe[is_b] + 4.0
    h /= 6.0
    h[h >= 1.0] = 0.0
    return RasterImage(np.stack([h, s, v], axis=2), ColorSpace.HSV)


def hsv_to_rgb(img):
    """Inverse of :func:`rgb_to_hsv`."""
    require_space(img, ColorSpace.HSV)
    h, s, v = img.data[..., 0], img.data[..., 1], img.data[..., 2]
    h6 = h * 6.0
    sector = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    r = np.choose(sector, choices_r)
    g = np.choose(sector, choices_g)
    b = np.choose(sector, choices_b)
    rgb = np.clip(np.stack([r, g, b], axis=2), 0.0, 1.0)
    return RasterImage(rgb, ColorSpace.RGB)


def local_variance(chan, window=3):
    """Population variance over a ``window`` x ``window`` neighborhood.

    Borders use edge replication. Deviations are taken relative to the
    center sample first, so a constant window yields exactly zero.
    """
    window = int(window)
    if window < 1 or window % 2 == 0:
        raise UsageError(f"window must be a positive odd integer, got {window}")
    chan = np.asarray(chan, dtype=np.float64)
    half = window // 2
    padded = np.pad(chan, half, mode="edge")
    patches = np.lib.stride_tricks.sliding_window_view(padded, (window, window))
    centered = patches - chan[:, :, None, None]
    return centered.var(axis=(2, 3))


def zscore_normalize(chan):
    """Zero mean, unit population std. A flat input maps to all zeros."""
    chan = np.asarray(chan, dtype=np.float64)
    if chan.size == 0 or chan.max() == chan.min():
        return np.zeros_like(chan)
    std = chan.std()
    if std == 0.0:
        return np.zeros_like(chan)
    return (chan - chan.mean()) / std


def minmax_normalize(chan):
    """Affine map of [min, max] onto [0, 1]. A flat input maps to all zeros."""
    chan = np.asarray(chan, dtype=np.float64)
    if chan.size == 0:
        return np.zeros_like(chan)
    lo, hi = chan.min(), chan.max()
    if hi == lo:
        return np.zeros_like(chan)
    return (chan - lo) / (hi - lo)


def connected_components(mask):
    """8-connected components ordered by the (top, left) corner of their bbox."""
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return []
    rows, cols = np.nonzero(labels)
    ids = labels[rows, cols]
    order = np.argsort(ids, kind="stable")
    rows, cols, ids = rows[order], cols[order], ids[order]
    splits = np.flatnonzero(np.diff(ids)) + 1
    comps = [
        ComponentRegion.from_pixels(np.stack([r, c], axis=1))
        for r, c in zip(np.split(rows, splits), np.split(cols, splits))
    ]
    comps.sort(key=lambda comp: (comp.bbox[0], comp.bbox[1], comp.centroid))
    return comps


def dilate(mask, radius=1):
    """Dilation with the 3x3 square, ``radius`` times, clipped at the borders."""
    mask = np.asarray(mask, dtype=bool)
    if radius < 1 or not mask.any():
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=_EIGHT, iterations=radius)
