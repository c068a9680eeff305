"""RGB detector: per-channel mean + k*std thresholds and a 2-of-3 vote."""
from dataclasses import dataclass

import numpy as np

from .imagecore import ColorSpace, require_space


@dataclass(frozen=True)
class RgbDetectorParams:
    k_rgb: float = 4.5

    def __post_init__(self):
        if not np.isfinite(self.k_rgb) or self.k_rgb < 0:
            raise ValueError(f"k_rgb must be finite and >= 0, got {self.k_rgb}")


def upper_tail(values, k):
    """Pixels strictly above ``mean + k * std`` (population std).

    A flat raster has no tail; checking the range first keeps rounding in
    the mean from selecting pixels of a constant image.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or values.max() == values.min():
        return np.zeros(values.shape, dtype=bool)
    return values > values.mean() + k * values.std()


def channel_threshold(chan, k):
    return upper_tail(chan, k)


def detect_rgb(img, params=None):
    params = params or RgbDetectorParams()
    require_space(img, ColorSpace.RGB)
    votes = sum(channel_threshold(img.plane(c), params.k_rgb).astype(np.uint8) for c in range(3))
    return votes >= 2
