"""HSV detector.

The per-pixel score is ``hue_term + saturation_term * value_term``:

* hue_term: 3x3 local variance of H, min-max normalized per image;
* saturation_term: ramp(zscore(-S) + 1), large where color is washed out;
* value_term: ramp(zscore(V) + 1), large where the pixel is bright.

Reflections are the upper tail of that score, cut either at
``mean + k * std`` or by keeping a fixed fraction of the brightest scores.
"""
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .detect_rgb import upper_tail
from .imagecore import (
    ColorSpace,
    local_variance,
    minmax_normalize,
    require_space,
    rgb_to_hsv,
    zscore_normalize,
)


class ThresholdMode(str, Enum):
    FIXED_K = "fixedk"
    PERCENTILE = "percentile"


@dataclass(frozen=True)
class HsvDetectorParams:
    k: float = 4.5
    mode: ThresholdMode = ThresholdMode.FIXED_K
    pixel_fraction: float = 0.006

    def __post_init__(self):
        object.__setattr__(self, "mode", ThresholdMode(self.mode))
        if not math.isfinite(self.k):
            raise ValueError(f"k must be finite, got {self.k}")
        if not 0.0 < self.pixel_fraction < 1.0:
            raise ValueError(f"pixel_fraction must lie in (0, 1), got {self.pixel_fraction}")


def hue_term(hue):
    return minmax_normalize(local_variance(hue, 3))


def saturation_term(sat):
    return np.maximum(0.0, zscore_normalize(-np.asarray(sat, dtype=np.float64)) + 1.0)


def value_term(val):
    return np.maximum(0.0, zscore_normalize(val) + 1.0)


def cost_map(img):
    """Score raster of an HSV image, same height and width as the input."""
    require_space(img, ColorSpace.HSV)
    return hue_term(img.plane(0)) + saturation_term(img.plane(1)) * value_term(img.plane(2))


def top_fraction(values, fraction):
    """Mask of the ``floor(fraction * N)`` largest values.

    Ties go to the lower row-major index so the result is a function of the
    input alone.
    """
    values = np.asarray(values, dtype=np.float64)
    # 1e-9 absorbs products such as 0.29 * 100 == 28.999999999999996
    count = math.floor(fraction * values.size + 1e-9)
    out = np.zeros(values.size, dtype=bool)
    if count < 1:
        warnings.warn(
            f"pixel fraction {fraction} of {values.size} pixels selects nothing",
            RuntimeWarning,
            stacklevel=2,
        )
        return out.reshape(values.shape)
    order = np.argsort(-values.ravel(), kind="stable")
    out[order[:count]] = True
    return out.reshape(values.shape)


def threshold_cost(cost, params=None):
    params = params or HsvDetectorParams()
    if params.mode is ThresholdMode.PERCENTILE:
        return top_fraction(cost, params.pixel_fraction)
    return upper_tail(cost, params.k)


def detect_hsv(img, params=None):
    require_space(img, ColorSpace.RGB)
    return threshold_cost(cost_map(rgb_to_hsv(img)), params)
