"""Reflection removal by neighbor-patch substitution and stochastic edge smoothing.

Each connected component of the mask is replaced by the content of one of
four bbox-sized rectangles directly above, below, left or right of it. The
rectangle minimizing ``d_mean * d_std * dist * (1 - ncc)`` wins, where the
statistics are compared against the ring of clean pixels around the hole.
Seams are then hidden by resampling growing rings of pixels from a normal
distribution fitted to their 3x3 neighborhood.
"""
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage

from .imagecore import ColorSpace, RasterImage, connected_components, dilate, require_space

DEFAULT_COEFFICIENTS = (0.71, 0.99, 1.2, 0.66, 0.66, 0.66, 0.66, 0.74)


class Direction(str, Enum):
    ABOVE = "above"
    BELOW = "below"
    LEFT = "left"
    RIGHT = "right"


DIRECTIONS = (Direction.ABOVE, Direction.BELOW, Direction.LEFT, Direction.RIGHT)


@dataclass(frozen=True)
class SmoothingSchedule:
    coefficients: tuple = DEFAULT_COEFFICIENTS
    seed: int = 0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("smoothing schedule needs at least one coefficient")
        if any(not math.isfinite(c) or c < 0 for c in coeffs):
            raise ValueError("smoothing coefficients must be finite and nonnegative")
        object.__setattr__(self, "coefficients", coeffs)

    def __len__(self):
        return len(self.coefficients)


@dataclass
class PatchCandidate:
    direction: Direction
    rect: tuple  # (top, left, height, width)
    mean: np.ndarray
    std: np.ndarray
    nc: float = 0.0
    distance: float = 0.0
    delta_mean: float = 0.0
    delta_std: float = 0.0
    cost: float = field(default=math.inf)

    @property
    def center(self):
        top, left, h, w = self.rect
        return (top + (h - 1) / 2.0, left + (w - 1) / 2.0)


def _data(img):
    require_space(img, ColorSpace.RGB)
    return img.data


def ring_pixels(component, mask):
    """Unmasked in-image pixels 8-adjacent to the component, row-major.

    An empty result means the component has no clean neighbor at all.
    """
    mask = np.asarray(mask, dtype=bool)
    ring = dilate(component.to_mask(mask.shape)) & ~mask
    return np.argwhere(ring)


def clockwise(pixels, center):
    """Order pixels clockwise around ``center``, starting from the upper-left."""
    pixels = np.asarray(pixels).reshape(-1, 2)
    dr = pixels[:, 0] - center[0]
    dc = pixels[:, 1] - center[1]
    # rows grow downward, so increasing atan2(dr, dc) sweeps clockwise on screen
    angle = np.mod(np.arctan2(dr, dc) + 0.75 * np.pi, 2.0 * np.pi)
    order = np.lexsort((pixels[:, 1], pixels[:, 0], np.hypot(dr, dc), np.round(angle, 12)))
    return pixels[order]


def rect_border(rect):
    top, left, h, w = rect
    rows, cols = np.mgrid[top:top + h, left:left + w]
    edge = (rows == top) | (rows == top + h - 1) | (cols == left) | (cols == left + w - 1)
    return np.stack([rows[edge], cols[edge]], axis=1)


def _resample(seq, length):
    """Linear resampling of a closed (n, channels) sequence to ``length`` samples."""
    n = len(seq)
    if n == length:
        return seq
    closed = np.vstack([seq, seq[:1]])
    pos = np.arange(length) * (n / length)
    grid = np.arange(n + 1)
    return np.stack([np.interp(pos, grid, closed[:, ch]) for ch in range(seq.shape[1])], axis=1)


def border_ncc(a, b):
    """Channel-averaged normalized cross-correlation of two pixel sequences.

    Both are resampled to the longer length. A constant channel in either
    sequence contributes 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        return 0.0
    length = max(len(a), len(b))
    a = _resample(a, length)
    b = _resample(b, length)
    total = 0.0
    for ch in range(a.shape[1]):
        x, y = a[:, ch], b[:, ch]
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        x = x - x.mean()
        y = y - y.mean()
        den = math.sqrt(float(x @ x) * float(y @ y))
        if den > 0:
            total += float(x @ y) / den
    return float(np.clip(total / a.shape[1], -1.0, 1.0))


def patch_cost(candidate, ring_mean, ring_std, hole_centroid, image_diagonal):
    """Fill the candidate's cost terms in place and return the cost."""
    candidate.delta_mean = float(np.mean(np.abs(candidate.mean - np.asarray(ring_mean))))
    candidate.delta_std = float(np.mean(np.abs(candidate.std - np.asarray(ring_std))))
    cr, cc = candidate.center
    candidate.distance = math.hypot(cr - hole_centroid[0], cc - hole_centroid[1]) / image_diagonal
    candidate.cost = candidate.delta_mean * candidate.delta_std * candidate.distance * (1.0 - candidate.nc)
    return candidate.cost


def _placements(bbox):
    top, left, h, w = bbox
    return {
        Direction.ABOVE: (top - h, left, h, w),
        Direction.BELOW: (top + h, left, h, w),
        Direction.LEFT: (top, left - w, h, w),
        Direction.RIGHT: (top, left + w, h, w),
    }


def _reference(data, mask, ring):
    """Ring statistics, or unmasked-image statistics when the ring is empty."""
    if len(ring):
        values = data[ring[:, 0], ring[:, 1]]
    else:
        values = data[~mask] if (~mask).any() else data.reshape(-1, 3)
    return values.mean(axis=0), values.std(axis=0)


def _candidates(data, mask, component, ring):
    height, width = mask.shape
    ring_mean, ring_std = _reference(data, mask, ring)
    ring_seq = data[tuple(clockwise(ring, component.centroid).T)] if len(ring) else np.empty((0, 3))
    diagonal = math.hypot(height, width)

    out = []
    placements = _placements(component.bbox)
    for direction in DIRECTIONS:
        top, left, h, w = rect = placements[direction]
        if top < 0 or left < 0 or top + h > height or left + w > width:
            continue
        if mask[top:top + h, left:left + w].any():
            continue
        block = data[top:top + h, left:left + w].reshape(-1, 3)
        cand = PatchCandidate(direction, rect, block.mean(axis=0), block.std(axis=0))
        border = clockwise(rect_border(rect), cand.center)
        cand.nc = border_ncc(data[tuple(border.T)], ring_seq)
        patch_cost(cand, ring_mean, ring_std, component.centroid, diagonal)
        out.append(cand)
    return out


def candidate_patches(component, img, mask):
    """Valid neighbor rectangles of the component with their cost terms, in
    Above, Below, Left, Right order. Rectangles leaving the image or touching
    any masked pixel are dropped."""
    mask = np.asarray(mask, dtype=bool)
    return _candidates(_data(img), mask, component, ring_pixels(component, mask))


def _best(candidates):
    best = None
    for cand in candidates:
        if best is None or cand.cost < best.cost:
            best = cand
    return best


def _inpaint_component(data, mask, component):
    out = data.copy()
    rows, cols = component.pixels[:, 0], component.pixels[:, 1]
    ring = ring_pixels(component, mask)
    best = _best(_candidates(data, mask, component, ring))
    if best is not None:
        top, left = component.bbox[:2]
        out[rows, cols] = data[rows - top + best.rect[0], cols - left + best.rect[1]]
    elif len(ring):
        out[rows, cols] = data[ring[:, 0], ring[:, 1]].mean(axis=0)
    else:
        warnings.warn(
            f"component at {component.bbox} has no clean neighbors; filling with the image mean",
            RuntimeWarning,
            stacklevel=3,
        )
        out[rows, cols] = data.reshape(-1, 3).mean(axis=0)
    return out


def inpaint_component(img, mask, component):
    """Overwrite the component's pixels from the cheapest neighbor patch.

    Without a valid candidate the pixels take the ring mean per channel.
    """
    return RasterImage(_inpaint_component(_data(img), np.asarray(mask, dtype=bool), component))


def smoothing_rings(component, mask, count):
    """Pixel bands resampled by each smoothing iteration.

    The first band is two pixels wide: the component's outer layer plus its
    clean exterior neighbors. Every later band is the one-pixel dilation of
    the previous one, so seam pixels are revisited while the band widens.
    """
    mask = np.asarray(mask, dtype=bool)
    comp = component.to_mask(mask.shape)
    layer = comp & ~ndimage.binary_erosion(comp, structure=np.ones((3, 3)), border_value=1)
    bands = [layer | (dilate(comp) & ~mask)]
    for _ in range(count - 1):
        bands.append(dilate(bands[-1]))
    return bands


def _component_rng(seed, component):
    top, left = component.bbox[:2]
    return np.random.default_rng(np.random.SeedSequence([int(seed), top, left]))


def _neighborhood_stats(padded, pixels):
    """3x3 mean and population std per channel at each pixel (padded by one)."""
    offsets = np.array([(dr, dc) for dr in range(3) for dc in range(3)])
    rows = pixels[:, 0, None] + offsets[None, :, 0]
    cols = pixels[:, 1, None] + offsets[None, :, 1]
    patch = padded[rows, cols]  # (n, 9, 3)
    center = padded[pixels[:, 0] + 1, pixels[:, 1] + 1]
    # working on deviations from the center keeps a flat patch exactly flat
    dev = patch - center[:, None, :]
    return center + dev.mean(axis=1), dev.std(axis=1)


def _smooth_edges(data, mask, component, schedule):
    out = data.copy()
    rng = _component_rng(schedule.seed, component)
    for coeff, band in zip(schedule.coefficients, smoothing_rings(component, mask, len(schedule))):
        pixels = np.argwhere(band)
        if len(pixels) == 0:
            break
        padded = np.pad(out, ((1, 1), (1, 1), (0, 0)), mode="edge")
        mean, std = _neighborhood_stats(padded, pixels)
        # one normal variate per pixel, scaled per channel, keeps chroma intact
        draws = mean + coeff * std * rng.standard_normal((len(mean), 1))
        out[pixels[:, 0], pixels[:, 1]] = np.clip(draws, 0.0, 1.0)
    return out


def smooth_edges(img, mask, component, schedule=None):
    """Resample the bands around an inpainted component.

    Iteration ``i`` replaces every pixel of band ``i`` by ``m + c_i * s * z``
    with ``z ~ Normal(0, 1)`` drawn once per pixel, where ``m`` and ``s`` are
    the per-channel 3x3 mean and std of the image as it stood when the
    iteration began. Results are clamped to [0, 1].
    """
    schedule = schedule or SmoothingSchedule()
    return RasterImage(_smooth_edges(_data(img), np.asarray(mask, dtype=bool), component, schedule))


def inpaint_all(img, mask, schedule=None):
    """Inpaint and smooth every component in bbox order.

    Components run one after another; each one's random stream is derived
    from the schedule seed and its bbox corner, so results do not depend on
    which other components are present.
    """
    schedule = schedule or SmoothingSchedule()
    data = _data(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape:
        raise ValueError(f"mask {mask.shape} does not match image {img.shape}")
    comps = connected_components(mask)
    if not comps:
        return img
    out = data.copy()
    for comp in comps:
        out = _inpaint_component(out, mask, comp)
        out = _smooth_edges(out, mask, comp, schedule)
    return RasterImage(out)
