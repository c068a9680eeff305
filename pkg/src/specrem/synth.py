"""Synthetic frames with exact reflection ground truth.

The tissue is a reddish albedo (hue between red and orange, so G > B and
hue never wraps around 0) under smooth low-frequency shading, plus a gray
veil from scattered light, so dim regions also look washed out. Half the
frames get a dark lumen. Mild sensor noise is added before the reflections.

Reflections are bright, nearly colorless disks. Disk cores are the ground
truth; a one-pixel rim blends partially toward the disk color.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fileio import to_uint8, write_image, write_mask
from .imagecore import ColorSpace, RasterImage, hsv_to_rgb


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 160
    height: int = 128
    blob_count: tuple = (0, 5)
    blob_radius: tuple = (2.0, 6.0)
    brightness: tuple = (0.82, 1.0)
    saturation: tuple = (0.0, 0.12)
    edge_weight: float = 0.15
    noise: float = 0.01
    lumen_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.blob_count
        if self.width < 8 or self.height < 8:
            raise ValueError("frames must be at least 8x8")
        if not 0 <= lo <= hi:
            raise ValueError(f"bad blob count range {self.blob_count}")
        if not 0 < self.blob_radius[0] <= self.blob_radius[1]:
            raise ValueError(f"bad blob radius range {self.blob_radius}")
        if 2 * (self.blob_radius[1] + 1) >= min(self.width, self.height):
            raise ValueError("blobs do not fit in the frame")
        if not 0.8 < self.brightness[0] <= self.brightness[1] <= 1.0:
            raise ValueError("blob brightness must lie in (0.8, 1]")
        if not 0.0 <= self.saturation[0] <= self.saturation[1] < 0.15:
            raise ValueError("blob saturation must lie in [0, 0.15)")
        if not 0.0 <= self.edge_weight < 1.0:
            raise ValueError("edge weight must lie in [0, 1)")


@dataclass(frozen=True)
class Blob:
    row: float
    col: float
    radius: float
    color: tuple


@dataclass
class SyntheticFrame:
    name: str
    image: RasterImage
    gt: np.ndarray
    blobs: list = field(default_factory=list)


def _smooth_field(rng, rows, cols, height, width, terms=3):
    """Sum of a few long-wavelength plane waves, scaled to [-1, 1]."""
    total = np.zeros((height, width))
    for _ in range(terms):
        angle = rng.uniform(0, 2 * np.pi)
        wavelength = rng.uniform(0.75, 2.0) * max(height, width)
        phase = rng.uniform(0, 2 * np.pi)
        proj = rows * np.sin(angle) + cols * np.cos(angle)
        total += np.cos(2 * np.pi * proj / wavelength + phase)
    return total / terms


def background(rng, spec):
    height, width = spec.height, spec.width
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)

    def wave():
        return _smooth_field(rng, rows, cols, height, width)

    hue = np.clip(rng.uniform(0.01, 0.07) + 0.008 * wave(), 0.0, 0.16)
    sat = np.clip(rng.uniform(0.5, 0.8) + 0.05 * wave(), 0.0, 1.0)
    albedo = hsv_to_rgb(RasterImage(np.stack([hue, sat, np.ones_like(hue)], axis=2), ColorSpace.HSV)).data

    shade = rng.uniform(0.45, 0.65) * (1.0 + 0.2 * wave())
    if rng.uniform() < spec.lumen_probability:
        r0, c0 = rng.uniform(0, height), rng.uniform(0, width)
        spread = rng.uniform(0.15, 0.3) * max(height, width)
        shade *= 1.0 - 0.75 * np.exp(-((rows - r0) ** 2 + (cols - c0) ** 2) / (2 * spread ** 2))
    rgb = albedo * shade[..., None] + rng.uniform(0.08, 0.16)
    noise = rng.uniform(0.0, spec.noise)
    return np.clip(rgb + noise * rng.standard_normal(rgb.shape), 0.0, 1.0)


def core_mask(blobs, height, width):
    """Union of blob disks ``dist <= radius``; this is the ground truth."""
    rows, cols = np.mgrid[0:height, 0:width]
    out = np.zeros((height, width), dtype=bool)
    for blob in blobs:
        out |= np.hypot(rows - blob.row, cols - blob.col) <= blob.radius
    return out


def _place_blobs(rng, spec):
    count = int(rng.integers(spec.blob_count[0], spec.blob_count[1] + 1))
    blobs = []
    for _ in range(count):
        for _attempt in range(100):
            radius = float(rng.uniform(*spec.blob_radius))
            margin = radius + 1.5
            row = float(rng.uniform(margin, spec.height - 1 - margin))
            col = float(rng.uniform(margin, spec.width - 1 - margin))
            if all(np.hypot(row - b.row, col - b.col) > radius + b.radius + 4 for b in blobs):
                break
        else:
            continue
        hsv = np.array([[[rng.uniform(0, 1), rng.uniform(*spec.saturation), rng.uniform(*spec.brightness)]]])
        color = tuple(hsv_to_rgb(RasterImage(hsv, ColorSpace.HSV)).data[0, 0])
        blobs.append(Blob(row, col, radius, color))
    return blobs


def render_frame(spec, index):
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, index]))
    height, width = spec.height, spec.width
    rgb = background(rng, spec)
    blobs = _place_blobs(rng, spec)
    rows, cols = np.mgrid[0:height, 0:width]
    for blob in blobs:
        dist = np.hypot(rows - blob.row, cols - blob.col)
        rim = spec.edge_weight * np.clip(blob.radius + 1 - dist, 0.0, 1.0)
        weight = np.where(dist <= blob.radius, 1.0, rim)
        rgb = rgb * (1 - weight[..., None]) + np.array(blob.color) * weight[..., None]
    image = RasterImage(to_uint8(rgb) / 255.0)
    return SyntheticFrame(f"synth_{index:04d}", image, core_mask(blobs, height, width), blobs)


def generate_synthetic(spec, n, out_dir=None):
    """Render ``n`` frames; when ``out_dir`` is given also write NAME.png and NAME_gt.png."""
    frames = [render_frame(spec, i) for i in range(n)]
    if out_dir is not None and frames:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for frame in frames:
            write_image(frame.image, out_dir / f"{frame.name}.png")
            write_mask(frame.gt, out_dir / f"{frame.name}_gt.png")
    return frames
