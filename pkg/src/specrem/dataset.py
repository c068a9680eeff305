"""Frame/ground-truth directory ingestion.

A directory holds frames ``NAME.png`` (or ``NAME.ppm``) and optional
ground-truth masks ``NAME_gt.png``. Files ending in ``_gt``, ``_mask``,
``_clean`` or ``_overlay`` are never treated as frames.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import DataError
from .fileio import read_image, read_mask

log = logging.getLogger(__name__)

FRAME_SUFFIXES = (".png", ".ppm")
DERIVED_TAGS = ("_gt", "_mask", "_clean", "_overlay")


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    frame_path: Path
    gt_path: Optional[Path] = None

    @property
    def has_gt(self):
        return self.gt_path is not None

    def load_image(self):
        return read_image(self.frame_path)

    def load_gt(self):
        if self.gt_path is None:
            raise DataError(f"{self.id}: no ground truth")
        return read_mask(self.gt_path)


def _is_frame(path):
    return (
        path.is_file()
        and path.suffix.lower() in FRAME_SUFFIXES
        and not path.stem.endswith(DERIVED_TAGS)
    )


def load_dataset(directory, errors=None):
    """Entries for every frame in ``directory``, sorted by name.

    Frames that fail to decode or whose ground truth has a different size
    are skipped; ``(id, message)`` is appended to ``errors`` when given.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"{directory}: not a directory")
    entries = []
    for path in sorted(p for p in directory.iterdir() if _is_frame(p)):
        gt_path = directory / f"{path.stem}_gt.png"
        entry = DatasetEntry(path.stem, path, gt_path if gt_path.is_file() else None)
        try:
            img = entry.load_image()
            if entry.has_gt:
                gt = entry.load_gt()
                if gt.shape != img.shape:
                    raise DataError(
                        f"{entry.id}: ground truth is {gt.shape[1]}x{gt.shape[0]}, "
                        f"frame is {img.width}x{img.height}"
                    )
        except DataError as exc:
            log.warning("skipping %s: %s", entry.id, exc)
            if errors is not None:
                errors.append((entry.id, str(exc)))
            continue
        entries.append(entry)
    return entries
