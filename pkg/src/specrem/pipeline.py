"""Detect, select and inpaint over frames and datasets, plus CSV reporting."""
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dataset import DatasetEntry
from .detect_hsv import HsvDetectorParams, detect_hsv
from .detect_rgb import RgbDetectorParams, detect_rgb
from .errors import DataError, UsageError
from .fileio import read_image, read_mask, write_image, write_mask
from .imagecore import ColorSpace, RasterImage, require_space
from .inpaint import SmoothingSchedule, inpaint_all
from .metrics import compute_metrics, pooled
from .selector import (
    Label,
    extract_features,
    grid_search,
    label_examples,
    svm_predict,
    svm_train,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = ("id", "tp", "fp", "fn", "tn", "dice", "accuracy", "specificity", "precision")
OVERLAY_ALPHA = 0.5


class DetectMode(str, Enum):
    AUTO = "auto"
    RGB = "rgb"
    HSV = "hsv"


@dataclass(frozen=True)
class DetectorParams:
    rgb: RgbDetectorParams = field(default_factory=RgbDetectorParams)
    hsv: HsvDetectorParams = field(default_factory=HsvDetectorParams)


def load_frame(source):
    if isinstance(source, RasterImage):
        require_space(source, ColorSpace.RGB)
        return source
    if isinstance(source, DatasetEntry):
        return source.load_image()
    return read_image(source)


def choose_detector(img, model):
    """The label the selector picks for this frame."""
    label, _ = svm_predict(model, extract_features(img))
    return label


def run_detect(source, mode=DetectMode.AUTO, model=None, params=None):
    """Reflection mask for a frame (RasterImage, DatasetEntry or path)."""
    mode = DetectMode(mode)
    params = params or DetectorParams()
    if mode is DetectMode.AUTO and model is None:
        raise UsageError("auto mode needs a trained model")
    img = load_frame(source)
    if mode is DetectMode.AUTO:
        mode = DetectMode.RGB if choose_detector(img, model) is Label.RGB else DetectMode.HSV
    if mode is DetectMode.RGB:
        return detect_rgb(img, params.rgb)
    return detect_hsv(img, params.hsv)


def overlay(img, mask):
    """Frame with masked pixels blended half-way toward pure red."""
    data = img.data.copy()
    mask = np.asarray(mask, dtype=bool)
    red = np.array([1.0, 0.0, 0.0])
    data[mask] = (1 - OVERLAY_ALPHA) * data[mask] + OVERLAY_ALPHA * red
    return RasterImage(data)


def output_paths(out_dir, name, with_overlay=False):
    out_dir = Path(out_dir)
    paths = {"mask": out_dir / f"{name}_mask.png", "clean": out_dir / f"{name}_clean.png"}
    if with_overlay:
        paths["overlay"] = out_dir / f"{name}_overlay.png"
    return paths


def _write_all(paths, writers):
    written = []
    try:
        for key, write in writers.items():
            write(paths[key])
            written.append(paths[key])
    except BaseException:
        for path in written + [paths[key]]:
            Path(path).unlink(missing_ok=True)
        raise


def run_pipeline(source, model=None, params=None, schedule=None, mode=DetectMode.AUTO,
                 out_dir=None, name=None, with_overlay=False):
    """Detect then inpaint one frame; returns (mask, cleaned image).

    With ``out_dir`` the mask, cleaned frame and optionally the overlay are
    written as NAME_mask.png, NAME_clean.png and NAME_overlay.png. Files
    already written are removed if a later step fails.
    """
    img = load_frame(source)
    mask = run_detect(img, mode, model, params)
    clean = inpaint_all(img, mask, schedule or SmoothingSchedule())
    if out_dir is not None:
        if name is None:
            if isinstance(source, DatasetEntry):
                name = source.id
            elif isinstance(source, (str, Path)):
                name = Path(source).stem
            else:
                raise UsageError("a name is needed to write outputs for an in-memory frame")
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        paths = output_paths(out_dir, name, with_overlay)
        writers = {
            "mask": lambda p: write_mask(mask, p),
            "clean": lambda p: write_image(clean, p),
        }
        if with_overlay:
            writers["overlay"] = lambda p: write_image(overlay(img, mask), p)
        _write_all(paths, writers)
    return mask, clean


# training -----------------------------------------------------------------


def train_from_entries(entries, c=1.0, gamma=1.0 / 12, tol=1e-3, seed=0, grid=False, params=None):
    """Label frames by the better detector and fit the selector.

    Returns (model, examples, (c, gamma, loo_score or None)).
    """
    params = params or DetectorParams()
    labelled = [e for e in entries if e.has_gt]
    if not labelled:
        raise DataError("no frames with ground truth to train on")
    examples = label_examples(
        [(e.load_image(), e.load_gt()) for e in labelled], params.rgb, params.hsv
    )
    score = None
    if grid:
        c, gamma, score = grid_search(examples, tol, seed)
    model = svm_train(examples, c, gamma, tol, seed)
    return model, examples, (c, gamma, score)


# evaluation ---------------------------------------------------------------


def _fmt(value):
    return format(value, ".6f")


def _row(ident, rep):
    return [ident, str(rep.tp), str(rep.fp), str(rep.fn), str(rep.tn)] + [
        _fmt(v) for v in (rep.dice, rep.accuracy, rep.specificity, rep.precision)
    ]


def report_csv(reports):
    """CSV text for ``{id: MetricsReport}``.

    Rows are sorted by id, followed by ALL (counts summed over frames, then
    ratios) and MEAN (per-frame ratios averaged; its count columns hold the
    per-frame count means).
    """
    buf = io.StringIO()
    buf.write("# ALL: pixel-pooled, counts summed over frames before taking ratios\n")
    buf.write("# MEAN: unweighted mean of per-frame values\n")
    buf.write("# 0/0 conventions: dice, specificity and precision are 1 when undefined\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    ids = sorted(reports)
    for ident in ids:
        buf.write(",".join(_row(ident, reports[ident])) + "\n")
    if ids:
        reps = [reports[i] for i in ids]
        buf.write(",".join(_row("ALL", pooled(reps))) + "\n")
        counts = [_fmt(np.mean([getattr(r, k) for r in reps])) for k in ("tp", "fp", "fn", "tn")]
        ratios = [_fmt(np.mean([getattr(r, k) for r in reps]))
                  for k in ("dice", "accuracy", "specificity", "precision")]
        buf.write(",".join(["MEAN"] + counts + ratios) + "\n")
    return buf.getvalue()


def parse_report(text):
    """Rows of a report as ``{id: dict}``; comment lines are skipped."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return {parts[0]: dict(zip(header[1:], map(float, parts[1:])))
            for parts in (ln.split(",") for ln in lines[1:])}


def evaluate_pairs(pairs):
    """``{id: MetricsReport}`` from ``(id, pred, gt)`` triples."""
    out = {}
    for ident, pred, gt in pairs:
        if ident in out:
            raise DataError(f"duplicate id {ident}")
        out[ident] = compute_metrics(pred, gt)
    return out


def evaluate(entries, mode=DetectMode.AUTO, model=None, params=None, skipped=None):
    """Run detection on every entry with ground truth and score it.

    Entries without ground truth are excluded and listed in ``skipped``.
    """
    pairs = []
    for entry in entries:
        if not entry.has_gt:
            log.warning("%s has no ground truth; excluded", entry.id)
            if skipped is not None:
                skipped.append(entry.id)
            continue
        img = entry.load_image()
        pairs.append((entry.id, run_detect(img, mode, model, params), entry.load_gt()))
    return evaluate_pairs(pairs)


def evaluate_dirs(pred_dir, gt_dir, skipped=None):
    """Score ``NAME_mask.png`` files in ``pred_dir`` against ``NAME_gt.png`` in ``gt_dir``."""
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    for d in (pred_dir, gt_dir):
        if not d.is_dir():
            raise DataError(f"{d}: not a directory")
    pairs = []
    for pred_path in sorted(pred_dir.glob("*_mask.png")):
        ident = pred_path.name[: -len("_mask.png")]
        gt_path = gt_dir / f"{ident}_gt.png"
        if not gt_path.is_file():
            log.warning("%s has no ground truth; excluded", ident)
            if skipped is not None:
                skipped.append(ident)
            continue
        pairs.append((ident, read_mask(pred_path), read_mask(gt_path)))
    return evaluate_pairs(pairs)
