"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training did not converge.
"""
import argparse
import logging
import sys
from pathlib import Path

from .dataset import load_dataset
from .detect_hsv import HsvDetectorParams, ThresholdMode
from .detect_rgb import RgbDetectorParams
from .errors import ConvergenceError, DataError, TrainingError, UsageError
from .fileio import read_mask, write_image, write_mask
from .inpaint import DEFAULT_COEFFICIENTS, SmoothingSchedule, inpaint_all
from .pipeline import (
    DetectMode,
    DetectorParams,
    evaluate_dirs,
    evaluate,
    load_frame,
    report_csv,
    run_detect,
    run_pipeline,
    train_from_entries,
)
from .selector import load_model, save_model
from .synth import SyntheticSpec, generate_synthetic

log = logging.getLogger("specrem")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _range(cast):
    def parse(text):
        parts = text.replace(":", ",").split(",")
        try:
            vals = tuple(cast(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        if len(vals) == 1:
            vals = vals * 2
        if len(vals) != 2:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        return vals
    return parse


def _add_detector_flags(p, mode_required=False):
    p.add_argument("--mode", choices=[m.value for m in DetectMode], default="auto",
                   required=mode_required)
    p.add_argument("--model", type=Path, help="selector model file (needed for --mode auto)")
    p.add_argument("--k", type=float, default=4.5, help="HSV threshold multiplier")
    p.add_argument("--k-rgb", type=float, default=4.5, help="RGB threshold multiplier")
    p.add_argument("--threshold-mode", choices=[m.value for m in ThresholdMode], default="fixedk")
    p.add_argument("--fraction", type=float, default=0.006,
                   help="pixel fraction kept in percentile mode")


def _add_inpaint_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coeffs", type=_float_list, default=DEFAULT_COEFFICIENTS,
                   help="comma-separated smoothing coefficients")


def build_parser():
    parser = _Parser(prog="specrem", description="Specular reflection detection and removal.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="write NAME_mask.png for each frame")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_detector_flags(p)

    p = sub.add_parser("inpaint", help="remove masked reflections, writing NAME_clean.png")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--masks", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_inpaint_flags(p)

    p = sub.add_parser("pipeline", help="detect and inpaint every frame")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--overlay", action="store_true", help="also write NAME_overlay.png")
    p.add_argument("--report", type=Path, help="CSV of detection metrics for frames with ground truth")
    _add_detector_flags(p)
    _add_inpaint_flags(p)

    p = sub.add_parser("train", help="fit the RGB/HSV selector")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0 / 12)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", action="store_true", help="choose c and gamma by leave-one-out Dice")
    p.add_argument("--k", type=float, default=4.5)
    p.add_argument("--k-rgb", type=float, default=4.5)

    p = sub.add_parser("evaluate", help="score NAME_mask.png files against NAME_gt.png")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("synth", help="write a synthetic corpus with ground truth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    defaults = SyntheticSpec()
    p.add_argument("--width", type=int, default=defaults.width)
    p.add_argument("--height", type=int, default=defaults.height)
    p.add_argument("--blobs", type=_range(int), default=defaults.blob_count, help="MIN,MAX blobs per frame")
    p.add_argument("--radius", type=_range(float), default=defaults.blob_radius, help="MIN,MAX blob radius")
    p.add_argument("--edge-weight", type=float, default=defaults.edge_weight)
    p.add_argument("--noise", type=float, default=defaults.noise)
    return parser


def _params(args):
    try:
        return DetectorParams(
            RgbDetectorParams(args.k_rgb),
            HsvDetectorParams(args.k, ThresholdMode(args.threshold_mode), args.fraction),
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _model(args):
    if args.mode == DetectMode.AUTO.value:
        if args.model is None:
            raise UsageError("--mode auto needs --model")
        return load_model(args.model)
    return None


def _schedule(args):
    try:
        return SmoothingSchedule(args.coeffs, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))


def _frames(path):
    if path.is_file():
        return [(path.stem, path)]
    errors = []
    entries = load_dataset(path, errors)
    for ident, msg in errors:
        print(f"skipped {ident}: {msg}", file=sys.stderr)
    return [(e.id, e) for e in entries]


def cmd_detect(args):
    params, model = _params(args), _model(args)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, source in _frames(args.inp):
        mask = run_detect(source, args.mode, model, params)
        write_mask(mask, args.out / f"{name}_mask.png")
        log.info("%s: %d pixels", name, mask.sum())


def cmd_inpaint(args):
    schedule = _schedule(args)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, entry in _frames(args.inp):
        mask_path = args.masks / f"{name}_mask.png"
        if not mask_path.is_file():
            print(f"skipped {name}: no mask", file=sys.stderr)
            continue
        img = load_frame(entry)
        mask = read_mask(mask_path)
        if mask.shape != img.shape:
            raise DataError(f"{name}: mask size does not match the frame")
        write_image(inpaint_all(img, mask, schedule), args.out / f"{name}_clean.png")


def cmd_pipeline(args):
    params, model, schedule = _params(args), _model(args), _schedule(args)
    entries = []
    for name, source in _frames(args.inp):
        run_pipeline(source, model, params, schedule, args.mode, args.out, name, args.overlay)
        entries.append(source)
    if args.report is not None:
        with_gt = [e for e in entries if getattr(e, "has_gt", False)]
        args.report.write_text(report_csv(evaluate(with_gt, args.mode, model, params)))


def cmd_train(args):
    try:
        params = DetectorParams(RgbDetectorParams(args.k_rgb), HsvDetectorParams(args.k))
    except ValueError as exc:
        raise UsageError(str(exc))
    entries = load_dataset(args.data)
    model, examples, (c, gamma, score) = train_from_entries(
        entries, args.c, args.gamma, args.tol, args.seed, args.grid, params
    )
    save_model(model, args.out)
    n_rgb = sum(1 for ex in examples if ex.label > 0)
    print(f"trained on {len(examples)} frames ({n_rgb} rgb, {len(examples) - n_rgb} hsv); "
          f"c={c:g} gamma={gamma:g} support vectors={len(model.coefficients)}")
    if score is not None:
        print(f"leave-one-out dice {score:.4f}")


def cmd_evaluate(args):
    skipped = []
    reports = evaluate_dirs(args.pred, args.gt, skipped)
    for ident in skipped:
        print(f"excluded {ident}: no ground truth", file=sys.stderr)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(report_csv(reports))


def cmd_synth(args):
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    try:
        spec = SyntheticSpec(
            width=args.width, height=args.height, blob_count=args.blobs, blob_radius=args.radius,
            edge_weight=args.edge_weight, noise=args.noise, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    generate_synthetic(spec, args.n, args.out)


COMMANDS = {
    "detect": cmd_detect,
    "inpaint": cmd_inpaint,
    "pipeline": cmd_pipeline,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"training did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, TrainingError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
