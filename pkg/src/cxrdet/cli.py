"""Command-line surface.

Subcommands::

    score       score predictions against ground truth (competition mAP)
    nms         run (soft-)NMS over a predictions file
    anchors     emit generated anchor boxes as CSV
    preprocess  CLAHE / resize / augment a PGM image
    folds       deterministic k-fold split of an id list
    classify    confusion metrics from per-image binary labels

Every subcommand is a deterministic function of its inputs, flags, and
seed. Exit codes: 0 success, 1 I/O failure, 2 malformed input or bad
parameters.
"""

import argparse
import csv
import json
import random
import sys

from .anchors import AnchorSpec, generate_anchors
from .formats import (
    FormatError,
    PredRecord,
    group_ground_truth,
    group_predictions,
    read_ground_truth,
    read_predictions,
    write_predictions,
    write_report,
)
from .metrics import (
    DEFAULT_THRESHOLDS,
    ConfusionCounts,
    confusion_metrics,
    kfold_split,
    score_dataset,
    threshold_range,
    validate_thresholds,
)
from .nms import HARD, SOFT_GAUSSIAN, SOFT_LINEAR, NmsConfig, nms
from .preprocess import AugmentSpec, augment, clahe, read_pgm, resize, write_pgm


def _thresholds_arg(text: str):
    try:
        if ":" in text:
            lo, hi, step = (float(part) for part in text.split(":"))
            return threshold_range(lo, hi, step)
        return validate_thresholds(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _wh_arg(text: str):
    try:
        w, h = (int(part) for part in text.lower().split("x"))
        return w, h
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def _shift_arg(text: str):
    try:
        x, y = (float(part) for part in text.split(","))
        return x, y
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None


def _read_text(path: str) -> str:
    # utf-8-sig: tolerate a BOM from spreadsheet exports, never produce one
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        return fh.read()


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_score(args) -> int:
    gt = group_ground_truth(read_ground_truth(_read_text(args.gt)))
    preds = group_predictions(read_predictions(_read_text(args.pred)))
    report = score_dataset(
        gt, preds, args.thresholds, inclusive=args.inclusive_iou, workers=args.workers
    )
    if args.out is not None:
        _write_text(args.out, write_report(report))
    print(f"{report.dataset_map:.6f}")
    return 0


def _cmd_nms(args) -> int:
    records = read_predictions(_read_text(args.input))
    config = NmsConfig(
        mode=args.mode,
        iou_threshold=args.iou,
        sigma=args.sigma,
        score_cutoff=args.score_cut,
    )
    grouped = group_predictions(records)
    order = dict.fromkeys(record.patient_id for record in records)
    out_records = [PredRecord(pid, tuple(nms(grouped[pid], config))) for pid in order]
    _write_text(args.out, write_predictions(out_records))
    return 0


def _cmd_anchors(args) -> int:
    spec = AnchorSpec(args.base_size, tuple(args.scales), tuple(args.ratios), args.stride)
    grid_w, grid_h = args.grid
    boxes = generate_anchors(spec, grid_w, grid_h)
    lines = ["x_min,y_min,x_max,y_max"]
    lines.extend(
        f"{b.x_min!r},{b.y_min!r},{b.x_max!r},{b.y_max!r}" for b in boxes
    )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _floats_arg(text: str):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated float list, got {text!r}") from None


def _cmd_preprocess(args) -> int:
    img = read_pgm(args.input)
    if args.clahe:
        tiles_x, tiles_y = args.tiles
        img = clahe(img, tiles_x=tiles_x, tiles_y=tiles_y, clip_limit=args.clip)
    if args.resize is not None:
        img = resize(img, args.resize, args.resize)
    if args.sample_augment:
        rng = random.Random(args.seed)
        spec = AugmentSpec(
            rotation_deg=rng.uniform(-args.max_rotate, args.max_rotate),
            shift_x=rng.uniform(-args.max_shift, args.max_shift),
            shift_y=rng.uniform(-args.max_shift, args.max_shift),
            hflip=rng.random() < args.hflip_prob,
        )
    else:
        shift_x, shift_y = args.shift
        spec = AugmentSpec(args.rotate, shift_x, shift_y, args.hflip)
    if not spec.is_identity:
        img, _ = augment(img, [], spec)
    write_pgm(args.out, img)
    return 0


def _cmd_folds(args) -> int:
    ids = [line.strip() for line in _read_text(args.ids).splitlines() if line.strip()]
    assignment = kfold_split(ids, args.k, args.seed)
    lines = ["patientId,fold"]
    lines.extend(f"{pid},{assignment[pid]}" for pid in ids)
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_classify(args) -> int:
    text = _read_text(args.labels)
    reader = csv.reader(text.splitlines())
    rows = enumerate(reader, start=1)
    try:
        _, header = next(rows)
    except StopIteration:
        raise FormatError("line 1: missing header") from None
    if tuple(h.strip() for h in header) != ("patientId", "truth", "pred"):
        raise FormatError(f"line 1: expected header 'patientId,truth,pred', got {','.join(header)!r}")
    tp = fp = tn = fn = 0
    for lineno, row in rows:
        if not row:
            continue
        if len(row) != 3:
            raise FormatError(f"line {lineno}: expected 3 fields, got {len(row)}")
        truth, pred = row[1].strip(), row[2].strip()
        if truth not in ("0", "1") or pred not in ("0", "1"):
            raise FormatError(f"line {lineno}: truth and pred must be 0 or 1")
        if truth == "1":
            tp, fn = (tp + 1, fn) if pred == "1" else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if pred == "1" else (fp, tn + 1)
    m = confusion_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
    body = [
        "{",
        f'  "accuracy": {m.accuracy:.6f},',
        f'  "specificity": {m.specificity:.6f},',
        f'  "precision": {m.precision:.6f},',
        f'  "recall": {m.recall:.6f},',
        f'  "f1": {m.f1:.6f},',
        f'  "undefined": {json.dumps(list(m.undefined))}',
        "}",
    ]
    _write_text(args.out, "\n".join(body) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cxrdet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score predictions against ground truth")
    p.add_argument("gt", help="ground-truth CSV")
    p.add_argument("pred", help="predictions CSV")
    p.add_argument("--thresholds", type=_thresholds_arg, default=DEFAULT_THRESHOLDS,
                   help="IoU thresholds, lo:hi:step or a comma list (default 0.4:0.75:0.05)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--workers", type=int, default=1, help="parallel per-image evaluators")
    p.add_argument("--inclusive-iou", action="store_true",
                   help="count IoU equal to a threshold as a hit (default strictly greater)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("nms", help="suppress overlapping detections in a predictions file")
    p.add_argument("input", help="predictions CSV")
    p.add_argument("--out", help="output predictions CSV (default stdout)")
    p.add_argument("--mode", choices=(HARD, SOFT_LINEAR, SOFT_GAUSSIAN), default=HARD)
    p.add_argument("--iou", type=float, default=0.5, help="suppression IoU threshold")
    p.add_argument("--sigma", type=float, default=0.5, help="gaussian decay width")
    p.add_argument("--score-cut", type=float, default=0.001, help="drop decayed scores below this")
    p.set_defaults(func=_cmd_nms)

    p = sub.add_parser("anchors", help="emit generated anchor boxes as CSV")
    p.add_argument("--base-size", type=float, default=16.0)
    p.add_argument("--scales", type=_floats_arg, default=(8.0, 16.0, 32.0))
    p.add_argument("--ratios", type=_floats_arg, default=(0.5, 1.0, 2.0))
    p.add_argument("--stride", type=float, default=16.0)
    p.add_argument("--grid", type=_wh_arg, default=(1, 1), help="feature-map size as WxH")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_anchors)

    p = sub.add_parser("preprocess", help="CLAHE / resize / augment a PGM image")
    p.add_argument("input", help="input PGM (binary P5)")
    p.add_argument("--out", required=True, help="output PGM")
    p.add_argument("--clahe", action="store_true", help="apply CLAHE first")
    p.add_argument("--clip", type=float, default=2.0, help="CLAHE clip limit")
    p.add_argument("--tiles", type=_wh_arg, default=(8, 8), help="CLAHE tile grid as WxH")
    p.add_argument("--resize", type=int, help="resize to N x N")
    p.add_argument("--rotate", type=float, default=0.0, help="rotation in degrees")
    p.add_argument("--shift", type=_shift_arg, default=(0.0, 0.0), help="shift as X,Y pixels")
    p.add_argument("--hflip", action="store_true", help="mirror horizontally")
    p.add_argument("--sample-augment", action="store_true",
                   help="sample the augmentation from --seed instead of the fixed flags")
    p.add_argument("--max-rotate", type=float, default=10.0, help="sampling range for rotation")
    p.add_argument("--max-shift", type=float, default=20.0, help="sampling range for shift")
    p.add_argument("--hflip-prob", type=float, default=0.5, help="sampling probability of a flip")
    p.add_argument("--seed", type=int, default=0, help="augmentation sampling seed")
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("folds", help="deterministic k-fold split of an id list")
    p.add_argument("ids", help="text file with one id per line")
    p.add_argument("--k", type=int, default=5, help="number of folds")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_folds)

    p = sub.add_parser("classify", help="confusion metrics from per-image binary labels")
    p.add_argument("labels", help="CSV with header patientId,truth,pred")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=_cmd_classify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
