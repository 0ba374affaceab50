"""Command-line frontend: extract, train, predict, evaluate, experiments,
stats and phantom subcommands.

All randomness flows from --seed; identical configuration and inputs give
byte-identical output files.  The process exits nonzero iff any per-scan or
per-experiment error was recorded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, model_selection as ms, phantom as ph, pls, stats as st
from .features import FAMILIES, extract_all
from .volume_io import extract_lesions, read_mask, read_volume, resample_isotropic, write_nifti


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctradiomics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature vectors for every lesion in a manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="output feature CSV")
    p.add_argument("--bin-width", type=_positive(float), default=25.0)
    p.add_argument("--spacing", type=_positive(float), default=1.0, help="isotropic resample target (mm)")
    p.add_argument("--jobs", type=_positive(int), default=1)

    p = sub.add_parser("train", help="fit a VIP-pruned PLS-DA model from a feature CSV")
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="output model JSON")
    p.add_argument("--report", type=Path, help="report JSON (default: <out>.report.json)")
    p.add_argument("--groups", default="all")
    p.add_argument("--select", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--kfold", type=_positive(int), default=10)
    p.add_argument("--max-lv", type=_positive(int), default=20)
    p.add_argument("--vip-threshold", type=_positive(float), default=1.0)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("predict", help="predict classes for a feature CSV")
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="output predictions CSV")

    p = sub.add_parser("evaluate", help="confusion matrix and accuracy/Se/Sp on labelled data")
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="output metrics JSON")

    p = sub.add_parser("experiments", help="run the five feature-group experiments")
    p.add_argument("--train", required=True, type=Path, dest="train_csv")
    p.add_argument("--test", required=True, type=Path, dest="test_csv")
    p.add_argument("--out", required=True, type=Path, help="output report JSON")
    p.add_argument("--kfold", type=_positive(int), default=10)
    p.add_argument("--max-lv", type=_positive(int), default=20)
    p.add_argument("--vip-threshold", type=_positive(float), default=1.0)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("stats", help="per-feature Kruskal-Wallis/Dunn/FDR table")
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="output CSV")
    p.add_argument("--features-list", help="comma-separated feature subset (default: all)")
    p.add_argument("--alpha", type=_positive(float), default=0.05)
    p.add_argument("--q", type=_positive(float), default=0.05)
    p.add_argument("--global-family", action="store_true", help="one FDR family across all features")

    p = sub.add_parser("phantom", help="write synthetic image/mask pairs plus a manifest")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument(
        "--n-per-class",
        type=_counts,
        default=50,
        help="lesions per class: a single count or three comma-separated counts",
    )
    p.add_argument("--seed", type=int, default=42)

    return parser


def _counts(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return _positive(int)(parts[0])
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected one count or three comma-separated counts")
    return tuple(int(p) for p in parts)


def _extract_scan(args):
    entry, bin_width, spacing = args
    vol = read_volume(entry.image_path)
    mask = read_mask(entry.mask_path, entry.class_map)
    vol, mask = resample_isotropic(vol, mask, spacing)
    records = []
    for region, class_id in extract_lesions(vol, mask):
        lesion_id = f"{entry.scan_id}/{region.label}"
        fv = extract_all(region, bin_width, lesion_id=lesion_id, class_id=class_id)
        records.append((lesion_id, entry.scan_id, class_id, fv))
    return records


def cmd_extract(args) -> int:
    entries = dataio.read_manifest(args.manifest)
    tasks = [(e, args.bin_width, args.spacing) for e in entries]
    failures = 0
    records = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = []
            futures = [pool.submit(_extract_scan, t) for t in tasks]
            for entry, future in zip(entries, futures):
                try:
                    results.append(future.result())
                except Exception as exc:
                    results.append(None)
                    failures += 1
                    print(f"error: scan {entry.scan_id}: {exc}", file=sys.stderr)
        for r in results:
            if r:
                records.extend(r)
    else:
        for task in tasks:
            try:
                records.extend(_extract_scan(task))
            except Exception as exc:
                failures += 1
                print(f"error: scan {task[0].scan_id}: {exc}", file=sys.stderr)
    dataio.write_features_csv(args.out, records)
    print(f"wrote {len(records)} lesion rows to {args.out}")
    return 1 if failures else 0


def _report_to_dict(report: ms.ExperimentReport) -> dict:
    doc = {
        "experiment": report.experiment_id,
        "error_rate": report.error_rate,
        "chosen_lv": report.chosen_lv,
        "considered_total": report.considered_total,
        "considered_by_family": report.considered_by_family,
        "selected_total": report.selected_total,
        "selected_by_family": report.selected_by_family,
    }
    if report.metrics is not None:
        m = report.metrics
        doc["metrics"] = {
            "accuracy": m.accuracy,
            "class_labels": list(m.class_labels),
            "confusion": m.confusion.tolist(),
            "sensitivity": {str(c): m.sensitivity[c] for c in m.class_labels},
            "specificity": {str(c): m.specificity[c] for c in m.class_labels},
        }
    return doc


def _format_fitted_table(reports) -> str:
    header = ["Exp", "ER", "LV", "Considered", "Selected"] + [f.upper() for f in FAMILIES]
    rows = [header]
    for r in reports:
        cells = [f"#{r.experiment_id}", f"{r.error_rate:.2f}", str(r.chosen_lv), str(r.considered_total)]
        pct = 100.0 * r.selected_total / r.considered_total
        cells.append(f"{r.selected_total} ({pct:.1f})")
        for fam in FAMILIES:
            considered = r.considered_by_family[fam]
            if considered == 0:
                cells.append("")
            else:
                sel = r.selected_by_family[fam]
                cells.append(f"{sel} ({100.0 * sel / considered:.1f})")
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def _format_performance_table(reports) -> str:
    labelled = [r for r in reports if r.metrics is not None]
    if not labelled:
        return ""
    classes = labelled[0].metrics.class_labels
    header = ["Exp", "Acc"] + [f"Se C{c}" for c in classes] + [f"Sp C{c}" for c in classes]
    rows = [header]
    for r in labelled:
        m = r.metrics
        cells = [f"#{r.experiment_id}", f"{100.0 * m.accuracy:.1f}"]
        cells += [f"{100.0 * m.sensitivity[c]:.1f}" for c in classes]
        cells += [f"{100.0 * m.specificity[c]:.1f}" for c in classes]
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def _write_json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_train(args) -> int:
    dataset = dataio.read_features_csv(args.features)
    if dataset.y is None:
        print("error: training data has no class column", file=sys.stderr)
        return 1
    groups = dataio.parse_groups(args.groups)
    spec = ms.ExperimentSpec(
        experiment_id=0,
        feature_groups=groups,
        do_vip_selection=args.select,
        k=args.kfold,
        max_lv=args.max_lv,
        seed=args.seed,
        vip_threshold=args.vip_threshold,
    )
    model, report = ms.fit_experiment(dataset, spec)
    pls.save_model(model, args.out)
    report_path = args.report or args.out.with_suffix(".report.json")
    _write_json(report_path, _report_to_dict(report))
    print(_format_fitted_table([report]))
    print(f"wrote model to {args.out} and report to {report_path}")
    return 0


def _check_model_columns(model: pls.PlsModel, dataset: dataio.Dataset) -> None:
    missing = [c for c in model.feature_names if c not in dataset.feature_names]
    if missing:
        raise ValueError(f"feature CSV is missing model columns: {missing}")


def cmd_predict(args) -> int:
    dataset = dataio.read_features_csv(args.features)
    model = pls.load_model(args.model)
    _check_model_columns(model, dataset)
    aligned = dataset.subset_columns(model.feature_names)
    y_hat, classes = pls.predict(model, aligned.x)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["lesion_id", "scan_id", "predicted_class"]
            + [f"response_{c}" for c in model.class_labels]
        )
        for i in range(len(aligned)):
            writer.writerow(
                [aligned.lesion_ids[i], aligned.scan_ids[i], int(classes[i])]
                + [repr(float(v)) for v in y_hat[i]]
            )
    print(f"wrote {len(aligned)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    dataset = dataio.read_features_csv(args.features)
    if dataset.y is None:
        print("error: evaluation data has no class column", file=sys.stderr)
        return 1
    model = pls.load_model(args.model)
    _check_model_columns(model, dataset)
    metrics = ms.evaluate(model, dataset)
    report = ms.ExperimentReport(
        experiment_id=0,
        error_rate=1.0 - metrics.accuracy,
        chosen_lv=model.n_components,
        considered_total=len(model.feature_names),
        considered_by_family=ms._family_counts(model.feature_names),
        selected_total=len(model.selected_features),
        selected_by_family=ms._family_counts(model.selected_features),
        metrics=metrics,
    )
    _write_json(args.out, _report_to_dict(report))
    print(_format_performance_table([report]))
    print(f"wrote metrics to {args.out}")
    return 0


def cmd_experiments(args) -> int:
    train = dataio.read_features_csv(args.train_csv)
    test = dataio.read_features_csv(args.test_csv)
    specs = ms.experiment_specs(
        k=args.kfold, max_lv=args.max_lv, seed=args.seed, vip_threshold=args.vip_threshold
    )
    reports = []
    failures = []
    for spec in specs:
        try:
            model, report = ms.fit_experiment(train, spec)
            report.metrics = ms.evaluate(model, test)
            reports.append(report)
        except Exception as exc:
            failures.append({"experiment": spec.experiment_id, "error": str(exc)})
            print(f"error: experiment {spec.experiment_id}: {exc}", file=sys.stderr)
    doc = {"experiments": [_report_to_dict(r) for r in reports], "failures": failures}
    _write_json(args.out, doc)
    print(_format_fitted_table(reports))
    print()
    print(_format_performance_table(reports))
    print(f"wrote report to {args.out}")
    return 1 if failures else 0


def cmd_stats(args) -> int:
    dataset = dataio.read_features_csv(args.features)
    if dataset.y is None:
        print("error: stats needs a class column", file=sys.stderr)
        return 1
    features = None
    if args.features_list:
        features = [f.strip() for f in args.features_list.split(",") if f.strip()]
    rows = st.feature_group_report(
        dataset, features=features, alpha=args.alpha, q=args.q, global_family=args.global_family
    )
    classes = sorted(set(dataset.y.tolist()))
    pairs = [(a, b) for i, a in enumerate(classes) for b in classes[i + 1 :]]
    header = ["feature", "degenerate", "H", "p_value"]
    for a, b in pairs:
        header += [f"z_{a}v{b}", f"p_{a}v{b}", f"p_adj_{a}v{b}", f"rejected_{a}v{b}"]
    for c in classes:
        header += [f"median_c{c}", f"iqr_c{c}"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = [row.feature, str(row.degenerate).lower()]
            if row.result is None:
                cells += ["", ""] + [""] * (4 * len(pairs))
            else:
                cells += [repr(row.result.statistic), repr(row.result.p_value)]
                by_pair = {(pr.group_i, pr.group_j): pr for pr in row.result.pairwise}
                for pair in pairs:
                    pr = by_pair.get(pair)
                    if pr is None:
                        cells += ["", "", "", ""]
                    else:
                        cells += [
                            repr(pr.z),
                            repr(pr.p_value),
                            "" if pr.p_adjusted is None else repr(pr.p_adjusted),
                            "" if pr.rejected is None else str(pr.rejected).lower(),
                        ]
            for c in classes:
                cells += [repr(row.per_class_median[c]), repr(row.per_class_iqr[c])]
            writer.writerow(cells)
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return 0


def cmd_phantom(args) -> int:
    out = Path(args.out)
    images = out / "images"
    masks = out / "masks"
    images.mkdir(parents=True, exist_ok=True)
    masks.mkdir(parents=True, exist_ok=True)
    scans = ph.generate_phantom(args.n_per_class, args.seed)
    entries = []
    for scan in scans:
        image_path = images / f"{scan.scan_id}.nii"
        mask_path = masks / f"{scan.scan_id}.nii"
        write_nifti(image_path, scan.volume.data.astype(np.float32), scan.volume.spacing, scan.volume.origin)
        write_nifti(mask_path, scan.mask.labels.astype(np.uint8), scan.mask.spacing, scan.mask.origin)
        entries.append(
            dataio.ManifestEntry(
                scan_id=scan.scan_id,
                image_path=Path("images") / image_path.name,
                mask_path=Path("masks") / mask_path.name,
                class_map={1: scan.class_id},
            )
        )
    dataio.write_manifest(out / "manifest.csv", entries)
    print(f"wrote {len(scans)} image/mask pairs and manifest to {out}")
    return 0


_COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "experiments": cmd_experiments,
    "stats": cmd_stats,
    "phantom": cmd_phantom,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
