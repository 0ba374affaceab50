"""Feature-table and manifest I/O plus the in-memory dataset carrier.

The feature CSV layout is: ``lesion_id, scan_id, class`` followed by the 105
canonical feature columns.  Floats are written with ``repr`` so identical
inputs always produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FAMILIES, FEATURE_COLUMNS, FeatureVector, TEXTURE_FAMILIES, family_of_column

ID_COLUMNS = ("lesion_id", "scan_id", "class")

GROUP_PRESETS: dict[str, tuple[str, ...]] = {
    "all": FAMILIES,
    "shape": ("shape",),
    "shape+fos": ("shape", "fos"),
    "texture": TEXTURE_FAMILIES,
}


@dataclass
class Dataset:
    """Feature rows with optional class labels."""

    x: np.ndarray  # (N, p)
    y: np.ndarray | None  # (N,) class ids, or None for unlabeled data
    feature_names: tuple[str, ...]
    lesion_ids: tuple[str, ...] = ()
    scan_ids: tuple[str, ...] = ()

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ValueError("X must be 2D")
        if self.x.shape[1] != len(self.feature_names):
            raise ValueError("column count does not match feature names")
        if not np.isfinite(self.x).all():
            raise ValueError("X contains non-finite values")
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=int)
            if len(self.y) != len(self.x):
                raise ValueError("y length does not match X")
        self.feature_names = tuple(self.feature_names)
        if not self.lesion_ids:
            self.lesion_ids = tuple(str(i) for i in range(len(self.x)))
        if not self.scan_ids:
            self.scan_ids = tuple("" for _ in range(len(self.x)))

    def __len__(self) -> int:
        return len(self.x)

    def subset_columns(self, names) -> "Dataset":
        names = tuple(names)
        index = {c: i for i, c in enumerate(self.feature_names)}
        missing = [c for c in names if c not in index]
        if missing:
            raise ValueError(f"missing feature columns: {missing}")
        cols = [index[c] for c in names]
        return Dataset(
            x=self.x[:, cols],
            y=self.y,
            feature_names=names,
            lesion_ids=self.lesion_ids,
            scan_ids=self.scan_ids,
        )

    def subset_rows(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(
            x=self.x[idx],
            y=None if self.y is None else self.y[idx],
            feature_names=self.feature_names,
            lesion_ids=tuple(self.lesion_ids[i] for i in idx),
            scan_ids=tuple(self.scan_ids[i] for i in idx),
        )


def columns_for_groups(feature_names, groups) -> tuple[str, ...]:
    """Feature columns belonging to the given families, in canonical order."""
    groups = set(groups)
    unknown = groups - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown feature groups: {sorted(unknown)}")
    return tuple(c for c in feature_names if family_of_column(c) in groups)


def parse_groups(spec: str) -> tuple[str, ...]:
    """Parse a --groups value: a preset name or ``custom:<comma list>``."""
    if spec in GROUP_PRESETS:
        return GROUP_PRESETS[spec]
    if spec.startswith("custom:"):
        groups = tuple(g.strip() for g in spec[len("custom:") :].split(",") if g.strip())
        if not groups:
            raise ValueError("custom group list is empty")
        unknown = set(groups) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown feature groups: {sorted(unknown)}")
        return groups
    raise ValueError(f"unknown group set {spec!r}; use one of {sorted(GROUP_PRESETS)} or custom:<list>")


def write_features_csv(path, records) -> None:
    """Write (lesion_id, scan_id, class_id, FeatureVector) records as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ID_COLUMNS + FEATURE_COLUMNS)
        for lesion_id, scan_id, class_id, fv in records:
            row = [lesion_id, scan_id, "" if class_id is None else int(class_id)]
            row.extend(repr(fv.values[c]) for c in FEATURE_COLUMNS)
            writer.writerow(row)


def read_features_csv(path) -> Dataset:
    """Load a feature CSV; the class column may be empty (unlabeled data)."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty feature file")
        rows = list(reader)
    if tuple(header[:3]) != ID_COLUMNS:
        raise ValueError(f"{path}: expected id columns {ID_COLUMNS}, got {tuple(header[:3])}")
    feature_names = tuple(header[3:])
    if not feature_names:
        raise ValueError(f"{path}: no feature columns")
    lesion_ids = tuple(r[0] for r in rows)
    scan_ids = tuple(r[1] for r in rows)
    class_cells = [r[2] for r in rows]
    y = None
    if all(c != "" for c in class_cells) and rows:
        y = np.array([int(c) for c in class_cells])
    x = np.array([[float(v) for v in r[3:]] for r in rows], dtype=np.float64)
    return Dataset(x=x, y=y, feature_names=feature_names, lesion_ids=lesion_ids, scan_ids=scan_ids)


@dataclass
class ManifestEntry:
    scan_id: str
    image_path: Path
    mask_path: Path
    class_map: dict[int, int]


def _parse_class_map(cell: str) -> dict[int, int]:
    out: dict[int, int] = {}
    for pair in cell.split(";"):
        pair = pair.strip()
        if not pair:
            continue
        label, _, cls = pair.partition("=")
        out[int(label)] = int(cls)
    if not out:
        raise ValueError(f"empty label=class map cell: {cell!r}")
    return out


def read_manifest(path) -> list[ManifestEntry]:
    """Read a batch manifest CSV: scan_id, image_path, mask_path, class_map.

    The class_map cell holds semicolon-separated ``label=class`` pairs,
    e.g. ``1=2;2=3``.  Relative paths resolve against the manifest location.
    """
    base = Path(path).parent
    entries = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"scan_id", "image_path", "mask_path", "class_map"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: manifest needs columns {sorted(required)}")
        for row in reader:
            image = Path(row["image_path"])
            mask = Path(row["mask_path"])
            entries.append(
                ManifestEntry(
                    scan_id=row["scan_id"],
                    image_path=image if image.is_absolute() else base / image,
                    mask_path=mask if mask.is_absolute() else base / mask,
                    class_map=_parse_class_map(row["class_map"]),
                )
            )
    if not entries:
        raise ValueError(f"{path}: manifest lists no scans")
    return entries


def write_manifest(path, entries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scan_id", "image_path", "mask_path", "class_map"])
        for e in entries:
            cell = ";".join(f"{label}={cls}" for label, cls in sorted(e.class_map.items()))
            writer.writerow([e.scan_id, str(e.image_path), str(e.mask_path), cell])
