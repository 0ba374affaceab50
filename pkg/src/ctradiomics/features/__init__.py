"""The 105-descriptor radiomics vector: 13 shape, 18 first-order, 23 GLCM,
14 GLDM, 16 GLRLM, 16 GLSZM and 5 NGTDM features in a fixed canonical order.

Column names are ``family_FeatureName`` (e.g. ``shape_Sphericity``); the
texture families share one fixed-bin-width discretization of the region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..volume_io import LesionRegion
from .discretize import DiscretizedRegion, discretize, level_grid
from .firstorder import FOS_NAMES, first_order_features
from .glcm import GLCM_NAMES, glcm_features, glcm_matrices
from .gldm import GLDM_NAMES, gldm_features, gldm_matrix
from .glrlm import GLRLM_NAMES, glrlm_features, glrlm_matrices
from .glszm import GLSZM_NAMES, glszm_features, glszm_matrix
from .ngtdm import NGTDM_NAMES, ngtdm_features, ngtdm_table
from .shape import SHAPE_NAMES, shape_features, voxel_volume

DEFAULT_BIN_WIDTH = 25.0  # HU

FAMILIES: tuple[str, ...] = ("shape", "fos", "glcm", "gldm", "glrlm", "glszm", "ngtdm")

FAMILY_NAMES: dict[str, tuple[str, ...]] = {
    "shape": SHAPE_NAMES,
    "fos": FOS_NAMES,
    "glcm": GLCM_NAMES,
    "gldm": GLDM_NAMES,
    "glrlm": GLRLM_NAMES,
    "glszm": GLSZM_NAMES,
    "ngtdm": NGTDM_NAMES,
}

FEATURE_COLUMNS: tuple[str, ...] = tuple(
    f"{family}_{name}" for family in FAMILIES for name in FAMILY_NAMES[family]
)

TEXTURE_FAMILIES: tuple[str, ...] = ("glcm", "gldm", "glrlm", "glszm", "ngtdm")


def family_of_column(column: str) -> str:
    family = column.split("_", 1)[0]
    if family not in FAMILIES:
        raise ValueError(f"unknown feature family in column {column!r}")
    return family


@dataclass
class FeatureVector:
    """All 105 descriptors of one lesion, keyed by canonical column name."""

    values: dict[str, float]
    lesion_id: str = ""
    class_id: int | None = None

    def __post_init__(self):
        if tuple(self.values) != FEATURE_COLUMNS:
            raise ValueError("feature vector keys must be the canonical 105 columns in order")

    def as_array(self) -> np.ndarray:
        return np.array([self.values[c] for c in FEATURE_COLUMNS], dtype=np.float64)


def extract_all(
    region: LesionRegion,
    bin_width: float = DEFAULT_BIN_WIDTH,
    lesion_id: str = "",
    class_id: int | None = None,
) -> FeatureVector:
    """Compute the full 105-feature vector for one lesion region.

    Deterministic for identical inputs and independent of the voxel list
    order; degenerate regions produce the documented fallback values, never
    non-finite entries.
    """
    d = discretize(region, bin_width)
    per_family = {
        "shape": shape_features(region),
        "fos": first_order_features(region, bin_width),
        "glcm": glcm_features(d),
        "gldm": gldm_features(d),
        "glrlm": glrlm_features(d),
        "glszm": glszm_features(d),
        "ngtdm": ngtdm_features(d),
    }
    values: dict[str, float] = {}
    for family in FAMILIES:
        computed = per_family[family]
        for name in FAMILY_NAMES[family]:
            values[f"{family}_{name}"] = float(computed[name])
    bad = [k for k, v in values.items() if not np.isfinite(v)]
    if bad:
        raise RuntimeError(f"non-finite feature values for {bad}")
    return FeatureVector(values=values, lesion_id=lesion_id, class_id=class_id)


__all__ = [
    "DEFAULT_BIN_WIDTH",
    "FAMILIES",
    "FAMILY_NAMES",
    "FEATURE_COLUMNS",
    "TEXTURE_FAMILIES",
    "DiscretizedRegion",
    "FeatureVector",
    "discretize",
    "extract_all",
    "family_of_column",
    "first_order_features",
    "glcm_features",
    "glcm_matrices",
    "gldm_features",
    "gldm_matrix",
    "glrlm_features",
    "glrlm_matrices",
    "glszm_features",
    "glszm_matrix",
    "level_grid",
    "ngtdm_features",
    "ngtdm_table",
    "shape_features",
    "voxel_volume",
]
