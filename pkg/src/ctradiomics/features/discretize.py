"""Fixed-bin-width gray-level discretization shared by all texture families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..volume_io import LesionRegion


@dataclass
class DiscretizedRegion:
    """A lesion region with intensities quantized to gray levels 1..n_levels.

    level(v) = floor((I(v) - min I) / bin_width) + 1, so the binning is
    anchored at the region minimum and shifting all intensities by a
    constant leaves the levels unchanged.
    """

    levels: np.ndarray  # (n,) integer gray levels, 1-based
    n_levels: int
    bin_width: float
    coordinates: np.ndarray  # (n, 3) voxel indices
    spacing: tuple[float, float, float]

    def __len__(self) -> int:
        return len(self.levels)


def discretize(region: LesionRegion, bin_width: float) -> DiscretizedRegion:
    """Quantize region intensities into fixed-width bins (1-based levels)."""
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    shifted = region.intensities - region.intensities.min()
    levels = np.floor(shifted / bin_width).astype(np.int64) + 1
    return DiscretizedRegion(
        levels=levels,
        n_levels=int(levels.max()),
        bin_width=float(bin_width),
        coordinates=region.coordinates,
        spacing=region.spacing,
    )


def level_grid(d: DiscretizedRegion) -> np.ndarray:
    """Dense bounding-box grid of gray levels, 0 outside the region."""
    lo = d.coordinates.min(axis=0)
    shape = d.coordinates.max(axis=0) - lo + 1
    grid = np.zeros(tuple(shape), dtype=np.int64)
    idx = d.coordinates - lo
    grid[idx[:, 0], idx[:, 1], idx[:, 2]] = d.levels
    return grid
