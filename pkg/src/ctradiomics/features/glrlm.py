"""Gray-level run-length features, averaged over the 13 distance-1 directions."""

from __future__ import annotations

import numpy as np

from ._offsets import UNIQUE_DIRECTIONS, shift_into
from .discretize import DiscretizedRegion, level_grid

GLRLM_NAMES = (
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
)


def glrlm_matrices(d: DiscretizedRegion) -> dict[tuple[int, int, int], np.ndarray]:
    """Run counts keyed by direction, rows = gray level, columns = run length.

    Runs are maximal same-level segments of in-region voxels along a
    direction; counts are recovered from same-level window counts W_j via
    R_j = W_j - 2 W_{j+1} + W_{j+2}.
    """
    grid = level_grid(d)
    ng = d.n_levels
    matrices = {}
    for direction in UNIQUE_DIRECTIONS:
        # continues[v]: v and v+direction are in-region with equal levels
        continues = (grid > 0) & (shift_into(grid, direction, fill=-1) == grid)
        windows = []  # windows[j-1][lvl-1] = count of uniform windows of length j
        window_mask = grid > 0
        j = 1
        while window_mask.any():
            windows.append(np.bincount(grid[window_mask], minlength=ng + 1)[1:])
            window_mask = window_mask & shift_into(
                continues, tuple(c * (j - 1) for c in direction)
            )
            j += 1
        windows.append(np.zeros(ng, dtype=np.int64))
        windows.append(np.zeros(ng, dtype=np.int64))
        w = np.asarray(windows, dtype=np.int64)  # (maxlen+2, ng)
        runs = w[:-2] - 2 * w[1:-1] + w[2:]
        matrices[direction] = runs.T.astype(np.float64)  # (ng, maxlen)
    return matrices


def _features_from_matrix(m: np.ndarray, n_voxels: int) -> dict[str, float]:
    ng, max_len = m.shape
    nr = m.sum()
    i = np.arange(1, ng + 1, dtype=np.float64)[:, None]
    j = np.arange(1, max_len + 1, dtype=np.float64)[None, :]
    p = m / nr
    row = m.sum(axis=1)
    col = m.sum(axis=0)
    mu_i = float((i * p).sum())
    mu_j = float((j * p).sum())
    return {
        "ShortRunEmphasis": float((m / j**2).sum() / nr),
        "LongRunEmphasis": float((m * j**2).sum() / nr),
        "GrayLevelNonUniformity": float((row**2).sum() / nr),
        "GrayLevelNonUniformityNormalized": float((row**2).sum() / nr**2),
        "RunLengthNonUniformity": float((col**2).sum() / nr),
        "RunLengthNonUniformityNormalized": float((col**2).sum() / nr**2),
        "RunPercentage": float(nr / n_voxels),
        "GrayLevelVariance": float((p * (i - mu_i) ** 2).sum()),
        "RunVariance": float((p * (j - mu_j) ** 2).sum()),
        "RunEntropy": float(-(p[p > 0] * np.log2(p[p > 0])).sum()) + 0.0,
        "LowGrayLevelRunEmphasis": float((m / i**2).sum() / nr),
        "HighGrayLevelRunEmphasis": float((m * i**2).sum() / nr),
        "ShortRunLowGrayLevelEmphasis": float((m / (i**2 * j**2)).sum() / nr),
        "ShortRunHighGrayLevelEmphasis": float((m * i**2 / j**2).sum() / nr),
        "LongRunLowGrayLevelEmphasis": float((m * j**2 / i**2).sum() / nr),
        "LongRunHighGrayLevelEmphasis": float((m * i**2 * j**2).sum() / nr),
    }


def glrlm_features(d: DiscretizedRegion) -> dict[str, float]:
    """The 16 run-length features, averaged over all 13 directions."""
    n_voxels = len(d)
    per_direction = [_features_from_matrix(m, n_voxels) for m in glrlm_matrices(d).values()]
    return {name: float(np.mean([f[name] for f in per_direction])) for name in GLRLM_NAMES}
