"""Gray-level co-occurrence features, averaged over the 13 distance-1 directions."""

from __future__ import annotations

import numpy as np

from ._offsets import UNIQUE_DIRECTIONS, shifted_pair_slices
from .discretize import DiscretizedRegion, level_grid

GLCM_NAMES = (
    "Autocorrelation",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "Id",
    "Idm",
    "Idmn",
    "Idn",
    "Imc1",
    "Imc2",
    "InverseVariance",
    "JointAverage",
    "JointEnergy",
    "JointEntropy",
    "MCC",
    "MaximumProbability",
    "SumEntropy",
    "SumSquares",
)


def _entropy2(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def glcm_matrices(d: DiscretizedRegion) -> dict[tuple[int, int, int], np.ndarray]:
    """Normalized symmetric co-occurrence matrices keyed by direction.

    Counts accumulate only over voxel pairs that are both inside the region;
    directions without any pair are omitted.
    """
    grid = level_grid(d)
    ng = d.n_levels
    matrices = {}
    for offset in UNIQUE_DIRECTIONS:
        sl = shifted_pair_slices(grid.shape, offset)
        if sl is None:
            continue
        src, dst = sl
        a = grid[src].ravel()
        b = grid[dst].ravel()
        keep = (a > 0) & (b > 0)
        if not keep.any():
            continue
        idx = (a[keep] - 1) * ng + (b[keep] - 1)
        counts = np.bincount(idx, minlength=ng * ng).reshape(ng, ng).astype(np.float64)
        counts = counts + counts.T  # symmetric accumulation
        matrices[offset] = counts / counts.sum()
    return matrices


def _mcc(p: np.ndarray) -> float:
    px = p.sum(axis=1)
    support = np.nonzero(px > 0)[0]
    if len(support) < 2:
        return 0.0
    ps = p[np.ix_(support, support)]
    pxs = px[support]
    # Q[i, j] = sum_k p(i,k) p(j,k) / (px(i) py(k)); symmetric p so py = px
    q = (ps / pxs[:, None]) @ (ps / pxs[None, :]).T
    eig = np.sort(np.real(np.linalg.eigvals(q)))
    second = eig[-2] if len(eig) >= 2 else 0.0
    return float(np.sqrt(max(second, 0.0)))


def _features_from_matrix(p: np.ndarray, ng: int) -> dict[str, float]:
    i = np.arange(1, ng + 1, dtype=np.float64)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float((i * px).sum())
    mu_y = float((i * py).sum())
    var_x = float(((i - mu_x) ** 2 * px).sum())
    var_y = float(((i - mu_y) ** 2 * py).sum())

    diff_k = np.arange(0, ng, dtype=np.float64)
    p_diff = np.array([p[np.abs(ii - jj) == k].sum() for k in diff_k])
    sum_k = np.arange(2, 2 * ng + 1, dtype=np.float64)
    p_sum = np.array([p[(ii + jj) == k].sum() for k in sum_k])

    diff_avg = float((diff_k * p_diff).sum())
    h_xy = _entropy2(p.ravel())
    h_x = _entropy2(px)
    h_y = _entropy2(py)
    joint = px[:, None] * py[None, :]
    nz = (p > 0) & (joint > 0)
    h_xy1 = float(-(p[nz] * np.log2(joint[nz])).sum())
    nzj = joint > 0
    h_xy2 = float(-(joint[nzj] * np.log2(joint[nzj])).sum())

    autocorr = float((ii * jj * p).sum())
    if var_x > 0 and var_y > 0:
        correlation = (autocorr - mu_x * mu_y) / np.sqrt(var_x * var_y)
    else:
        correlation = 1.0  # flat marginal fallback
    den = max(h_x, h_y)
    imc1 = (h_xy - h_xy1) / den if den > 0 else 0.0
    imc2 = float(np.sqrt(max(1.0 - np.exp(-2.0 * (h_xy2 - h_xy)), 0.0)))

    off_diag = ii != jj
    inv_var = float((p[off_diag] / (ii[off_diag] - jj[off_diag]) ** 2).sum())

    return {
        "Autocorrelation": autocorr,
        "ClusterProminence": float(((ii + jj - mu_x - mu_y) ** 4 * p).sum()),
        "ClusterShade": float(((ii + jj - mu_x - mu_y) ** 3 * p).sum()),
        "ClusterTendency": float(((ii + jj - mu_x - mu_y) ** 2 * p).sum()),
        "Contrast": float(((ii - jj) ** 2 * p).sum()),
        "Correlation": float(correlation),
        "DifferenceAverage": diff_avg,
        "DifferenceEntropy": _entropy2(p_diff),
        "DifferenceVariance": float(((diff_k - diff_avg) ** 2 * p_diff).sum()),
        "Id": float((p / (1.0 + np.abs(ii - jj))).sum()),
        "Idm": float((p / (1.0 + (ii - jj) ** 2)).sum()),
        "Idmn": float((p / (1.0 + (ii - jj) ** 2 / ng**2)).sum()),
        "Idn": float((p / (1.0 + np.abs(ii - jj) / ng)).sum()),
        "Imc1": float(imc1),
        "Imc2": imc2,
        "InverseVariance": inv_var,
        "JointAverage": mu_x,
        "JointEnergy": float((p**2).sum()),
        "JointEntropy": h_xy,
        "MCC": _mcc(p),
        "MaximumProbability": float(p.max()),
        "SumEntropy": _entropy2(p_sum),
        "SumSquares": var_x,
    }


def glcm_features(d: DiscretizedRegion) -> dict[str, float]:
    """The 23 co-occurrence features, averaged over directions with pairs.

    When no direction yields a pair at all (isolated voxels), the level
    histogram placed on the diagonal serves as the degenerate matrix so that
    every feature stays finite and deterministic.
    """
    matrices = list(glcm_matrices(d).values())
    ng = d.n_levels
    if not matrices:
        hist = np.bincount(d.levels, minlength=ng + 1)[1:].astype(np.float64)
        matrices = [np.diag(hist / hist.sum())]
    per_direction = [_features_from_matrix(p, ng) for p in matrices]
    return {name: float(np.mean([f[name] for f in per_direction])) for name in GLCM_NAMES}
