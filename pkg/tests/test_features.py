"""Hand-worked feature examples, canonical ordering, and module invariants."""

import math

import numpy as np
import pytest

from conftest import checkerboard_region, constant_cube_region, random_blob_region, region_from_mask, rod_region
from ctradiomics.features import (
    FAMILY_NAMES,
    FEATURE_COLUMNS,
    discretize,
    extract_all,
    first_order_features,
    glcm_features,
    glcm_matrices,
    gldm_features,
    gldm_matrix,
    glrlm_features,
    glrlm_matrices,
    glszm_features,
    glszm_matrix,
    ngtdm_features,
    ngtdm_table,
    shape_features,
)
from ctradiomics.volume_io import LesionRegion


class TestDiscretize:
    def test_constant_region_is_single_level(self):
        region = constant_cube_region(side=2, value=42.0)
        d = discretize(region, 10.0)
        assert d.n_levels == 1
        assert set(d.levels.tolist()) == {1}

    def test_values_inside_first_bin(self):
        region = LesionRegion(
            coordinates=[[0, 0, 0], [1, 0, 0]], intensities=[0.0, 24.9], spacing=(1, 1, 1)
        )
        d = discretize(region, 25.0)
        assert d.levels.tolist() == [1, 1]

    def test_bin_boundaries(self):
        region = LesionRegion(
            coordinates=[[0, 0, 0], [1, 0, 0], [2, 0, 0]],
            intensities=[0.0, 25.0, 50.0],
            spacing=(1, 1, 1),
        )
        d = discretize(region, 25.0)
        assert d.levels.tolist() == [1, 2, 3]
        assert d.n_levels == 3

    def test_non_positive_width_rejected(self):
        with pytest.raises(ValueError):
            discretize(constant_cube_region(), 0.0)


class TestFirstOrderExamples:
    def test_constant_region(self):
        region = constant_cube_region(side=2, value=5.0)  # 8 voxels
        f = first_order_features(region)
        assert f["Mean"] == 5.0
        assert f["Variance"] == 0.0
        assert f["Entropy"] == 0.0
        assert f["Uniformity"] == 1.0
        assert f["Energy"] == 200.0
        assert f["Skewness"] == 0.0
        assert f["Kurtosis"] == 0.0

    def test_two_value_region(self):
        region = LesionRegion(
            coordinates=[[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]],
            intensities=[0.0, 0.0, 4.0, 4.0],
            spacing=(1, 1, 1),
        )
        f = first_order_features(region)
        assert f["Mean"] == 2.0
        assert f["Variance"] == 4.0
        assert f["Range"] == 4.0

    def test_total_energy_scales_with_voxel_volume(self):
        region = constant_cube_region(side=2, value=3.0)
        f1 = first_order_features(region)
        assert f1["TotalEnergy"] == f1["Energy"]  # 1 mm isotropic
        region2 = constant_cube_region(side=2, value=3.0, spacing=(2.0, 1.0, 0.5))
        f2 = first_order_features(region2)
        assert f2["TotalEnergy"] == pytest.approx(f2["Energy"])


class TestGlcmExamples:
    def test_two_voxel_region(self):
        region = LesionRegion(
            coordinates=[[0, 0, 0], [1, 0, 0]], intensities=[0.0, 25.0], spacing=(1, 1, 1)
        )
        d = discretize(region, 25.0)
        mats = glcm_matrices(d)
        assert list(mats) == [(1, 0, 0)]  # only the x direction has a pair
        assert np.array_equal(mats[(1, 0, 0)], [[0.0, 0.5], [0.5, 0.0]])
        f = glcm_features(d)
        assert f["Contrast"] == 1.0
        assert f["JointEntropy"] == 1.0

    def test_checkerboard_axis_contrast(self):
        d = discretize(checkerboard_region(), 25.0)
        mats = glcm_matrices(d)
        for axis_dir in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
            p = mats[axis_dir]
            contrast = sum(
                (i - j) ** 2 * p[i, j] for i in range(p.shape[0]) for j in range(p.shape[1])
            )
            assert contrast == pytest.approx(1.0)

    def test_matrices_are_normalized_and_symmetric(self):
        d = discretize(random_blob_region(seed=3), 25.0)
        for p in glcm_matrices(d).values():
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.allclose(p, p.T)


class TestGldmExamples:
    def test_single_voxel(self):
        region = LesionRegion(coordinates=[[0, 0, 0]], intensities=[7.0], spacing=(1, 1, 1))
        d = discretize(region, 25.0)
        m = gldm_matrix(d)
        assert m[0, 0] == 1  # dependence size 1
        assert gldm_features(d)["SmallDependenceEmphasis"] == 1.0

    def test_constant_cube_centre_dependence(self):
        d = discretize(constant_cube_region(side=3), 25.0)
        m = gldm_matrix(d)
        assert m[0, 26] == 1  # the centre voxel depends on all 26 neighbours
        assert m.sum() == 27

    def test_gray_level_variance_zero_for_constant(self):
        d = discretize(constant_cube_region(side=3), 25.0)
        assert gldm_features(d)["GrayLevelVariance"] == 0.0


class TestGlrlmExamples:
    def test_constant_rod_z_direction(self):
        region = rod_region(length=4)
        d = discretize(region, 25.0)
        mats = glrlm_matrices(d)
        z = mats[(0, 0, 1)]
        assert z.shape == (1, 4)
        assert z[0].tolist() == [0, 0, 0, 1]  # one run of length 4
        sre_z = (z / np.arange(1, 5) ** 2).sum() / z.sum()
        assert sre_z == pytest.approx(1.0 / 16.0)

    def test_alternating_levels_all_unit_runs(self):
        region = LesionRegion(
            coordinates=[[0, 0, k] for k in range(4)],
            intensities=[0.0, 25.0, 0.0, 25.0],
            spacing=(1, 1, 1),
        )
        d = discretize(region, 25.0)
        z = glrlm_matrices(d)[(0, 0, 1)]
        assert z.shape[1] == 1  # no run longer than 1
        f = glrlm_features(d)
        assert f["ShortRunEmphasis"] == 1.0
        assert f["RunPercentage"] == 1.0


class TestGlszmExamples:
    def test_single_zone(self):
        region = constant_cube_region(side=2)
        d = discretize(region, 25.0)
        m = glszm_matrix(d)
        assert m.shape == (1, 8)
        assert m[0, 7] == 1
        assert glszm_features(d)["ZonePercentage"] == pytest.approx(1.0 / 8.0)

    def test_two_disjoint_blobs_same_level(self):
        mask = np.zeros((8, 1, 1), dtype=bool)
        mask[0:2] = True
        mask[5:8] = True
        region = region_from_mask(mask, np.zeros(mask.shape))
        d = discretize(region, 25.0)
        m = glszm_matrix(d)
        assert m[0, 1] == 1  # size-2 zone
        assert m[0, 2] == 1  # size-3 zone
        assert m.sum() == 2

    def test_single_level_nonuniformity(self):
        d = discretize(constant_cube_region(side=3), 25.0)
        assert glszm_features(d)["GrayLevelNonUniformityNormalized"] == 1.0


class TestNgtdmExamples:
    def test_constant_region_fallbacks(self):
        d = discretize(constant_cube_region(side=3), 25.0)
        f = ngtdm_features(d)
        assert f["Coarseness"] == 1e6
        assert f["Busyness"] == 0.0
        assert f["Contrast"] == 0.0

    def test_two_voxel_hand_computation(self):
        region = LesionRegion(
            coordinates=[[0, 0, 0], [1, 0, 0]], intensities=[0.0, 25.0], spacing=(1, 1, 1)
        )
        d = discretize(region, 25.0)
        n_i, s_i, n_total = ngtdm_table(d)
        # each voxel's only neighbour is the other: s_i = |1-2| = 1 for both levels
        assert n_total == 2
        assert n_i.tolist() == [1.0, 1.0]
        assert s_i.tolist() == [1.0, 1.0]
        f = ngtdm_features(d)
        assert f["Coarseness"] == pytest.approx(1.0)  # 1 / (0.5*1 + 0.5*1)
        # pair term: (0.25 + 0.25) / (2*1) = 0.25; mean s term: (1+1)/2 = 1
        assert f["Contrast"] == pytest.approx(0.25)

    def test_contrast_zero_for_single_level(self):
        d = discretize(constant_cube_region(side=2), 25.0)
        assert ngtdm_features(d)["Contrast"] == 0.0


class TestShapeExamples:
    def test_cube_anchors(self):
        region = constant_cube_region(side=10)
        f = shape_features(region)
        assert f["MeshVolume"] == pytest.approx(1000.0, rel=0.05)
        assert f["SurfaceArea"] == pytest.approx(600.0, rel=0.10)
        assert f["SurfaceVolumeRatio"] * f["MeshVolume"] == pytest.approx(f["SurfaceArea"], abs=1e-9)

    def test_ball_sphericity(self):
        x = np.arange(-24, 25)
        gx, gy, gz = np.meshgrid(x, x, x, indexing="ij")
        mask = gx**2 + gy**2 + gz**2 <= 400  # radius 20
        region = region_from_mask(mask, np.zeros(mask.shape))
        f = shape_features(region)
        # binary marching cubes overestimates the area of oblique surfaces,
        # so a digital ball lands near 0.93, below the analytic bound of 1
        assert 0.90 < f["Sphericity"] < 1.0
        assert f["MeshVolume"] == pytest.approx(4 / 3 * math.pi * 20**3, rel=0.02)

    def test_rod_axes(self):
        region = rod_region(length=10)
        f = shape_features(region)
        assert f["Elongation"] < 1.0
        assert f["Flatness"] < 1.0
        assert f["Maximum3DDiameter"] > 9.0
        assert f["MajorAxisLength"] > f["MinorAxisLength"] >= f["LeastAxisLength"]

    def test_sphericity_never_exceeds_one(self):
        for seed in range(8):
            region = random_blob_region(seed=seed, shape=(5, 6, 4))
            f = shape_features(region)
            assert f["Sphericity"] <= 1.0 + 1e-9

    def test_single_voxel_is_finite(self):
        region = LesionRegion(coordinates=[[0, 0, 0]], intensities=[5.0], spacing=(1, 1, 1))
        f = shape_features(region)
        assert all(np.isfinite(v) for v in f.values())
        assert f["MeshVolume"] == pytest.approx(1.0 / 6.0)
        assert f["SurfaceArea"] == pytest.approx(math.sqrt(3))

    def test_voxel_volume_diagnostic(self):
        from ctradiomics.features import voxel_volume

        region = constant_cube_region(side=3, spacing=(1.0, 2.0, 0.5))
        assert voxel_volume(region) == pytest.approx(27.0)
        assert "shape_VoxelVolume" not in FEATURE_COLUMNS


class TestExtractAll:
    def test_exactly_105_finite_values(self):
        fv = extract_all(random_blob_region(seed=1))
        assert len(fv.values) == 105
        assert tuple(fv.values) == FEATURE_COLUMNS
        assert all(np.isfinite(v) for v in fv.values.values())

    def test_family_cardinalities(self):
        sizes = {fam: len(names) for fam, names in FAMILY_NAMES.items()}
        assert sizes == {
            "shape": 13,
            "fos": 18,
            "glcm": 23,
            "gldm": 14,
            "glrlm": 16,
            "glszm": 16,
            "ngtdm": 5,
        }
        assert sum(sizes.values()) == 105
        assert sizes["shape"] + sizes["fos"] == 31
        assert sum(sizes[f] for f in ("glcm", "gldm", "glrlm", "glszm", "ngtdm")) == 74

    def test_voxel_order_invariance(self):
        region = random_blob_region(seed=5)
        rng = np.random.default_rng(0)
        perm = rng.permutation(len(region))
        shuffled = LesionRegion(
            coordinates=region.coordinates[perm],
            intensities=region.intensities[perm],
            spacing=region.spacing,
        )
        a = extract_all(region).values
        b = extract_all(shuffled).values
        for k in a:
            assert a[k] == pytest.approx(b[k], rel=1e-12, abs=1e-12), k

    def test_deterministic(self):
        region = random_blob_region(seed=9)
        a = extract_all(region).values
        b = extract_all(region).values
        assert a == b


TEXTURE_PREFIXES = ("glcm", "gldm", "glrlm", "glszm", "ngtdm")


class TestInvariances:
    def test_intensity_shift(self):
        region = random_blob_region(seed=4)
        shifted = LesionRegion(
            coordinates=region.coordinates,
            intensities=region.intensities + 211.5,
            spacing=region.spacing,
        )
        a = extract_all(region).values
        b = extract_all(shifted).values
        for k in a:
            fam = k.split("_", 1)[0]
            if fam in TEXTURE_PREFIXES or fam == "shape":
                assert a[k] == pytest.approx(b[k], rel=1e-12, abs=1e-12), k
        assert b["fos_Mean"] - a["fos_Mean"] == pytest.approx(211.5, abs=1e-9)
        assert b["fos_Variance"] == pytest.approx(a["fos_Variance"], rel=1e-9)

    def test_axis_permutation(self):
        # plane-bound diameters permute with the axes; everything else is invariant
        diameter_of_plane = {
            frozenset({0, 1}): "shape_Maximum2DDiameterSlice",
            frozenset({0, 2}): "shape_Maximum2DDiameterColumn",
            frozenset({1, 2}): "shape_Maximum2DDiameterRow",
        }
        region = random_blob_region(seed=6)
        base = extract_all(region).values
        for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]:
            permuted = LesionRegion(
                coordinates=region.coordinates[:, perm],
                intensities=region.intensities,
                spacing=region.spacing,
            )
            other = extract_all(permuted).values
            for k, v in base.items():
                if k in diameter_of_plane.values():
                    continue
                assert other[k] == pytest.approx(v, rel=1e-9, abs=1e-9), f"{perm}:{k}"
            # a plane {a, b} of the original appears as plane {perm^-1} image
            inverse = {perm[i]: i for i in range(3)}
            for plane, name in diameter_of_plane.items():
                image = frozenset(inverse[a] for a in plane)
                assert other[diameter_of_plane[image]] == pytest.approx(base[name], rel=1e-9), (
                    perm,
                    name,
                )

    def test_probability_normalization(self):
        d = discretize(random_blob_region(seed=8), 25.0)
        for p in glcm_matrices(d).values():
            assert abs(p.sum() - 1.0) < 1e-12
        m = gldm_matrix(d)
        assert abs(m.sum() / len(d) - 1.0) < 1e-12
        for m in glrlm_matrices(d).values():
            assert m.sum() > 0
        z = glszm_matrix(d)
        assert z.sum() > 0
        n_i, _, n_total = ngtdm_table(d)
        assert abs(n_i.sum() / n_total - 1.0) < 1e-12
