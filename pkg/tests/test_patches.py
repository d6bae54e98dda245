import numpy as np
import pytest

from mcwnnm import ChannelSigmas, ImagePlanes, add_awgn, block_match, extract_patch
from mcwnnm.patches import (AggregationError, MatchError, PatchTable, aggregate,
                            aggregate_planes, assemble_reference_origins)

from conftest import natural_image


class TestPatchTable:
    def test_vectors_match_extract_patch(self, small_image):
        p = 4
        table = PatchTable(small_image.planes, p)
        for origin in [(0, 0), (3, 7), (28, 28)]:
            v = extract_patch(small_image, *origin, p)
            assert np.array_equal(table.vectors[origin], v.data)

    def test_single_channel(self, small_image):
        table = PatchTable(small_image.planes[0], 4)
        assert table.nchannels == 1
        assert table.vectors.shape == (29, 29, 16)


class TestMatch:
    def test_reference_first_distance_zero(self, small_image):
        g = block_match(small_image, (10, 10), p=4, M=8, window=12)
        assert tuple(g.origins[0]) == (10, 10)
        assert g.Y.shape == (48, 8)
        assert np.array_equal(g.Y[:, 0],
                              extract_patch(small_image, 10, 10, 4).data)

    def test_constant_image_raster_ties(self):
        img = ImagePlanes(np.full((3, 16, 16), 7.0))
        g = block_match(img, (6, 6), p=4, M=5, window=8)
        # all distances tie at 0: raster order of the clipped window wins
        assert [tuple(o) for o in g.origins] == [
            (2, 2), (2, 3), (2, 4), (2, 5), (2, 6)]

    def test_planted_duplicate_is_second(self):
        rng = np.random.default_rng(3)
        planes = rng.uniform(0, 255, size=(3, 24, 24))
        planes[:, 12:16, 12:16] = planes[:, 2:6, 2:6]
        img = ImagePlanes(planes)
        g = block_match(img, (2, 2), p=4, M=3, window=30)
        assert tuple(g.origins[1]) == (12, 12)

    def test_matches_brute_force(self, small_image):
        p, M, window = 4, 12, 10
        ref = (9, 17)
        g = block_match(small_image, ref, p=p, M=M, window=window)
        # exhaustive oracle over the same clipped window
        half = window // 2
        ref_v = extract_patch(small_image, *ref, p).data
        cands = []
        for r in range(max(0, ref[0] - half), min(32 - p, ref[0] + half) + 1):
            for c in range(max(0, ref[1] - half), min(32 - p, ref[1] + half) + 1):
                d = float(np.sum((extract_patch(small_image, r, c, p).data
                                  - ref_v) ** 2))
                cands.append((d, r, c))
        cands.sort()
        assert [tuple(o) for o in g.origins] == [(r, c) for _, r, c in cands[:M]]

    def test_distances_non_decreasing(self, small_image):
        g = block_match(small_image, (5, 5), p=4, M=20, window=14)
        ref = g.Y[:, 0]
        d = np.sum((g.Y - ref[:, None]) ** 2, axis=0)
        assert np.all(np.diff(d) >= -1e-9)

    def test_window_growth_on_tiny_image(self):
        img = natural_image(1, 12)
        g = block_match(img, (4, 4), p=4, M=30, window=4)
        assert g.M == 30

    def test_too_few_candidates_errors(self):
        img = natural_image(1, 8)
        with pytest.raises(MatchError, match="search window too small"):
            block_match(img, (0, 0), p=4, M=100, window=40)

    def test_out_of_bounds_reference(self, small_image):
        with pytest.raises(MatchError):
            block_match(small_image, (30, 0), p=4, M=4, window=8)

    def test_channel_permutation_invariant_selection(self, small_image):
        """Group origins do not depend on the channel order of the image."""
        order = (2, 0, 1)
        g1 = block_match(small_image, (7, 7), p=4, M=16, window=12)
        g2 = block_match(small_image.permuted(order), (7, 7), p=4, M=16,
                         window=12)
        assert np.array_equal(g1.origins, g2.origins)


class TestReferenceOrigins:
    def test_boundary_append(self):
        assert assemble_reference_origins((8, 8), 6, 4) == [
            (0, 0), (0, 2), (2, 0), (2, 2)]

    def test_exact_fit_single_origin(self):
        assert assemble_reference_origins((6, 6), 6, 4) == [(0, 0)]

    def test_full_coverage(self):
        p, stride = 6, 4
        H = W = 128
        covered = np.zeros((H, W), dtype=bool)
        for r, c in assemble_reference_origins((H, W), p, stride):
            covered[r:r + p, c:c + p] = True
        assert covered.all()


class TestAggregate:
    def test_exact_reconstruction_from_clean_patches(self, small_image):
        p = 4
        origins = assemble_reference_origins((32, 32), p, 3)
        X = np.stack([extract_patch(small_image, r, c, p).data
                      for r, c in origins], axis=1)
        out = aggregate([(X, origins)], (32, 32), p)
        assert np.allclose(out.planes, small_image.planes, atol=1e-12)

    def test_two_patch_overlap_mean(self):
        p = 2
        a = np.full((3 * p * p, 1), 1.0)
        b = np.full((3 * p * p, 1), 3.0)
        out = aggregate([(a, [(0, 0)]), (b, [(0, 1)])], (2, 3), p)
        assert np.all(out.planes[:, :, 0] == 1.0)
        assert np.all(out.planes[:, :, 1] == 2.0)  # overlap column
        assert np.all(out.planes[:, :, 2] == 3.0)

    def test_superposition(self, small_image):
        p = 4
        rng = np.random.default_rng(0)
        origins = [(0, 0), (2, 2), (1, 3)]
        X1 = rng.normal(size=(3 * p * p, 3))
        X2 = rng.normal(size=(3 * p * p, 3))
        dims = (8, 8)
        refs = assemble_reference_origins(dims, p, p)  # guarantee coverage
        base = np.zeros((3 * p * p, len(refs)))
        s = aggregate_planes([(X1 + X2, origins), (base, refs)], dims, p)
        s1 = aggregate_planes([(X1, origins), (base, refs)], dims, p)
        s2 = aggregate_planes([(X2, origins), (base, refs)], dims, p)
        # same counts everywhere, so averaging is linear in the patch values
        assert np.allclose(s, s1 + s2, atol=1e-12)

    def test_hole_detection(self):
        p = 2
        X = np.zeros((3 * p * p, 1))
        with pytest.raises(AggregationError, match="aggregation hole"):
            aggregate([(X, [(0, 0)])], (4, 4), p)

    def test_bad_row_count(self):
        with pytest.raises(AggregationError):
            aggregate([(np.zeros((5, 1)), [(0, 0)])], (4, 4), 2)

    def test_origin_count_mismatch(self):
        p = 2
        with pytest.raises(AggregationError):
            aggregate([(np.zeros((3 * p * p, 2)), [(0, 0)])], (4, 4), p)

    def test_zero_noise_identity_pipeline(self):
        """Block match + identity group solve + aggregate returns the input."""
        img = natural_image(5, 20)
        p, M, window, stride = 4, 8, 10, 3
        table = PatchTable(img.planes, p)
        groups = []
        for ref in assemble_reference_origins((20, 20), p, stride):
            g = table.match(ref, M, window)
            groups.append((g.Y, g.origins))
        out = aggregate(groups, (20, 20), p)
        assert np.allclose(out.planes, img.planes, atol=1e-10)
