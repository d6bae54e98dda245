import math

import numpy as np
import pytest

from mcwnnm import (ChannelSigmas, ImagePlanes, SIGMA_MIN, add_awgn,
                    estimate_sigmas, extract_patch, psnr)
from mcwnnm.image import ImageError, add_awgn_with_seeds, _channel_rng

from conftest import flat_image, natural_image


class TestImagePlanes:
    def test_shape_validation(self):
        with pytest.raises(ImageError):
            ImagePlanes(np.zeros((2, 4, 4)))
        with pytest.raises(ImageError):
            ImagePlanes(np.zeros((4, 4)))

    def test_rejects_non_finite(self):
        bad = np.zeros((3, 4, 4))
        bad[1, 2, 2] = np.nan
        with pytest.raises(ImageError):
            ImagePlanes(bad)

    def test_planes_read_only(self, small_image):
        with pytest.raises(ValueError):
            small_image.planes[0, 0, 0] = 1.0

    def test_permuted(self, small_image):
        perm = small_image.permuted((1, 2, 0))
        assert np.array_equal(perm.planes[0], small_image.planes[1])
        assert np.array_equal(perm.planes[2], small_image.planes[0])


class TestChannelSigmas:
    def test_clamped(self):
        s = ChannelSigmas(0.0, 20.0, 30.0).clamped()
        assert s.as_tuple() == (SIGMA_MIN, 20.0, 30.0)

    def test_permuted(self):
        assert ChannelSigmas(1, 2, 3).permuted((2, 0, 1)).as_tuple() == (3, 1, 2)

    def test_rejects_negative(self):
        with pytest.raises(ImageError):
            ChannelSigmas(-1.0, 2.0, 3.0)


class TestExtractPatch:
    def test_column_major_layout(self):
        # planes[c][i][j] = c*10000 + i*100 + j makes the layout legible
        idx = np.arange(3)[:, None, None] * 10000 \
            + np.arange(8)[None, :, None] * 100 + np.arange(8)[None, None, :]
        img = ImagePlanes(idx.astype(float))
        v = extract_patch(img, 2, 3, 2)
        # each channel block column-major: (2,3),(3,3),(2,4),(3,4)
        expect = [203, 303, 204, 304]
        assert list(v.data[:4]) == expect
        assert list(v.data[4:8]) == [e + 10000 for e in expect]
        assert v.origin == (2, 3)

    def test_round_trip_identity(self, small_image):
        p = 5
        v = extract_patch(small_image, 7, 9, p)
        block = v.data.reshape(3, p, p).transpose(0, 2, 1)
        assert np.array_equal(block, small_image.planes[:, 7:12, 9:14])

    def test_out_of_bounds(self, small_image):
        with pytest.raises(ImageError):
            extract_patch(small_image, 30, 0, 6)


class TestAddAwgn:
    def test_zero_sigma_identity(self, small_image):
        out = add_awgn(small_image, ChannelSigmas(0, 0, 0), 1)
        assert np.array_equal(out.planes, small_image.planes)

    def test_sample_statistics(self):
        img = flat_image(128.0, 256)
        sig = (40.0, 20.0, 30.0)
        out = add_awgn(img, ChannelSigmas(*sig), 0)
        for c in range(3):
            std = float(np.std(out.planes[c] - img.planes[c]))
            assert abs(std - sig[c]) <= 0.03 * sig[c]

    def test_deterministic(self, small_image):
        sig = ChannelSigmas(40, 20, 30)
        a = add_awgn(small_image, sig, 123)
        b = add_awgn(small_image, sig, 123)
        assert np.array_equal(a.planes, b.planes)
        c = add_awgn(small_image, sig, 124)
        assert not np.array_equal(a.planes, c.planes)

    def test_channels_independent(self):
        img = flat_image(0.0, 64)
        out = add_awgn(img, ChannelSigmas(10, 10, 10), 0)
        r = out.planes[0].ravel()
        g = out.planes[1].ravel()
        assert abs(float(np.corrcoef(r, g)[0, 1])) < 0.05

    def test_permutation_equivariance_with_permuted_seeds(self, small_image):
        """Permuting channels, sigmas and per-channel generators commutes."""
        order = (2, 0, 1)
        sig = ChannelSigmas(40, 20, 30)
        base = add_awgn(small_image, sig, 5)
        rngs = [_channel_rng(5, c) for c in order]
        perm = add_awgn_with_seeds(small_image.permuted(order),
                                   sig.permuted(order), rngs)
        assert np.array_equal(perm.planes, base.permuted(order).planes)


class TestPsnr:
    def test_identical_is_inf(self, small_image):
        assert psnr(small_image, small_image) == math.inf

    def test_constant_offset_20db(self, small_image):
        shifted = ImagePlanes(small_image.planes + 25.5)
        assert psnr(small_image, shifted) == pytest.approx(20.0, abs=1e-12)

    def test_awgn_reference_level(self):
        # 20*log10(255/31.09) with sigma-bar from (40,20,30)
        img = flat_image(128.0, 128)
        noisy = add_awgn(img, ChannelSigmas(40, 20, 30), 0)
        assert psnr(img, noisy) == pytest.approx(18.3, abs=0.3)

    def test_symmetric(self, small_image):
        other = add_awgn(small_image, ChannelSigmas(5, 5, 5), 0)
        assert psnr(small_image, other) == psnr(other, small_image)

    def test_decreases_with_noise_amplitude(self, small_image):
        last = math.inf
        for amp in (1.0, 2.0, 4.0):
            noisy = ImagePlanes(small_image.planes + amp)
            val = psnr(small_image, noisy)
            assert val < last
            last = val

    def test_dimension_mismatch(self, small_image):
        with pytest.raises(ImageError):
            psnr(small_image, flat_image(0.0, 16))


class TestEstimateSigmas:
    def test_flat_awgn_sigma20(self):
        est = estimate_sigmas(add_awgn(flat_image(), ChannelSigmas(20, 20, 20), 0))
        for v in est.as_tuple():
            assert 17.0 <= v <= 23.0

    def test_flat_zero_noise_clamps(self):
        est = estimate_sigmas(flat_image())
        assert est.as_tuple() == (SIGMA_MIN, SIGMA_MIN, SIGMA_MIN)

    def test_per_channel_within_15pct(self):
        sig = (40.0, 20.0, 30.0)
        est = estimate_sigmas(add_awgn(flat_image(), ChannelSigmas(*sig), 1))
        for v, s in zip(est.as_tuple(), sig):
            assert abs(v - s) <= 0.15 * s

    def test_too_small(self):
        with pytest.raises(ImageError):
            estimate_sigmas(ImagePlanes(np.zeros((3, 8, 8))))
