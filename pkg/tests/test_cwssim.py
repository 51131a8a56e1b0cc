import numpy as np
import pytest

from utidrift.metrics import (CwSsimParams, comparison_subbands, cw_ssim,
                              mse, ssim)

import oracles


class TestCwSsim:
    def test_identity_is_one(self, texture):
        x = texture(0, (48, 48))
        assert cw_ssim(x, x) == pytest.approx(1.0, abs=1e-9)

    def test_symmetry_exact(self, texture):
        a = texture(1, (48, 48))
        b = texture(2, (48, 48))
        assert cw_ssim(a, b) == cw_ssim(b, a)

    def test_range(self, rand_img, texture):
        pairs = [(rand_img(3, (32, 32)), rand_img(4, (32, 32))),
                 (texture(5, (32, 32)), np.zeros((32, 32)))]
        for a, b in pairs:
            v = cw_ssim(a, b)
            assert 0.0 <= v <= 1.0

    def test_zero_vs_texture_matches_stabilizer_formula(self, texture):
        # Zero-image coefficients vanish, so each window reduces to
        # K / (sum |w|^2 + K); check the full average against the loop.
        p = CwSsimParams()
        zero = np.zeros((40, 40))
        tex = texture(6, (40, 40))
        bands_z = comparison_subbands(zero, p)
        bands_t = comparison_subbands(tex, p)
        want = oracles.cw_ssim_window_loop(bands_z, bands_t,
                                           p.local_window, p.k_stabilizer)
        got = cw_ssim(zero, tex, p)
        assert got == pytest.approx(want, rel=1e-9)
        # spot-check one window against the closed form
        wb = bands_t[0][:7, :7]
        expected = (p.k_stabilizer
                    / (float(np.sum(np.abs(wb) ** 2)) + p.k_stabilizer))
        wa = bands_z[0][:7, :7]
        num = 2 * abs(np.sum(wa * np.conj(wb))) + p.k_stabilizer
        den = (float(np.sum(np.abs(wa) ** 2))
               + float(np.sum(np.abs(wb) ** 2)) + p.k_stabilizer)
        assert num / den == pytest.approx(expected, rel=1e-12)

    def test_matches_window_loop_oracle(self, texture):
        p = CwSsimParams()
        for seed in range(3):
            a = texture(seed, (32, 32))
            b = texture(seed + 30, (32, 32))
            got = cw_ssim(a, b, p)
            want = oracles.cw_ssim_window_loop(
                comparison_subbands(a, p), comparison_subbands(b, p),
                p.local_window, p.k_stabilizer)
            assert got == pytest.approx(want, rel=1e-9)

    def test_more_tolerant_to_shift_than_ssim(self, texture):
        x = texture(8, (64, 64))
        shifted = np.roll(x, 2, axis=1)
        assert cw_ssim(x, shifted) > ssim(x, shifted)

    def test_translation_sensitivity_ordering(self, texture):
        # 1-pixel circular shift: the wavelet measure drops far less.
        x = texture(9, (64, 64))
        shifted = np.roll(x, 1, axis=0)
        assert 1 - cw_ssim(x, shifted) < 1 - ssim(x, shifted)
        assert mse(x, shifted) > 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="differ"):
            cw_ssim(np.zeros((32, 32)), np.zeros((32, 40)))

    def test_too_small_for_window(self):
        # comparison level 2 leaves a 6x6 grid, below the 7x7 window
        with pytest.raises(ValueError, match="window"):
            cw_ssim(np.zeros((12, 12)), np.zeros((12, 12)))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            CwSsimParams(k_stabilizer=0).validate()
        with pytest.raises(ValueError):
            CwSsimParams(comparison_level=5).validate()
        with pytest.raises(ValueError):
            CwSsimParams(local_window=6).validate()

    def test_custom_level_and_window(self, texture):
        p = CwSsimParams(n_scales=3, n_orientations=4, comparison_level=1,
                         local_window=9)
        x = texture(10, (40, 40))
        y = texture(11, (40, 40))
        got = cw_ssim(x, y, p)
        want = oracles.cw_ssim_window_loop(
            comparison_subbands(x, p), comparison_subbands(y, p),
            p.local_window, p.k_stabilizer)
        assert got == pytest.approx(want, rel=1e-9)
        assert cw_ssim(x, x, p) == pytest.approx(1.0, abs=1e-9)
