import numpy as np
import pytest

from utidrift import pyramid

import oracles


class TestDecompose:
    def test_zero_image_all_zero(self):
        bands = pyramid.decompose(np.zeros((32, 32)), 3, 4)
        assert len(bands) == 12
        for b in bands:
            assert np.all(b.coefficients == 0)

    def test_linearity_scaling(self, rand_img):
        x = rand_img(5, (40, 56))
        b1 = pyramid.decompose(x, 4, 6)
        b2 = pyramid.decompose(2.0 * x, 4, 6)
        for u, v in zip(b1, b2):
            ref = np.abs(u.coefficients).max()
            assert np.abs(v.coefficients - 2.0 * u.coefficients).max() <= 1e-9 * ref

    def test_linearity_superposition(self, rand_img):
        x = rand_img(6, (32, 32))
        y = rand_img(7, (32, 32))
        bx = pyramid.decompose(x, 3, 4)
        by = pyramid.decompose(y, 3, 4)
        bxy = pyramid.decompose(x + y, 3, 4)
        for u, v, w in zip(bx, by, bxy):
            s = u.coefficients + v.coefficients
            scale = max(np.abs(s).max(), 1.0)
            assert np.abs(w.coefficients - s).max() <= 1e-9 * scale

    def test_subband_grid_halving(self):
        bands = pyramid.decompose(np.zeros((63, 412)), 4, 6)
        by_scale = {b.scale: b.coefficients.shape for b in bands}
        assert by_scale[1] == (63, 412)
        assert by_scale[2] == (32, 206)
        assert by_scale[3] == (16, 103)
        assert by_scale[4] == (8, 52)

    def test_band_count_and_order(self):
        bands = pyramid.decompose(np.zeros((32, 32)), 2, 3)
        assert [(b.scale, b.orientation) for b in bands] == [
            (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]

    def test_too_small_image_rejected(self):
        with pytest.raises(ValueError, match="too small"):
            pyramid.decompose(np.zeros((8, 8)), 4, 4)

    def test_max_scale_prefix_identical(self, rand_img):
        x = rand_img(8, (48, 48))
        full = pyramid.decompose(x, 4, 6)
        partial = pyramid.decompose(x, 4, 6, max_scale=2)
        assert len(partial) == 12
        for u, v in zip(full[:12], partial):
            assert np.array_equal(u.coefficients, v.coefficients)


class TestImpulseOracle:
    @pytest.mark.parametrize("shape", [(64, 64), (63, 100)])
    def test_energies_match_independent_filters(self, shape):
        img = np.zeros(shape)
        img[shape[0] // 2, shape[1] // 2] = 1.0
        main = pyramid.decompose(img, 3, 6)
        ref = oracles.steerable_bands_oracle(img, 3, 6)
        for got, want in zip(main, ref):
            assert got.coefficients.shape == want.shape
            e_got = float(np.sum(np.abs(got.coefficients) ** 2))
            e_want = float(np.sum(np.abs(want) ** 2))
            assert e_got == pytest.approx(e_want, rel=1e-6)

    def test_textured_image_coefficients_match(self, texture):
        x = texture(9, (64, 48))
        main = pyramid.decompose(x, 3, 4)
        ref = oracles.steerable_bands_oracle(x, 3, 4)
        for got, want in zip(main, ref):
            scale = max(np.abs(want).max(), 1e-12)
            assert np.abs(got.coefficients - want).max() <= 1e-9 * scale
