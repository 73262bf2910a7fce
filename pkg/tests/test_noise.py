import math

import numpy as np
import pytest

from rambp.noise import (
    NoiseSpec,
    gaussian_blur,
    gaussian_kernel_1d,
    gaussian_noise,
    salt_pepper,
)


class TestSaltPepper:
    def test_zero_density_is_identity(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        assert np.array_equal(salt_pepper(img, 0.0, 123), img)

    def test_full_density_is_all_extreme(self):
        rng = np.random.default_rng(1)
        img = rng.integers(1, 255, (16, 16), dtype=np.uint8)
        out = salt_pepper(img, 1.0, 5)
        assert np.isin(out, (0, 255)).all()

    def test_corruption_count_within_binomial_bound(self):
        # Expected count rho*N with std sqrt(N*rho*(1-rho)); allow 4 sigma.
        rho, n = 0.3, 128 * 128
        img = np.full((128, 128), 128, dtype=np.uint8)
        out = salt_pepper(img, rho, 99)
        corrupted = int((out != img).sum())
        hits = int(np.isin(out, (0, 255)).sum())
        bound = 4.0 * math.sqrt(n * rho * (1 - rho))
        assert abs(hits - rho * n) <= bound
        assert corrupted <= hits  # impulses landing on an already-extreme value stay counted

    def test_untouched_positions_keep_values(self):
        rng = np.random.default_rng(2)
        img = rng.integers(10, 240, (32, 32), dtype=np.uint8)
        out = salt_pepper(img, 0.25, 7)
        changed = out != img
        assert np.isin(out[changed], (0, 255)).all()
        assert np.array_equal(out[~changed], img[~changed])

    def test_deterministic_and_seed_sensitive(self):
        img = np.full((20, 20), 100, dtype=np.uint8)
        a = salt_pepper(img, 0.4, 42)
        b = salt_pepper(img, 0.4, 42)
        c = salt_pepper(img, 0.4, 43)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_neighbor_corruption_uncorrelated(self):
        img = np.full((256, 256), 128, dtype=np.uint8)
        hit = (salt_pepper(img, 0.3, 11) != 128).astype(np.float64)
        left, right = hit[:, :-1].ravel(), hit[:, 1:].ravel()
        corr = np.corrcoef(left, right)[0, 1]
        assert abs(corr) < 0.02

    def test_rho_out_of_range_rejected(self):
        img = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ValueError):
            salt_pepper(img, -0.1, 0)
        with pytest.raises(ValueError):
            salt_pepper(img, 1.5, 0)


class TestGaussianNoise:
    def test_vanishing_sigma_is_identity(self):
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, (24, 24), dtype=np.uint8)
        assert np.array_equal(gaussian_noise(img, 1e-6, 4), img)

    def test_moments_on_flat_image(self):
        n = 128 * 128
        img = np.full((128, 128), 128, dtype=np.uint8)
        out = gaussian_noise(img, 5.0, 21).astype(np.float64)
        assert abs(out.mean() - 128.0) <= 4.0 * 5.0 / math.sqrt(n)
        assert abs(out.std() - 5.0) <= 0.5

    def test_clamped_at_black(self):
        img = np.zeros((64, 64), dtype=np.uint8)
        out = gaussian_noise(img, 5.0, 8)
        assert out.min() == 0
        assert out.max() <= 40  # a few positive tails, nothing wild

    def test_deterministic(self):
        img = np.full((10, 10), 77, dtype=np.uint8)
        assert np.array_equal(gaussian_noise(img, 5.0, 1), gaussian_noise(img, 5.0, 1))

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(ValueError):
            gaussian_noise(np.zeros((2, 2), dtype=np.uint8), 0.0, 0)


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        img = np.full((15, 11), 55, dtype=np.uint8)
        assert np.array_equal(gaussian_blur(img, 1.25), img)

    def test_impulse_center_response(self):
        size = 15
        img = np.zeros((size, size), dtype=np.uint8)
        img[size // 2, size // 2] = 255
        out = gaussian_blur(img, 1.0)
        k = gaussian_kernel_1d(1.0)
        center_weight = float(k[len(k) // 2]) ** 2
        assert abs(int(out[size // 2, size // 2]) - 255.0 * center_weight) <= 0.5

    def test_matches_dense_kernel_oracle(self):
        # Interior-supported impulse: expected image from a direct 2-D kernel product.
        sigma = 1.0
        k = gaussian_kernel_1d(sigma)
        radius = len(k) // 2
        size = 4 * radius + 1
        img = np.zeros((size, size), dtype=np.uint8)
        img[size // 2, size // 2] = 255
        expected = np.zeros((size, size))
        expected[
            size // 2 - radius : size // 2 + radius + 1, size // 2 - radius : size // 2 + radius + 1
        ] = 255.0 * np.outer(k, k)
        assert np.array_equal(gaussian_blur(img, sigma), np.rint(expected).astype(np.uint8))

    def test_impulse_mass_preserved_within_rounding(self):
        # The float convolution conserves mass exactly; the only loss is
        # per-pixel rounding, whose total the dense-kernel oracle computes
        # (tiny tail products round to zero, 6 gray levels at sigma = 1).
        sigma = 1.0
        k = gaussian_kernel_1d(sigma)
        radius = len(k) // 2
        size = 4 * radius + 1
        img = np.zeros((size, size), dtype=np.uint8)
        img[size // 2, size // 2] = 255
        out = gaussian_blur(img, sigma)
        expected_mass = int(np.rint(255.0 * np.outer(k, k)).sum())
        assert int(out.sum()) == expected_mass
        assert abs(expected_mass - 255) <= 6
        assert abs(int(out.sum()) - 255) / 255 < 0.03

    def test_preserves_shape(self):
        img = np.zeros((9, 17), dtype=np.uint8)
        assert gaussian_blur(img, 0.6).shape == (9, 17)

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((3, 3), dtype=np.uint8), -1.0)


class TestNoiseSpec:
    def test_parameter_mismatch_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(kind="salt_pepper", sigma=2.0)
        with pytest.raises(ValueError):
            NoiseSpec(kind="gaussian_noise", rho=0.5)
        with pytest.raises(ValueError):
            NoiseSpec(kind="salt_pepper", rho=0.5, sigma=1.0)
        with pytest.raises(ValueError):
            NoiseSpec(kind="wat", rho=0.5)

    def test_apply_dispatch(self):
        rng = np.random.default_rng(5)
        img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
        assert np.array_equal(
            NoiseSpec(kind="salt_pepper", rho=0.5, seed=3).apply(img), salt_pepper(img, 0.5, 3)
        )
        assert np.array_equal(
            NoiseSpec(kind="gaussian_noise", sigma=2.0, seed=3).apply(img), gaussian_noise(img, 2.0, 3)
        )
        assert np.array_equal(NoiseSpec(kind="gaussian_blur", sigma=1.0).apply(img), gaussian_blur(img, 1.0))

    def test_shapes_preserved_by_all_kinds(self):
        img = np.zeros((6, 13), dtype=np.uint8)
        for spec in (
            NoiseSpec(kind="salt_pepper", rho=0.2, seed=1),
            NoiseSpec(kind="gaussian_noise", sigma=3.0, seed=1),
            NoiseSpec(kind="gaussian_blur", sigma=0.8),
        ):
            assert spec.apply(img).shape == img.shape
