import importlib.util
import math
import unittest
import warnings
from pathlib import Path

import numpy as np
import pytest

from bandpoly.core.exceptions import ConfigValidationError
from bandpoly.models.band import BandProfile
from bandpoly.services.band_model import band_model


class TestNeumannLaplacian(unittest.TestCase):
    def test_single_site(self):
        """单点 Laplacian 为零"""
        lap = band_model.neumann_laplacian(1).toarray()
        np.testing.assert_array_equal(lap, np.zeros((1, 1)))

    def test_two_sites(self):
        lap = band_model.neumann_laplacian(2).toarray()
        np.testing.assert_array_equal(lap, np.array([[1.0, -1.0], [-1.0, 1.0]]))

    def test_constants_in_kernel(self):
        """常向量在核中"""
        lap = band_model.neumann_laplacian(3)
        np.testing.assert_array_equal(lap @ np.ones(3), np.zeros(3))

    def test_rejects_zero_dimension(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            band_model.neumann_laplacian(0)
        self.assertEqual(ctx.exception.field, "n")


class TestBuildProfile(unittest.TestCase):
    def test_single_site_profile(self):
        profile = band_model.build_profile(1, 5.0)
        np.testing.assert_array_equal(profile.j, np.array([[1.0]]))

    def test_two_site_profile(self):
        """n=2, w=1 的手算逆矩阵"""
        profile = band_model.build_profile(2, 1.0)
        expected = np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0
        self.assertLessEqual(np.max(np.abs(profile.j - expected)), 1e-14)

    def test_row_sums_and_symmetry(self):
        """行和为 1, 矩阵对称"""
        for n in (1, 16, 256):
            for w in (1.0, 8.0, 32.0):
                profile = band_model.build_profile(n, w)
                self.assertLessEqual(profile.row_sum_error, 1e-12, f"n={n}, w={w}")
                self.assertLessEqual(profile.symmetry_error, 1e-13, f"n={n}, w={w}")

    def test_entries_positive(self):
        profile = band_model.build_profile(64, 4.0)
        self.assertTrue(np.all(profile.j > 0))

    def test_decay_rate(self):
        """log J[0][d] 的斜率 ≈ −arccosh(1 + 1/(2w²)) ≈ −1/w"""
        profile = band_model.build_profile(256, 8.0)
        slope, reference = band_model.decay_rate(profile, 16, 64)
        self.assertLess(slope, 0.0)
        self.assertAlmostEqual(slope, -reference, delta=1e-8)
        self.assertAlmostEqual(-slope, 1.0 / 8.0, delta=1e-3)

    def test_invalid_bandwidth(self):
        for bad in (-1.0, 0.0, math.inf, math.nan):
            with self.assertRaises(ConfigValidationError) as ctx:
                band_model.build_profile(4, bad)
            self.assertEqual(ctx.exception.field, "w")

    def test_profile_rows(self):
        """导出 k−j ≤ 5w 的上三角条目"""
        rows = band_model.profile_rows(band_model.build_profile(2, 1.0))
        self.assertEqual([(j, k) for j, k, _ in rows], [(0, 0), (0, 1), (1, 1)])
        self.assertAlmostEqual(rows[1][2], 1.0 / 3.0, places=14)

        rows = band_model.profile_rows(band_model.build_profile(20, 1.0))
        self.assertTrue(all(0 <= k - j <= 5 for j, k, _ in rows))


class TestSampling(unittest.TestCase):
    def setUp(self):
        self.profile = band_model.build_profile(6, 2.0)

    def test_deterministic(self):
        a = band_model.sample_matrix(self.profile, 7, 3).h
        b = band_model.sample_matrix(self.profile, 7, 3).h
        np.testing.assert_array_equal(a, b)

    def test_batch_matches_single(self):
        """样本只依赖 (seed, 序号)"""
        batch = band_model.sample_batch(self.profile, 11, 5, 3)
        for offset in range(3):
            single = band_model.sample_matrix(self.profile, 11, 5 + offset).h
            np.testing.assert_array_equal(batch[offset], single)

    def test_rejects_negative_seed(self):
        with self.assertRaises(ConfigValidationError):
            band_model.sample_batch(self.profile, -1, 0, 1)

    @pytest.mark.slow
    def test_moments(self):
        """E H = 0, E|H|² = J, E H² = 0 (4 个标准误内)"""
        count = 100_000
        h = band_model.sample_batch(self.profile, 2024, 0, count)
        j = self.profile.j

        mean = h.mean(axis=0)
        se_mean = np.sqrt(j / count)
        self.assertTrue(np.all(np.abs(mean.real) <= 4 * se_mean))
        self.assertTrue(np.all(np.abs(mean.imag) <= 4 * se_mean))

        second = np.abs(h) ** 2
        se_second = second.std(axis=0) / math.sqrt(count)
        self.assertTrue(np.all(np.abs(second.mean(axis=0) - j) <= 4 * se_second))

        square = h * h
        se_square = np.abs(square).std(axis=0) / math.sqrt(count) + j / math.sqrt(count)
        self.assertTrue(np.all(np.abs(square.mean(axis=0)) <= 4 * se_square))


class TestModelConfig(unittest.TestCase):
    def test_models_build_without_deprecation(self):
        """模型以 ConfigDict 声明配置, 重新载入不触发弃用警告"""
        from pydantic.warnings import PydanticDeprecatedSince20

        import bandpoly.models as models_pkg

        for name in ("band", "effective", "harmonics", "kernels", "saddle", "spectral"):
            path = Path(models_pkg.__file__).parent / f"{name}.py"
            spec = importlib.util.spec_from_file_location(f"_bandpoly_models_{name}", path)
            module = importlib.util.module_from_spec(spec)
            with warnings.catch_warnings():
                warnings.simplefilter("error", PydanticDeprecatedSince20)
                spec.loader.exec_module(module)
        self.assertTrue(BandProfile.model_config["arbitrary_types_allowed"])


if __name__ == "__main__":
    unittest.main()
