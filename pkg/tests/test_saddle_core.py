import math
import unittest

import numpy as np
import pytest

from bandpoly.core.exceptions import ConfigValidationError, SingularDualError
from bandpoly.models.spectral import SpectralPoint
from bandpoly.services.saddle_core import dual_block, saddle_core
from bandpoly.services.unitary_harmonics import haar_batch


def _random_q(rng, count):
    return (rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))) / math.sqrt(2.0)


class TestFunctional(unittest.TestCase):
    def setUp(self):
        self.point = SpectralPoint(z=0.6, zeta=0j, n=16, w=10.0)
        self.rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([99, 0])))

    def test_maximum_on_saddle_manifold(self):
        """ζ=0 时 f(u₊U) = 0"""
        for u in haar_batch(self.rng, 100):
            f = saddle_core.f_eval(self.point.u_star * u, self.point)
            self.assertLessEqual(abs(f), 1e-12)

    def test_value_at_origin(self):
        """f(0) = 2 log|z| + u₊²"""
        f = saddle_core.f_eval(np.zeros((2, 2)), self.point)
        self.assertAlmostEqual(f.real, 2.0 * math.log(0.6) + self.point.u_star ** 2, places=13)
        self.assertAlmostEqual(f.imag, 0.0, places=13)

    def test_singular_value_form(self):
        """ζ=0: f 只依赖奇异值"""
        for q in _random_q(self.rng, 20):
            mu = np.linalg.svd(q, compute_uv=False)
            f = saddle_core.f_eval(q, self.point)
            self.assertAlmostEqual(f.real, saddle_core.f_singular(mu[0], mu[1], self.point), delta=1e-12)

    def test_nonpositive(self):
        """ζ=0 时 f ≤ 0, 10⁴ 个随机 Q"""
        values = saddle_core.f_eval(_random_q(self.rng, 10_000) * 1.5, self.point)
        self.assertEqual(values.shape, (10_000,))
        self.assertLessEqual(float(np.max(values.real)), 1e-12)

    def test_batch_matches_single(self):
        qs = _random_q(self.rng, 5)
        batch = saddle_core.f_eval(qs, self.point)
        for q, value in zip(qs, batch):
            self.assertAlmostEqual(saddle_core.f_eval(q, self.point), complex(value), delta=1e-14)

    def test_unitary_invariance(self):
        q = _random_q(self.rng, 1)[0]
        v1, v2 = haar_batch(self.rng, 2)
        self.assertAlmostEqual(saddle_core.f_eval(v1 @ q @ v2, self.point),
                               saddle_core.f_eval(q, self.point), delta=1e-12)

    def test_singular_dual(self):
        point = SpectralPoint(z=0j, zeta=0j, n=4, w=10.0)
        with self.assertRaises(SingularDualError):
            saddle_core.f_eval(np.zeros((2, 2)), point)

    def test_dual_block_shape(self):
        block = dual_block(_random_q(self.rng, 5), self.point)
        self.assertEqual(block.shape, (5, 4, 4))


class TestKernel(unittest.TestCase):
    def setUp(self):
        self.point = SpectralPoint(z=0.3, zeta=0j, n=16, w=4.0)

    def test_value_on_manifold(self):
        """Q₁ = Q₂ = u₊I: π⁴W⁴λ₊⁻²"""
        q = self.point.u_star * np.eye(2)
        expected = math.pi ** 4 * self.point.w ** 4 / self.point.lambda_star ** 2
        self.assertAlmostEqual(saddle_core.kernel_eval(q, q, self.point) / expected, 1.0, places=12)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        q1, q2 = 0.3 * _random_q(rng, 2) + self.point.u_star * np.eye(2)
        self.assertAlmostEqual(saddle_core.log_kernel_eval(q1, q2, self.point),
                               saddle_core.log_kernel_eval(q2, q1, self.point), places=12)

    def test_gaussian_decay(self):
        """沿单位 Frobenius 方向平移 t, 对数核下降 W²t²"""
        q1 = self.point.u_star * np.eye(2)
        e = np.array([[1.0, 0.0], [0.0, 0.0]])
        t = 0.01
        q2 = q1 + t * e
        drop = (saddle_core.log_kernel_eval(q1, q1, self.point) - saddle_core.log_kernel_eval(q1, q2, self.point))
        f_change = (saddle_core.f_eval(q1, self.point) - saddle_core.f_eval(q2, self.point)).real
        self.assertAlmostEqual(drop - f_change, self.point.w ** 2 * t * t, places=12)


class TestOmega(unittest.TestCase):
    def setUp(self):
        self.point = SpectralPoint(z=0j, zeta=0j, n=16, w=9.0)

    def test_center(self):
        self.assertTrue(saddle_core.in_omega(np.eye(2), 9.0, self.point))

    def test_origin_outside(self):
        for w in (3.0, 9.0, 100.0):
            self.assertFalse(saddle_core.in_omega(np.zeros((2, 2)), w, self.point))

    def test_boundary_closed(self):
        """‖Q*Q − u₊²I‖ 恰为 log W/√W 时属于 Ω_W"""
        w = 9.0
        radius = math.log(w) / math.sqrt(w)
        q = np.diag([math.sqrt(1.0 + radius), 1.0])
        self.assertAlmostEqual(saddle_core.omega_distance(q, self.point), radius, places=14)
        self.assertTrue(saddle_core.in_omega(q, w, self.point))


class TestDecompositions(unittest.TestCase):
    def test_round_trip(self):
        rng = np.random.default_rng(8)
        for q in _random_q(rng, 10):
            polar = saddle_core.polar_decompose(q)
            self.assertLessEqual(np.max(np.abs(polar.reconstruct() - q)), 1e-12)
            self.assertLessEqual(np.max(np.abs(polar.r - polar.r.conj().T)), 1e-14)
            svd = saddle_core.svd_decompose(q)
            self.assertLessEqual(np.max(np.abs(svd.reconstruct() - q)), 1e-12)
            self.assertGreaterEqual(svd.mu1, svd.mu2)


class TestThetaN1(unittest.TestCase):
    def test_wick_values(self):
        self.assertEqual(saddle_core.wick_theta(0j, 0j), 2.0)
        self.assertAlmostEqual(saddle_core.wick_theta(0.3, 0.3), 2.3681, places=12)

    def test_quadrature_matches_wick(self):
        """对偶积分与 Wick 闭式相对误差 ≤ 1e-3"""
        rng = np.random.default_rng(12)
        for _ in range(5):
            z = 0.6 * math.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(-math.pi, math.pi))
            zeta = 0.3 * math.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(-math.pi, math.pi))
            point = SpectralPoint(z=complex(z), zeta=complex(zeta), n=1, w=1.0)
            quad = saddle_core._quadrature_theta(point, saddle_core.config.laguerre_nodes)
            wick = saddle_core.wick_theta(point.z1, point.z2)
            self.assertLessEqual(abs(quad - wick) / wick, 1e-3)

    def test_requires_single_site(self):
        point = SpectralPoint(z=0.3, zeta=0j, n=2, w=1.0)
        with self.assertRaises(ConfigValidationError):
            saddle_core.theta_n1_check(point, 1000, 1)

    @pytest.mark.slow
    def test_three_way_agreement(self):
        point = SpectralPoint(z=0.3, zeta=0j, n=1, w=1.0)
        res = saddle_core.theta_n1_check(point, 100_000, 7, workers=1)
        self.assertAlmostEqual(res["wick"], 2.3681, places=12)
        self.assertLessEqual(abs(res["mc"] - res["wick"]), 4.0 * res["mc_stderr"])
        self.assertLessEqual(abs(res["quadrature"] - res["wick"]) / res["wick"], 1e-3)
        self.assertAlmostEqual(res["quadrature"], res["quadrature_coarse"], delta=1e-9 * res["quadrature"])


class TestDiagnostics(unittest.TestCase):
    def test_dump(self):
        import tempfile
        from pathlib import Path

        point = SpectralPoint(z=0.2, zeta=0.3, n=4, w=16.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = saddle_core.dump_saddle_diagnostics(point, 50, 3, Path(tmp) / "saddle.csv")
            lines = path.read_text(encoding="utf-8").splitlines()
        self.assertTrue(lines[0].startswith("# schema_version:"))
        self.assertTrue(lines[1].startswith("# config:"))
        self.assertEqual(lines[2], "sample_id,f_real,f_imag,in_omega")
        self.assertEqual(len(lines), 3 + 50)


if __name__ == "__main__":
    unittest.main()
