import math
import unittest

import mpmath
import numpy as np
import pytest

from bandpoly.core.exceptions import ConfigValidationError
from bandpoly.models.harmonics import EulerAngles, HermitianPair
from bandpoly.services.acceptance import z_pairs
from bandpoly.services.unitary_harmonics import EULER_MASS, haar_batch, unitary_harmonics, wigner_zonal

SIGMA = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1])))


class TestHaar(unittest.TestCase):
    def test_unitary(self):
        u = unitary_harmonics.haar_sample(3)
        self.assertLessEqual(np.max(np.abs(u.conj().T @ u - np.eye(2))), 1e-14)

    def test_batch_unitary(self):
        u = haar_batch(_rng(), 500)
        gram = np.conj(np.swapaxes(u, -1, -2)) @ u
        self.assertLessEqual(np.max(np.abs(gram - np.eye(2))), 1e-14)

    @pytest.mark.slow
    def test_moments(self):
        """E|U₁₁|² = 1/2, E t^{(1)}_{00} = 0"""
        m = unitary_harmonics.haar_moments(1_000_000, 17)
        self.assertLessEqual(abs(m["u11_sq"] - 0.5), 4 * m["u11_sq_stderr"])
        self.assertLessEqual(abs(m["t1_00"]), 4 * m["t1_00_stderr"])

    def test_left_invariance(self):
        """固定 V, VU 与 U 的矩在统计误差内一致"""
        u = haar_batch(_rng(5), 200_000)
        v = unitary_harmonics.haar_sample(8)
        a = np.abs(u[:, 0, 0]) ** 4
        b = np.abs((v @ u)[:, 0, 0]) ** 4
        se = math.hypot(a.std(), b.std()) / math.sqrt(a.size)
        self.assertLessEqual(abs(a.mean() - b.mean()), 4 * se)
        self.assertAlmostEqual(a.mean(), 1.0 / 3.0, delta=4 * a.std() / math.sqrt(a.size))


class TestEuler(unittest.TestCase):
    def test_identity(self):
        u = unitary_harmonics.euler_compose(EulerAngles(theta=0.0, sigma=0.0, delta=0.0, gamma=0.0))
        np.testing.assert_allclose(u, np.eye(2), atol=1e-15)

    def test_antidiagonal(self):
        """θ = π 时为 i·反对角阵"""
        u = unitary_harmonics.euler_compose(EulerAngles(theta=math.pi, sigma=0.0, delta=0.0, gamma=0.0))
        np.testing.assert_allclose(u, np.array([[0, 1j], [1j, 0]]), atol=1e-15)

    def test_determinant_and_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            angles = EulerAngles(theta=rng.uniform(0.01, math.pi - 0.01), sigma=rng.uniform(-math.pi, math.pi),
                                 delta=rng.uniform(-math.pi, math.pi), gamma=rng.uniform(-1.5, 1.5))
            u = unitary_harmonics.euler_compose(angles)
            self.assertAlmostEqual(np.linalg.det(u), np.exp(2j * angles.gamma), delta=1e-13)
            back = unitary_harmonics.euler_compose(unitary_harmonics.euler_decompose(u))
            self.assertLessEqual(np.max(np.abs(back - u)), 1e-12)

    def test_decompose_rejects_non_unitary(self):
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.euler_decompose(2.0 * np.eye(2))

    def test_measure_mass(self):
        self.assertAlmostEqual(EULER_MASS, 8.0 * math.pi ** 3)


class TestWigner(unittest.TestCase):
    def setUp(self):
        self.u = haar_batch(_rng(11), 4)

    def test_trivial_representation(self):
        for u in self.u:
            self.assertAlmostEqual(unitary_harmonics.wigner_t(0, 0, 0, u), 1.0, places=14)

    def test_legendre_p1(self):
        for theta in (0.1, 0.7, 2.0, 3.0):
            self.assertAlmostEqual(unitary_harmonics.legendre_p(1, 0, 0, theta), math.cos(theta), places=13)

    def test_legendre_polynomials(self):
        """P^{(ℓ)}_{00}(cos θ) 为 Legendre 多项式"""
        for ell in range(6):
            for theta in (0.3, 1.2, 2.5):
                ref = float(mpmath.legendre(ell, math.cos(theta)))
                self.assertAlmostEqual(unitary_harmonics.legendre_p(ell, 0, 0, theta), ref, places=12)

    def test_unitarity_of_rows(self):
        """Σ_k |t^{(ℓ)}_{mk}|² = 1"""
        for ell in range(11):
            t = unitary_harmonics.wigner_matrix(ell, self.u[0])
            self.assertLessEqual(np.max(np.abs(np.sum(np.abs(t) ** 2, axis=1) - 1.0)), 1e-10)

    def test_homomorphism(self):
        u1, u2 = self.u[1], self.u[2]
        for ell in range(6):
            lhs = unitary_harmonics.wigner_matrix(ell, u1 @ u2)
            rhs = unitary_harmonics.wigner_matrix(ell, u1) @ unitary_harmonics.wigner_matrix(ell, u2)
            self.assertLessEqual(np.max(np.abs(lhs - rhs)), 1e-9)

    def test_zonal_matches_column(self):
        for ell in range(5):
            self.assertAlmostEqual(complex(wigner_zonal(ell, self.u[3])),
                                   unitary_harmonics.wigner_t(ell, 0, 0, self.u[3]), places=12)

    def test_index_range(self):
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.wigner_t(1, 2, 0, self.u[0])

    def test_schur_orthogonality(self):
        for l1 in range(7):
            for l2 in range(7):
                ref = 1.0 / (2 * l1 + 1) if l1 == l2 else 0.0
                self.assertAlmostEqual(unitary_harmonics.schur_overlap(l1, l2), ref, delta=1e-8)

    def test_legendre_asymptotics(self):
        """小角区二次渐近与 k+1,k 领头项"""
        res = unitary_harmonics.legendre_asymptotics()
        self.assertLessEqual(res["ell1_error"], 1e-12)
        self.assertLessEqual(res["kappa"], 5.0)
        self.assertLessEqual(res["offdiag_tolerance_ratio"], 1.0)


class TestBracket(unittest.TestCase):
    def test_normalization(self):
        value = unitary_harmonics.k_bracket(HermitianPair.zero(), 20.0, 1.0, lambda u, *a: np.ones(u.shape[:-2]))
        self.assertAlmostEqual(value, 1.0, places=12)

    def test_moments(self):
        """⟨sin²γ⟩ 与闭式之比在 1 ± 10/W² 内, ⟨sin γ⟩ = 0"""
        for w in (20.0, 40.0, 80.0):
            moments = unitary_harmonics.bracket_moments(HermitianPair.zero(), w, 1.0)
            for name in ("sin2_gamma", "sin2_sigma"):
                ratio = moments[name]["computed"] / moments[name]["reference"]
                self.assertLessEqual(abs(ratio - 1.0), 10.0 / w ** 2, f"{name}, w={w}")
            self.assertLessEqual(abs(moments["sin_gamma"]["computed"]), 1e-12)

    def test_z0_scaling(self):
        rows = unitary_harmonics.z0_scaling(20.0, 1.0)
        values = [r["z0_times_trace_s_sq"] for r in rows]
        self.assertLessEqual((max(values) - min(values)) / max(values), 20.0 / 20.0 ** 2)


class TestHeat(unittest.TestCase):
    def test_trivial_harmonic(self):
        self.assertAlmostEqual(unitary_harmonics.heat_eig(0, 20.0, 1.0), 1.0, places=12)

    def test_first_harmonic(self):
        """ℓ=1, W=20: 1 − 2/(2·400) + O(W⁻⁴)"""
        value = unitary_harmonics.heat_eig(1, 20.0, 1.0)
        closed = unitary_harmonics.heat_closed_form(1, 20.0, 1.0, coefficient=0.5)
        self.assertAlmostEqual(closed, 1.0 - 2.0 / 800.0, places=15)
        self.assertLessEqual(abs(value - closed), 50.0 / 20.0 ** 4)

    def test_displayed_constant(self):
        self.assertAlmostEqual(unitary_harmonics.heat_closed_form(1, 20.0, 1.0, coefficient=0.125), 0.999375,
                               places=15)

    @pytest.mark.slow
    def test_convergence_order(self):
        """W 加倍误差至少缩小 8 倍"""
        ells = [1, 2, 3, 4]
        devs = []
        for w in (20.0, 40.0, 80.0):
            eig = unitary_harmonics.heat_eigs(ells, w, 1.0)
            devs.append([abs(eig[ell] - unitary_harmonics.heat_closed_form(ell, w, 1.0, coefficient=0.5))
                         for ell in ells])
        devs = np.array(devs)
        self.assertTrue(np.all(devs[:-1] / devs[1:] >= 8.0))
        self.assertLessEqual(devs[2, 0], 1e-6)

    def test_rejects_unresolved(self):
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.heat_eig(30, 20.0, 1.0)


class TestZExpansion(unittest.TestCase):
    def test_zero_pair(self):
        res = unitary_harmonics.z_expansion_check(HermitianPair.zero(), 20.0, 1.0)
        self.assertEqual(res["delta_formula"], 0.0)
        self.assertLessEqual(abs(res["z_quad"] - 1.0), 20.0 / 20.0 ** 2)

    def test_commuting_pair(self):
        """对易对的对易子项为 0, 𝒵 − 1 与无迹项差 ≤ 20/W²"""
        w = 40.0
        pair = HermitianPair(r1=np.diag([0.6, -0.6]), r2=np.diag([0.6, -0.6]) - 0.8 * SIGMA[3] / math.sqrt(w))
        res = unitary_harmonics.z_expansion_check(pair, w, 1.0)
        self.assertLess(res["delta_formula"], 0.0)
        self.assertLessEqual(abs(res["remainder"]), 20.0 / w ** 2)

    def test_delta_formula_commutator(self):
        """[σ₁, σ₂] 项"""
        w = 16.0
        pair = HermitianPair(r1=SIGMA[1] * 0.5, r2=SIGMA[2] * 0.5)
        trace_s = pair.trace_s(w)
        expected = 0.25 * 0.25 * 8.0 / (2.0 * trace_s) - 2.0 * 0.5 / (4.0 * w * trace_s)
        self.assertAlmostEqual(unitary_harmonics.delta_formula(pair, w, 1.0), expected, places=14)

    def test_window(self):
        pair = HermitianPair(r1=SIGMA[3] * 2.0, r2=-SIGMA[3] * 2.0)
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.z_expansion_check(pair, 20.0, 1.0)

    def test_all_check_pairs_converge(self):
        """验收用的每一对在 W=20, 40 处求积收敛"""
        for w in (20.0, 40.0):
            for name, pair in z_pairs(w).items():
                with self.subTest(pair=name, w=w):
                    res = unitary_harmonics.z_expansion_check(pair, w, 1.0)
                    self.assertTrue(math.isfinite(res["z_quad"]))
                    self.assertLessEqual(abs(res["z_quad"] - 1.0), 0.1)
                    self.assertEqual(res["quadrature_tol"], unitary_harmonics.z_tolerance(w))

    def test_tolerance_tracks_remainder_scale(self):
        cfg = unitary_harmonics.config
        self.assertAlmostEqual(unitary_harmonics.z_tolerance(20.0), cfg.z_remainder_fraction / 8000.0, places=18)
        self.assertGreaterEqual(unitary_harmonics.z_tolerance(20.0), 1.2e-8)
        self.assertEqual(unitary_harmonics.z_tolerance(1e4), cfg.convergence_tol)

    @pytest.mark.slow
    def test_noncommuting_scaling(self):
        ws = np.array([20.0, 40.0, 80.0])
        rem = []
        for w in ws:
            r1 = 0.5 * SIGMA[1]
            pair = HermitianPair(r1=r1, r2=r1 + SIGMA[2] / math.sqrt(w))
            rem.append(abs(unitary_harmonics.z_expansion_check(pair, w, 1.0)["remainder"]))
        slope = -np.polyfit(np.log(ws), np.log(rem), 1)[0]
        self.assertGreaterEqual(slope, 1.9)


class TestBessel(unittest.TestCase):
    def test_values(self):
        self.assertEqual(unitary_harmonics.bessel_i0(0.0), 1.0)
        self.assertAlmostEqual(unitary_harmonics.bessel_i0(1.0), 1.2660658777520082, places=14)

    def test_against_extended_precision(self):
        for x in (0.5, 3.0, 14.9, 15.0, 15.1, 40.0, 300.0):
            ref = float(mpmath.besseli(0, x))
            self.assertLessEqual(abs(unitary_harmonics.bessel_i0(x) - ref) / ref, 1e-12)

    def test_log_variant(self):
        with mpmath.workdps(30):
            ref = float(mpmath.log(mpmath.besseli(0, 1000)))
        self.assertAlmostEqual(unitary_harmonics.bessel_i0_log(1000.0), ref, places=10)
        with self.assertRaises(OverflowError):
            unitary_harmonics.bessel_i0(1000.0)

    def test_negative(self):
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.bessel_i0(-1.0)


class TestBerezin(unittest.TestCase):
    def test_identical_sets(self):
        res = unitary_harmonics.berezin_check((1.0, 0.4), (1.1, 0.3), (1.0, 0.4), (1.1, 0.3), 2.0, 2000, 1)
        self.assertAlmostEqual(res["group_ratio"], 1.0, places=14)
        self.assertAlmostEqual(res["bessel_ratio"], 1.0, places=14)

    def test_degenerate_rejected(self):
        with self.assertRaises(ConfigValidationError):
            unitary_harmonics.berezin_check((0.5, 0.5), (1.0, 0.3), (1.0, 0.4), (1.1, 0.3), 2.0, 1000, 1)

    @pytest.mark.slow
    def test_generic_sets(self):
        """W²μμ' ≤ 5, 10⁶ 对 Haar 样本: 4 个标准误内一致"""
        res = unitary_harmonics.berezin_check((1.0, 0.4), (1.1, 0.3), (0.9, 0.5), (1.2, 0.2), 2.0, 1_000_000, 20240917)
        self.assertLessEqual(abs(res["group_ratio"] - res["bessel_ratio"]), 4.0 * res["group_stderr"])


if __name__ == "__main__":
    unittest.main()
