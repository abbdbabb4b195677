"""
有效三对角模型: ν̂、𝒟、矩阵幂 ((I+𝒟)^N)₀₀ 与极限律
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from bandpoly.core.exceptions import ConfigValidationError, TruncationError
from bandpoly.core.toml_config import toml_config
from bandpoly.models.effective import EffectiveMatrix, NuMatrix
from bandpoly.models.spectral import SpectralPoint
from bandpoly.services.unitary_harmonics import euler_compose_grid, wigner_zonal

logger = logging.getLogger(__name__)

# L = diag(1, −1)
L_MATRIX = np.diag([1.0, -1.0])


class CrossoverModel:
    """有效模型与极限律"""

    def __init__(self):
        self.config = toml_config.crossover

    # ---------- ν̂ 与 𝒟 ----------

    def nu_matrix(self, zeta_abs: float, m0: int) -> NuMatrix:
        """ν = |ζ|²cosθ 在 {√(2ℓ+1)t^{(ℓ)}_{00}} 下的矩阵, ℓ = 0..m0"""
        if m0 < 1:
            raise ConfigValidationError("m0", f"截断阶必须 ≥ 1, 当前 {m0}")
        ell = np.arange(m0, dtype=float)
        off = zeta_abs ** 2 * (ell + 1.0) / np.sqrt((2.0 * ell + 1.0) * (2.0 * ell + 3.0))
        return NuMatrix(m0=m0, zeta_abs=zeta_abs, diagonal=np.zeros(m0 + 1), off_diagonal=off)

    def nu_quadrature_check(self, zeta_abs: float, ell_max: int = 6) -> float:
        """递推矩阵元与 Haar 求积 ∫ν·e_ℓ·e_ℓ' dU 的最大偏差"""
        x, wx = np.polynomial.legendre.leggauss(2 * ell_max + 4)
        trap = 2.0 * math.pi * np.arange(4) / 4 - math.pi
        g, wg = np.polynomial.legendre.leggauss(2)
        theta, sigma, delta, gamma = np.meshgrid(np.arccos(x), trap, trap, 0.5 * math.pi * g, indexing="ij")
        weight = (wx / 2.0)[:, None, None, None] * np.full((1, 4, 4, 1), 1.0 / 16.0) * (wg / 2.0)[None, None, None, :]
        u = euler_compose_grid(theta, sigma, delta, gamma)
        # ν(U) = |ζ|²·Tr(L U* L U)/2
        u_star = np.conj(np.swapaxes(u, -1, -2))
        nu = zeta_abs ** 2 * 0.5 * np.trace(L_MATRIX @ u_star @ L_MATRIX @ u, axis1=-2, axis2=-1).real
        basis = [math.sqrt(2 * ell + 1) * wigner_zonal(ell, u).real for ell in range(ell_max + 1)]

        quad = np.empty((ell_max + 1, ell_max + 1))
        for i in range(ell_max + 1):
            for j in range(ell_max + 1):
                quad[i, j] = np.sum(weight * nu * basis[i] * basis[j])
        exact = self.nu_matrix(zeta_abs, ell_max).dense()
        deviation = float(np.max(np.abs(quad - exact)))
        logger.info(f"ν̂ 递推与求积偏差: {deviation:.3e}")
        return deviation

    def d_matrix(self, n: int, w: float, point: SpectralPoint, m0: int) -> EffectiveMatrix:
        """d_ℓℓ = exp(−κℓ(ℓ+1)/(u₊W)²) − 1 + (2/N)ν̂_ℓℓ, d_{ℓ,ℓ±1} = (2/N)ν̂_{ℓ,ℓ±1}"""
        if n < 1:
            raise ConfigValidationError("n", f"N 必须 ≥ 1, 当前 {n}")
        nu = self.nu_matrix(abs(point.zeta), m0)
        ell = np.arange(m0 + 1, dtype=float)
        damping = np.expm1(-self.config.damping_coefficient * ell * (ell + 1.0) / (point.u_star * w) ** 2)
        return EffectiveMatrix(m0=m0, diagonal=damping + 2.0 / n * nu.diagonal,
                               off_diagonal=2.0 / n * nu.off_diagonal)

    def matrix_power_00(self, d: EffectiveMatrix, n: int, method: str = "eigh") -> float:
        """((I+d)^n)₀₀"""
        if n < 1:
            raise ConfigValidationError("n", f"指数必须 ≥ 1, 当前 {n}")
        if method == "binary":
            power = np.linalg.matrix_power(np.eye(d.m0 + 1) + d.dense(), n)
            return float(power[0, 0])
        if method != "eigh":
            raise ConfigValidationError("method", f"未知方法 {method}")
        vals, vecs = eigh_tridiagonal(d.diagonal, d.off_diagonal)
        growth = (1.0 + vals) ** n
        inside = vals > -1.0
        growth[inside] = np.exp(n * np.log1p(vals[inside]))
        return float(np.sum(vecs[0] ** 2 * growth))

    def semigroup_power(self, n: int, zeta_abs: float, m0: Optional[int] = None) -> float:
        """无阻尼 ((I + (2/N)ν̂)^N)₀₀"""
        nu = self.nu_matrix(zeta_abs, self._initial_m0(zeta_abs, m0))
        d = EffectiveMatrix(m0=nu.m0, diagonal=2.0 / n * nu.diagonal, off_diagonal=2.0 / n * nu.off_diagonal)
        return self.matrix_power_00(d, n)

    def _initial_m0(self, zeta_abs: float, requested: Optional[int]) -> int:
        base = self.config.base_m0
        auto = base + 4 * math.ceil(2.0 * zeta_abs ** 2)
        return max(requested or 0, base, auto)

    def _damping_norm(self, w: float, point: SpectralPoint, m0: int) -> float:
        ell = float(m0)
        return -math.expm1(-self.config.damping_coefficient * ell * (ell + 1.0) / (point.u_star * w) ** 2)

    def _power_at(self, n: int, w: float, point: SpectralPoint, m0: int) -> float:
        return self.matrix_power_00(self.d_matrix(n, w, point, m0), n)

    def predict_ratios(self, n: int, w: float, point: SpectralPoint, m0: Optional[int] = None) -> Dict[str, float]:
        """p = ((I+𝒟)^N)₀₀; loc_pred = p, gin_pred = e^{−2|ζ|²}·p"""
        level = self._initial_m0(abs(point.zeta), m0)
        if m0 is not None and level > m0:
            logger.warning(f"截断阶 m0 自动提升: {m0} -> {level}")
        while True:
            if level > self.config.max_m0:
                raise TruncationError(f"截断阶超过上限 {self.config.max_m0}")
            p = self._power_at(n, w, point, level)
            p_more = self._power_at(n, w, point, int(math.ceil(1.5 * level)))
            # 舍入下限 N·ε·‖𝒟‖
            floor = 16.0 * n * np.finfo(float).eps * self._damping_norm(w, point, level)
            bound = max(self.config.truncation_tol, floor)
            if abs(p_more - p) <= bound:
                break
            logger.warning(f"截断阶 {level} 未稳定 (|Δp|={abs(p_more - p):.3e}), 加倍")
            level *= 2
        zeta2 = abs(point.zeta) ** 2
        if bound > self.config.truncation_tol:
            logger.info(f"截断检验容差取舍入下限 {bound:.3e} (> {self.config.truncation_tol:.0e})")
        return {"gin_pred": math.exp(-2.0 * zeta2) * p, "loc_pred": p, "m0_used": level,
                "truncation_bound": bound, "truncation_shift": abs(p_more - p)}

    # ---------- 极限律 ----------

    def ginibre_limit(self, zeta: complex) -> float:
        """(1 − e^{−4|ζ|²})/(4|ζ|²)"""
        x = 4.0 * abs(zeta) ** 2
        if x < 4e-4:
            return 1.0 - x / 2.0 + x * x / 6.0 - x ** 3 / 24.0
        return -math.expm1(-x) / x

    def semigroup_limit(self, zeta_abs: float) -> float:
        """∫e^{2ν(U)}dU = sinh(2|ζ|²)/(2|ζ|²)"""
        x = 2.0 * zeta_abs ** 2
        if x < 1e-8:
            return 1.0 + x * x / 6.0
        return math.sinh(x) / x

    def log_kernel_value(self, w1: complex, w2: complex) -> complex:
        """log K(w₁,w₂) = w₁·conj(w₂) − (|w₁|²+|w₂|²)/2"""
        return w1 * np.conj(w2) - 0.5 * (abs(w1) ** 2 + abs(w2) ** 2)

    def kernel_value(self, w1: complex, w2: complex) -> complex:
        """Ginibre 核 K(w₁,w₂) = exp{w₁·conj(w₂) − (|w₁|²+|w₂|²)/2}"""
        return complex(np.exp(self.log_kernel_value(w1, w2)))

    def det2_kernel_ratio(self, zeta1: complex, zeta2: complex) -> float:
        """[K(ζ₁,ζ₁)K(ζ₂,ζ₂) − |K(ζ₁,ζ₂)|²] / |ζ₁−ζ₂|²"""
        x = abs(zeta1 - zeta2) ** 2
        if x == 0.0:
            raise ConfigValidationError("zeta2", "ζ₁ = ζ₂ 重合, 请使用汇合极限 det2_confluent")
        if math.sqrt(x) < 1e-6:
            return self.det2_confluent(x)
        # 1 − |K|² = −expm1(2·Re log K)
        return float(-math.expm1(2.0 * self.log_kernel_value(zeta1, zeta2).real) / x)

    def det2_confluent(self, x: float = 0.0) -> float:
        """x = |ζ₁−ζ₂|² → 0 的级数 (1 − e^{−x})/x"""
        return 1.0 - x / 2.0 + x * x / 6.0

    def regime_parameter(self, n: int, w: float) -> Dict[str, float]:
        """ε = (W/N)^{1/2} 与 W²/N"""
        return {"epsilon": math.sqrt(w / n), "w2_over_n": w * w / n}

    def prediction_scan(self, n: int, w_grid: Sequence[float], point: SpectralPoint,
                        m0: Optional[int] = None) -> List[Dict[str, float]]:
        """预测表: 各带宽的预测值、极限值与实际采用的截断容差"""
        rows = []
        zeta_abs = abs(point.zeta)
        for w in w_grid:
            try:
                at_w = SpectralPoint(z=point.z, zeta=point.zeta, n=n, w=w)
                pred = self.predict_ratios(n, w, at_w, m0)
                rows.append({
                    "n": n,
                    "w": float(w),
                    "w2_over_n": w * w / n,
                    "zeta_abs": zeta_abs,
                    "gin_pred": pred["gin_pred"],
                    "loc_pred": pred["loc_pred"],
                    "gin_limit": self.ginibre_limit(point.zeta),
                    "loc_limit": 1.0,
                    "truncation_bound": pred["truncation_bound"],
                })
            except Exception as e:
                logger.error(f"预测失败 w={w}: {e}")
                rows.append({"n": n, "w": float(w), "status": "error", "error": str(e)})
        return rows


# 全局实例
crossover_model = CrossoverModel()
