"""
超对称对偶对象: f(Q)、转移核 𝒦_ζ、极分解/奇异值分解与 N=1 积分表示校验
"""
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import polar

from bandpoly.core.exceptions import ConfigValidationError, QuadratureError, SingularDualError
from bandpoly.core.toml_config import toml_config
from bandpoly.models.saddle import PolarForm, SvdForm
from bandpoly.models.spectral import SpectralPoint
from bandpoly.services.mc_lab import mc_lab
from bandpoly.services.unitary_harmonics import euler_compose_grid, haar_batch

logger = logging.getLogger(__name__)


def dual_block(q: np.ndarray, point: SpectralPoint) -> np.ndarray:
    """𝒬 = [[ẑ, iQ], [iQ*, ẑ*]], 支持 (..., 2, 2) 批量"""
    q = np.asarray(q, dtype=complex)
    zhat = point.zhat()
    out = np.zeros(q.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = zhat
    out[..., :2, 2:] = 1j * q
    out[..., 2:, :2] = 1j * np.conj(np.swapaxes(q, -1, -2))
    out[..., 2:, 2:] = zhat.conj()
    return out


class SaddleCore:
    """鞍点对象服务"""

    def __init__(self):
        self.config = toml_config.quadrature

    def f_eval(self, q: np.ndarray, point: SpectralPoint):
        """f(Q) = ½(−Tr QQ* + log det 𝒬 + 2u₊²), 主值分支; (..., 2, 2) 批量输入返回数组"""
        q = np.asarray(q, dtype=complex)
        sign, logabs = np.linalg.slogdet(dual_block(q, point))
        if np.any(sign == 0):
            raise SingularDualError("det 𝒬 = 0")
        logdet = logabs + 1j * np.angle(sign)
        norm = np.sum(np.abs(q) ** 2, axis=(-2, -1))
        value = 0.5 * (-norm + logdet + 2.0 * point.u_star ** 2)
        return complex(value) if q.ndim == 2 else value

    def f_singular(self, mu1: float, mu2: float, point: SpectralPoint) -> float:
        """ζ=0 时 f 的奇异值形式 ½Σ(log(|z|²+μ²) − μ² + u₊²)"""
        z2 = abs(point.z) ** 2
        return float(0.5 * sum(math.log(z2 + m * m) - m * m + point.u_star ** 2 for m in (mu1, mu2)))

    def log_kernel_eval(self, q1: np.ndarray, q2: np.ndarray, point: SpectralPoint) -> float:
        diff = np.asarray(q1, dtype=complex) - np.asarray(q2, dtype=complex)
        f1 = self.f_eval(q1, point)
        f2 = self.f_eval(q2, point)
        log_pref = 4.0 * math.log(math.pi) + 4.0 * math.log(point.w) - 2.0 * math.log(point.lambda_star)
        return float(log_pref - point.w ** 2 * np.vdot(diff, diff).real + (f1 + f2).real)

    def kernel_eval(self, q1: np.ndarray, q2: np.ndarray, point: SpectralPoint) -> float:
        """π⁴W⁴λ₊⁻²·exp{−W²Tr(Q₁−Q₂)(Q₁−Q₂)* + f(Q₁) + f(Q₂)}"""
        value = self.log_kernel_eval(q1, q2, point)
        if value > 709.0:
            raise OverflowError(f"核值溢出 (log={value:.3f}), 请使用 log_kernel_eval")
        return math.exp(value)

    def omega_distance(self, q: np.ndarray, point: SpectralPoint) -> float:
        q = np.asarray(q, dtype=complex)
        dev = q.conj().T @ q - point.u_star ** 2 * np.eye(2)
        return float(np.linalg.norm(dev, 2))

    def in_omega(self, q: np.ndarray, w: float, point: SpectralPoint) -> bool:
        """‖Q*Q − u₊²I‖ ≤ log W/√W, 闭集"""
        return self.omega_distance(q, point) <= math.log(w) / math.sqrt(w) * (1.0 + 1e-12)

    def polar_decompose(self, q: np.ndarray) -> PolarForm:
        u, r = polar(np.asarray(q, dtype=complex), side="right")
        r = 0.5 * (r + r.conj().T)
        tr = np.trace(r).real
        det = max(np.linalg.det(r).real, 0.0)
        return PolarForm(u=u, r=r, jacobian=math.pi ** 3 * tr * tr * det)

    def svd_decompose(self, q: np.ndarray) -> SvdForm:
        v1, s, v2 = np.linalg.svd(np.asarray(q, dtype=complex))
        mu1, mu2 = float(s[0]), float(s[1])
        jac = 4.0 * math.pi ** 4 * (mu1 ** 2 - mu2 ** 2) ** 2 * mu1 * mu2
        return SvdForm(mu1=mu1, mu2=mu2, v1=v1, v2=v2, jacobian=jac)

    # ---------- N=1 校验 ----------

    def wick_theta(self, z1: complex, z2: complex) -> float:
        """E|g−z₁|²|g−z₂|², g 标准复高斯"""
        return float(2.0 + abs(z1) ** 2 + abs(z2) ** 2 + abs(z1 * z2) ** 2 + 2.0 * (np.conj(z1) * z2).real)

    def _su2_rule(self) -> Tuple[np.ndarray, np.ndarray]:
        """SU(2) 上对低阶多项式精确的 Euler 规则"""
        x, wx = np.polynomial.legendre.leggauss(3)
        trap = 2.0 * math.pi * np.arange(6) / 6
        theta, sigma, delta = np.meshgrid(np.arccos(x), trap, trap, indexing="ij")
        weight = (wx / 2.0)[:, None, None] * np.full((1, 6, 6), 1.0 / 36.0)
        u = euler_compose_grid(theta, sigma, delta, 0.0).reshape(-1, 2, 2)
        return u, weight.reshape(-1)

    def _dual_integral(self, point: SpectralPoint, nodes: int) -> float:
        """∫∫ (t₁−t₂)² e^{−t₁−t₂} ⟨det 𝒬(V₁ΛV₂)⟩ dt₁dt₂, t = μ²"""
        t, wt = np.polynomial.laguerre.laggauss(nodes)
        u, wu = self._su2_rule()
        left = u[:, None]
        right = u[None, :]
        pair_weight = wu[:, None] * wu[None, :]
        total = 0.0
        for i in range(nodes):
            for j in range(nodes):
                lam = np.diag([math.sqrt(t[i]), math.sqrt(t[j])])
                q = left @ lam @ right
                avg = np.sum(pair_weight * np.linalg.det(dual_block(q, point)).real)
                total += wt[i] * wt[j] * (t[i] - t[j]) ** 2 * avg
        return total

    def _quadrature_theta(self, point: SpectralPoint, nodes: int) -> float:
        origin = SpectralPoint(z=0j, zeta=0j, n=1, w=point.w)
        calibration = 2.0 / self._dual_integral(origin, nodes)
        return calibration * self._dual_integral(point, nodes)

    def theta_n1_check(self, point: SpectralPoint, mc_samples: int = 1_000_000, seed: Optional[int] = None,
                       workers: Optional[int] = None) -> Dict[str, float]:
        """Θ(z₁,z₂) 的三种独立求值: 蒙特卡洛、对偶积分、Wick 闭式"""
        if point.n != 1:
            raise ConfigValidationError("n", f"N=1 校验要求 n=1, 当前 {point.n}")
        seed = toml_config.sampling.seed if seed is None else seed

        nodes = self.config.laguerre_nodes
        coarse = self._quadrature_theta(point, nodes)
        refined = self._quadrature_theta(point, 2 * nodes)
        if abs(refined - coarse) > 1e-9 * abs(refined):
            diagnostics = {"coarse": coarse, "refined": refined, "nodes": nodes}
            logger.error(f"对偶积分不收敛: {diagnostics}")
            raise QuadratureError("对偶积分不收敛", diagnostics)

        mc = mc_lab.theta_estimate(point, mc_samples, seed, workers)
        result = {
            "mc": mc.estimate,
            "mc_stderr": mc.stderr,
            "quadrature": refined,
            "quadrature_coarse": coarse,
            "wick": self.wick_theta(point.z1, point.z2),
        }
        logger.info(f"N=1 校验: {result}")
        return result

    # ---------- 诊断 ----------

    def saddle_diagnostics(self, point: SpectralPoint, samples: int, seed: int) -> List[Tuple[int, float, float, bool]]:
        """Q = u₊U + G/√W 的 (样本号, Re f, Im f, 是否属于 Ω_W)"""
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0])))
        u = haar_batch(rng, samples)
        g = (rng.standard_normal((samples, 2, 2)) + 1j * rng.standard_normal((samples, 2, 2))) / math.sqrt(2.0)
        rows = []
        for i in range(samples):
            q = point.u_star * u[i] + g[i] / math.sqrt(point.w)
            try:
                f = self.f_eval(q, point)
            except SingularDualError as e:
                logger.warning(f"样本 {i} 跳过: {e}")
                continue
            rows.append((i, f.real, f.imag, self.in_omega(q, point.w, point)))
        return rows

    def dump_saddle_diagnostics(self, point: SpectralPoint, samples: int, seed: int, path: Path) -> Path:
        from bandpoly.cli.writers import write_csv

        rows = self.saddle_diagnostics(point, samples, seed)
        config = {"z": str(point.z), "zeta": str(point.zeta), "n": point.n, "w": point.w,
                  "samples": samples, "seed": seed}
        return write_csv(Path(path), ["sample_id", "f_real", "f_imag", "in_omega"], rows, config)


# 全局实例
saddle_core = SaddleCore()
