"""
厄米扇区高斯核谱: Mehler 闭式、Nyström 数值谱与四重张量谱
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.linalg import eigh
from scipy.special import eval_hermite

from bandpoly.core.exceptions import ConfigValidationError, QuadratureError
from bandpoly.core.toml_config import toml_config
from bandpoly.models.kernels import GaussKernel1D, HermiteMode, NystromGrid

logger = logging.getLogger(__name__)


def _alpha(w: float, u_star: float) -> float:
    return u_star * math.sqrt(2.0 + u_star ** 2 / w ** 2)


def _lambda_star(w: float, u_star: float) -> float:
    return 1.0 - (_alpha(w, u_star) - u_star ** 2 / w) / w


class GaussianSpectral:
    """高斯核谱服务"""

    def __init__(self):
        self.config = toml_config.quadrature

    def gauss_kernel(self, w: float, u_star: float) -> GaussKernel1D:
        """A₍*1₎, 前置常数取使顶端本征值为 1 的值"""
        if w <= 0 or not 0 < u_star <= 1:
            raise ConfigValidationError("w", f"参数越界: w={w}, u_star={u_star}")
        lam = _lambda_star(w, u_star)
        if lam <= 0:
            raise ConfigValidationError("w", f"λ₊ = {lam:.6g} ≤ 0")
        displayed = math.sqrt(u_star ** 2 * w / (math.pi * lam))
        return GaussKernel1D(a=2.0 * u_star ** 4 / w, b=2.0 * w * u_star ** 2,
                             c=math.sqrt(2.0) * displayed, displayed_prefactor=displayed)

    def mehler_eigs(self, k: GaussKernel1D, m_max: int) -> np.ndarray:
        """λ₀·qᵐ, q = b/(a+b+s), λ₀ = c·√(π/(a+b+s))"""
        t = k.a + k.b + k.s
        q = k.b / t
        lam0 = k.c * math.sqrt(math.pi / t)
        return lam0 * q ** np.arange(m_max + 1)

    def resolution_width(self, k: GaussKernel1D) -> float:
        """网格分辨核宽的节点间距上限 (1/4)·min(1/√b, 1/√(a+b))"""
        return 0.25 * min(1.0 / math.sqrt(k.b) if k.b > 0 else math.inf, 1.0 / math.sqrt(k.a + k.b))

    def default_grid(self, k: GaussKernel1D, nodes: Optional[int] = None) -> NystromGrid:
        """±8/√s 上的 Gauss-Legendre 网格; 节点数不足以分辨核宽时自动提高"""
        half_width = self.config.nystrom_half_width / math.sqrt(k.s)
        requested = nodes or self.config.nystrom_nodes
        width = self.resolution_width(k)
        grid = NystromGrid.gauss_legendre(requested, half_width)
        while grid.max_spacing > width:
            count = int(math.ceil(1.05 * grid.size * grid.max_spacing / width))
            grid = NystromGrid.gauss_legendre(count, half_width)
        if grid.size > requested:
            logger.warning(f"Nyström 节点数由 {requested} 提高到 {grid.size} (间距上限 {width:.4g})")
        return grid

    def _discretize(self, k: GaussKernel1D, grid: NystromGrid, weight: Optional[np.ndarray] = None):
        x = grid.nodes
        root = np.sqrt(grid.weights)
        kernel = k(x[:, None], x[None, :])
        if weight is not None:
            kernel = weight[:, None] * kernel * weight[None, :]
        return root[:, None] * kernel * root[None, :]

    def _solve(self, k: GaussKernel1D, grid: NystromGrid, count: int,
               weight: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        m = self._discretize(k, grid, weight)
        n = grid.size
        vals, vecs = eigh(m, subset_by_index=[max(0, n - count), n - 1])
        order = np.argsort(vals)[::-1]
        return vals[order], vecs[:, order] / np.sqrt(grid.weights)[:, None]

    def nystrom_eigs(self, k: GaussKernel1D, grid: NystromGrid, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """D^{1/2}KD^{1/2} 对称离散化; 返回降序本征值与节点上的本征函数"""
        width = self.resolution_width(k)
        if grid.max_spacing > width:
            diagnostics = {"nodes": grid.size, "max_spacing": grid.max_spacing, "resolution": width}
            logger.error(f"Nyström 网格间距超出核宽分辨要求: {diagnostics}")
            raise QuadratureError("Nyström 网格间距超出核宽分辨要求", diagnostics)

        vals, vecs = self._solve(k, grid, count)
        finer = NystromGrid.gauss_legendre(2 * grid.size, grid.half_width)
        check, _ = self._solve(k, finer, count)
        shift = float(np.max(np.abs(check - vals)))
        if shift > 1e-8:
            diagnostics = {"nodes": grid.size, "max_shift": shift}
            logger.error(f"Nyström 网格分辨率不足: {diagnostics}")
            raise QuadratureError("Nyström 网格分辨率不足", diagnostics)
        return vals, vecs

    def hermite_mode_values(self, k: GaussKernel1D, m: int, x: np.ndarray) -> np.ndarray:
        """H_m(√(2s)·x)·exp(−s x²)"""
        return eval_hermite(m, math.sqrt(2.0 * k.s) * x) * np.exp(-k.s * x * x)

    def eigenfunction_mismatch(self, k: GaussKernel1D, grid: NystromGrid, vec: np.ndarray, m: int) -> float:
        """数值本征函数与 Hermite 函数的加权 L² 偏差 (均归一化)"""
        target = self.hermite_mode_values(k, m, grid.nodes)

        def unit(f):
            return f / math.sqrt(float(np.sum(grid.weights * f * f)))

        a, b = unit(vec), unit(target)
        if np.sum(grid.weights * a * b) < 0:
            b = -b
        return math.sqrt(float(np.sum(grid.weights * (a - b) ** 2)))

    def a_star_spectrum(self, w: float, u_star: float, s_max: int) -> List[Dict[str, float]]:
        """四重张量谱: 第 s 层本征值 λ₊ˢ, 重数 C(s+3,3)"""
        lam = _lambda_star(w, u_star)
        return [{"level": s, "eigenvalue": lam ** s, "multiplicity": math.comb(s + 3, 3)}
                for s in range(s_max + 1)]

    def hermite_modes(self, w: float, u_star: float, level: int) -> List[HermiteMode]:
        lam = _lambda_star(w, u_star)
        modes = []
        for m0 in range(level + 1):
            for m1 in range(level + 1 - m0):
                for m2 in range(level + 1 - m0 - m1):
                    idx = (m0, m1, m2, level - m0 - m1 - m2)
                    modes.append(HermiteMode(index=idx, eigenvalue=lam ** level))
        return modes

    def mehler_identity_residual(self, w: float, u_star: float, dps: int = 50) -> float:
        """扩展精度下 |λ₊ − q|"""
        with mpmath.workdps(dps):
            w_, u_ = mpmath.mpf(w), mpmath.mpf(u_star)
            alpha = u_ * mpmath.sqrt(2 + u_ ** 2 / w_ ** 2)
            lam = 1 - (alpha - u_ ** 2 / w_) / w_
            a, b = 2 * u_ ** 4 / w_, 2 * w_ * u_ ** 2
            s = mpmath.sqrt(a * a + 2 * a * b)
            q = b / (a + b + s)
            return float(abs(lam - q))

    def spectral_report(self, w: float, u_star: float, m_max: int = 8,
                        nodes: Optional[int] = None) -> Dict[str, object]:
        k = self.gauss_kernel(w, u_star)
        grid = self.default_grid(k, nodes)
        vals, _ = self.nystrom_eigs(k, grid, m_max + 1)
        exact = self.mehler_eigs(k, m_max)
        displayed_top = k.displayed_prefactor / k.c * exact[0]
        if abs(exact[0] - 1.0) > 1e-10:
            logger.warning(f"顶端本征值偏离 1: {exact[0]:.15f}")
        logger.info(f"W={w}, u₊={u_star}: 展示前置常数的顶端本征值为 {displayed_top:.12f}")
        return {
            "w": w,
            "u_star": u_star,
            "eigenvalues": vals.tolist(),
            "mehler_error": (np.abs(vals - exact) / exact).tolist(),
            "grid_nodes": grid.size,
            "top_eigenvalue": float(vals[0]),
            "displayed_top_eigenvalue": float(displayed_top),
        }

    def cubic_shift_study(self, w_values: Sequence[float] = (40.0, 80.0, 160.0), u_star: float = 1.0,
                          phi: float = 1.0, m_max: int = 4) -> Dict[str, object]:
        """三次权 exp(W^{−3/2}φx³) 下的本征值偏移与 W 加倍指数"""
        if abs(phi) > 1:
            raise ConfigValidationError("phi", f"|φ| 必须 ≤ 1, 当前 {phi}")
        shifts, relative = [], []
        for w in w_values:
            k = self.gauss_kernel(w, u_star)
            sigma_b = 1.0 / math.sqrt(2.0 * k.b)
            half_width = self.config.nystrom_half_width / math.sqrt(k.s)
            nodes = max(self.config.nystrom_nodes, int(math.ceil(1.5 * math.pi * half_width / sigma_b)))
            grid = NystromGrid.gauss_legendre(nodes, half_width)
            base, _ = self._solve(k, grid, m_max + 1)
            weight = np.exp(w ** -1.5 * phi * grid.nodes ** 3)
            bent, _ = self._solve(k, grid, m_max + 1, weight)
            shifts.append(np.abs(bent - base))
            relative.append(np.abs(bent - base) / base)

        shifts, relative = np.array(shifts), np.array(relative)
        w_arr = np.asarray(w_values, dtype=float)
        m = np.arange(m_max + 1)
        constant = float(np.max(shifts * w_arr[:, None] ** 2 / (m[None, :] + 1)))
        exponents = np.log(relative[:-1] / relative[1:]) / np.log(w_arr[1:] / w_arr[:-1])[:, None]
        result = {
            "w_values": w_arr.tolist(),
            "shifts": shifts.tolist(),
            "constant": constant,
            "exponents": exponents.tolist(),
            "min_exponent": float(np.min(exponents)),
        }
        logger.info(f"三次扰动研究: C={constant:.4g}, 最小指数={result['min_exponent']:.4f}")
        return result


# 全局实例
gaussian_spectral = GaussianSpectral()
