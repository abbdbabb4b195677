"""
带状方差矩阵与高斯非厄米系综采样
"""
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded

from bandpoly.core.exceptions import ConfigValidationError
from bandpoly.models.band import BandProfile, BandSample

logger = logging.getLogger(__name__)


def sample_generator(seed: int, index: int) -> np.random.Generator:
    """(seed, index) 对应的计数器随机流"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


class BandModel:
    """带状模型服务"""

    def neumann_laplacian(self, n: int) -> sparse.csr_matrix:
        """Neumann 边界的 −Δ: 对角 (1,2,…,2,1), 次对角 −1"""
        if n < 1:
            raise ConfigValidationError("n", f"维数必须 ≥ 1, 当前 {n}")
        if n == 1:
            return sparse.csr_matrix((1, 1))
        diag = np.full(n, 2.0)
        diag[0] = diag[-1] = 1.0
        off = -np.ones(n - 1)
        return sparse.diags([off, diag, off], [-1, 0, 1], format="csr")

    def build_profile(self, n: int, w: float) -> BandProfile:
        """J = (−W²Δ+1)⁻¹, 三对角带状求解"""
        if n < 1:
            raise ConfigValidationError("n", f"维数必须 ≥ 1, 当前 {n}")
        if not math.isfinite(w) or w <= 0:
            raise ConfigValidationError("w", f"带宽必须为正有限数, 当前 {w}")

        lap = self.neumann_laplacian(n)
        w2 = w * w
        ab = np.zeros((3, n))
        ab[1] = 1.0 + w2 * lap.diagonal()
        if n > 1:
            ab[0, 1:] = w2 * lap.diagonal(1)
            ab[2, :-1] = w2 * lap.diagonal(-1)
        # 严格对角占优
        assert np.all(ab[1] >= np.abs(ab[0]) + np.abs(ab[2]))

        j = solve_banded((1, 1), ab, np.eye(n), check_finite=False)
        j = 0.5 * (j + j.T)
        profile = BandProfile(n=n, w=w, j=j)
        logger.info(f"带状方差矩阵构建完成: n={n}, w={w}, 行和误差={profile.row_sum_error:.3e}")
        return profile

    def profile_rows(self, profile: BandProfile, max_offset: float = None) -> List[Tuple[int, int, float]]:
        """导出 0 ≤ k−j ≤ max_offset 的 (j, k, J_jk)"""
        if max_offset is None:
            max_offset = 5.0 * profile.w
        limit = min(profile.n - 1, int(math.floor(max_offset)))
        rows = []
        for jj in range(profile.n):
            for kk in range(jj, min(profile.n, jj + limit + 1)):
                rows.append((jj, kk, float(profile.j[jj, kk])))
        return rows

    def decay_rate(self, profile: BandProfile, d_min: int, d_max: int) -> Tuple[float, float]:
        """log J[0][d] 的最小二乘斜率及参考衰减率 arccosh(1 + 1/(2w²))"""
        if not 0 <= d_min < d_max < profile.n:
            raise ConfigValidationError("d_max", f"区间 [{d_min}, {d_max}] 超出 n={profile.n}")
        d = np.arange(d_min, d_max + 1)
        slope, _ = np.polyfit(d, np.log(profile.j[0, d]), 1)
        reference = math.acosh(1.0 + 1.0 / (2.0 * profile.w ** 2))
        return float(slope), reference

    def sample_batch(self, profile: BandProfile, seed: int, start: int, count: int) -> np.ndarray:
        """序号 start..start+count−1 的样本, 形状 (count, n, n)"""
        if seed < 0:
            raise ConfigValidationError("seed", f"种子必须非负, 当前 {seed}")
        scale = np.sqrt(profile.j / 2.0)
        out = np.empty((count, profile.n, profile.n), dtype=complex)
        for offset in range(count):
            g = sample_generator(seed, start + offset).standard_normal((2, profile.n, profile.n))
            out[offset] = scale * (g[0] + 1j * g[1])
        return out

    def sample_matrix(self, profile: BandProfile, seed: int, index: int = 0) -> BandSample:
        """H_jk = sqrt(J_jk/2)·(g₁ + i·g₂)"""
        h = self.sample_batch(profile, seed, index, 1)[0]
        return BandSample(h=h, seed=seed, index=index)


# 全局实例
band_model = BandModel()
