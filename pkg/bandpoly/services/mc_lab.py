"""
Θ 比值的对数域蒙特卡洛估计
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.special import logsumexp
from scipy.stats import bootstrap
from tqdm import tqdm

from bandpoly.core.exceptions import (
    ConfigValidationError,
    SingularMatrixError,
    SingularSampleBudgetError,
)
from bandpoly.core.settings import resolve_workers
from bandpoly.core.toml_config import toml_config
from bandpoly.models.band import BandProfile
from bandpoly.models.spectral import LogMeanAccumulator, RatioEstimate, SpectralPoint
from bandpoly.services.band_model import band_model

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _cached_profile(n: int, w: float) -> BandProfile:
    return band_model.build_profile(n, w)


def _lme(x: np.ndarray, axis: int = -1) -> np.ndarray:
    return logsumexp(x, axis=axis) - math.log(x.shape[axis])


def _logdet_chunk(args: Tuple[int, float, complex, complex, complex, int, int, int]):
    """工作进程入口: 一段样本的 (L₀, L₁, L₂, 奇异标记)"""
    n, w, z, z1, z2, seed, start, count = args
    profile = _cached_profile(n, w)
    h = band_model.sample_batch(profile, seed, start, count)
    eye = np.eye(n)
    logs = []
    singular = np.zeros(count, dtype=bool)
    for shift in (z, z1, z2):
        sign, logabs = np.linalg.slogdet(h - shift * eye)
        singular |= np.abs(sign) == 0
        logs.append(2.0 * logabs)
    return logs[0], logs[1], logs[2], singular


class McLab:
    """蒙特卡洛实验服务"""

    def __init__(self):
        self.config = toml_config.sampling

    def spectral_point(self, z: complex, zeta: complex, n: int, w: float) -> SpectralPoint:
        try:
            return SpectralPoint(z=z, zeta=zeta, n=n, w=w)
        except ValidationError as e:
            err = e.errors()[0]
            field = ".".join(str(p) for p in err.get("loc", ())) or "z"
            raise ConfigValidationError(field, err.get("msg", str(e))) from e

    def log_abs_det2(self, m: np.ndarray, shift: complex = 0.0) -> float:
        """log|det(m − shift·I)|²"""
        m = np.asarray(m, dtype=complex)
        if not np.all(np.isfinite(m)):
            raise ConfigValidationError("m", "矩阵含非有限元素")
        sign, logabs = np.linalg.slogdet(m - shift * np.eye(m.shape[0]))
        if sign == 0:
            raise SingularMatrixError(f"矩阵精确奇异 (shift={shift})")
        return float(2.0 * logabs)

    def log_mean_exp(self, values: Iterable[float]) -> float:
        acc = LogMeanAccumulator()
        acc.push_many(np.fromiter(values, dtype=float) if not isinstance(values, np.ndarray) else values)
        return acc.value

    def _chunks(self, samples: int) -> List[Tuple[int, int]]:
        size = max(1, self.config.chunk_size)
        return [(start, min(size, samples - start)) for start in range(0, samples, size)]

    def sample_logdets(self, point: SpectralPoint, seed: int, start: int, count: int):
        """样本区间 [start, start+count) 的对数行列式"""
        return _logdet_chunk((point.n, point.w, point.z, point.z1, point.z2, seed, start, count))

    def collect_logdets(self, point: SpectralPoint, samples: int, seed: int,
                        workers: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        """按样本序号拼接各工作进程的结果, 剔除奇异样本"""
        if seed < 0:
            raise ConfigValidationError("seed", f"种子必须非负, 当前 {seed}")
        workers = resolve_workers(workers)
        tasks = [(point.n, point.w, point.z, point.z1, point.z2, seed, start, count)
                 for start, count in self._chunks(samples)]
        show = self.config.progress and workers > 1

        if workers == 1:
            parts = [_logdet_chunk(t) for t in tqdm(tasks, disable=not show, desc="采样")]
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                parts = list(tqdm(executor.map(_logdet_chunk, tasks), total=len(tasks),
                                  disable=not show, desc="采样"))

        l0 = np.concatenate([p[0] for p in parts])
        l1 = np.concatenate([p[1] for p in parts])
        l2 = np.concatenate([p[2] for p in parts])
        singular = np.concatenate([p[3] for p in parts])
        bad = int(singular.sum())
        if bad > self.config.singular_abort_fraction * samples:
            raise SingularSampleBudgetError(bad, samples)
        if bad:
            logger.warning(f"丢弃奇异样本 {bad}/{samples}")
        keep = ~singular
        return l0[keep], l1[keep], l2[keep], bad

    def _bootstrap(self, statistic, data, seed: int):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xB007])))
        count = data[0].shape[0]
        res = bootstrap(
            data,
            statistic,
            n_resamples=self.config.bootstrap_resamples,
            batch=max(1, int(5_000_000 // max(count, 1))),
            vectorized=True,
            paired=True,
            method="percentile",
            rng=rng,
        )
        return float(res.standard_error), float(res.confidence_interval.low), float(res.confidence_interval.high)

    def estimate_ratios(self, point: SpectralPoint, samples: int, seed: int,
                        workers: Optional[int] = None) -> Dict[str, RatioEstimate]:
        """共享样本估计 gin 与 loc 比值"""
        if samples < 100:
            raise ConfigValidationError("samples", f"样本数必须 ≥ 100, 当前 {samples}")
        l0, l1, l2, bad = self.collect_logdets(point, samples, seed, workers)

        def gin_stat(a, b, c, axis=-1):
            return np.exp(_lme(b + c, axis) - 0.5 * _lme(2 * b, axis) - 0.5 * _lme(2 * c, axis))

        def loc_stat(a, b, c, axis=-1):
            return np.exp(_lme(b + c, axis) - _lme(2 * a, axis))

        out = {}
        for name, stat in (("gin", gin_stat), ("loc", loc_stat)):
            estimate = float(stat(l0, l1, l2))
            stderr, low, high = self._bootstrap(stat, (l0, l1, l2), seed)
            out[name] = RatioEstimate(estimate=estimate, stderr=stderr, count=int(l0.size), seed=seed,
                                      ci_low=low, ci_high=high, singular_count=bad)
        logger.info(f"比值估计完成: n={point.n}, w={point.w}, gin={out['gin'].estimate:.6f}, "
                    f"loc={out['loc'].estimate:.6f}")
        return out

    def theta_estimate(self, point: SpectralPoint, samples: int, seed: int,
                       workers: Optional[int] = None) -> RatioEstimate:
        """Θ(z₁,z₂) = E|det(H−z₁)|²|det(H−z₂)|²"""
        if samples < 100:
            raise ConfigValidationError("samples", f"样本数必须 ≥ 100, 当前 {samples}")
        l0, l1, l2, bad = self.collect_logdets(point, samples, seed, workers)

        def theta_stat(b, c, axis=-1):
            return np.exp(_lme(b + c, axis))

        estimate = float(theta_stat(l1, l2))
        stderr, low, high = self._bootstrap(theta_stat, (l1, l2), seed)
        return RatioEstimate(estimate=estimate, stderr=stderr, count=int(l1.size), seed=seed,
                             ci_low=low, ci_high=high, singular_count=bad)


# 全局实例
mc_lab = McLab()
