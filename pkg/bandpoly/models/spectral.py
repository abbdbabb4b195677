import math
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.special import logsumexp


class SpectralPoint(BaseModel):
    """谱点 (z, ζ, N, W) 及其导出量"""
    z: complex = Field(..., description="体内谱点 |z|<1")
    zeta: complex = Field(default=0j, description="偏移 ζ")
    n: int = Field(..., ge=1, description="矩阵维数")
    w: float = Field(..., gt=0, allow_inf_nan=False, description="带宽")

    @field_validator("z")
    @classmethod
    def _bulk(cls, v: complex) -> complex:
        if not abs(v) < 1.0:
            raise ValueError(f"|z| 必须小于 1, 当前 |z|={abs(v):.6g}")
        return v

    @model_validator(mode="after")
    def _positive_lambda(self):
        if self.lambda_star <= 0:
            raise ValueError(f"λ₊ = {self.lambda_star:.6g} ≤ 0, 带宽 w={self.w} 过小")
        return self

    @property
    def z1(self) -> complex:
        return self.z + self.zeta / math.sqrt(self.n)

    @property
    def z2(self) -> complex:
        return self.z - self.zeta / math.sqrt(self.n)

    @property
    def u_star(self) -> float:
        return math.sqrt(1.0 - abs(self.z) ** 2)

    @property
    def alpha(self) -> float:
        u = self.u_star
        return u * math.sqrt(2.0 + u * u / (self.w * self.w))

    @property
    def lambda_star(self) -> float:
        u = self.u_star
        return 1.0 - (self.alpha - u * u / self.w) / self.w

    def zhat(self) -> np.ndarray:
        return np.diag([self.z1, self.z2])


class LogMeanAccumulator:
    """流式对数均值 log((1/n)·Σ exp(xᵢ))"""

    def __init__(self):
        self.shift = -math.inf
        self.scaled_sum = 0.0
        self.count = 0

    def push(self, x: float) -> None:
        if math.isnan(x):
            raise ValueError("不接受 NaN")
        if self.count == 0 or x > self.shift:
            self.scaled_sum = self.scaled_sum * math.exp(self.shift - x) + 1.0 if self.count else 1.0
            self.shift = x
        else:
            self.scaled_sum += math.exp(x - self.shift)
        self.count += 1

    def push_many(self, values: Iterable[float]) -> None:
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if arr.size == 0:
            return
        if np.isnan(arr).any():
            raise ValueError("不接受 NaN")
        other = LogMeanAccumulator()
        other.shift = float(np.max(arr))
        other.scaled_sum = float(np.exp(logsumexp(arr) - other.shift)) if np.isfinite(other.shift) else float(arr.size)
        other.count = int(arr.size)
        self.merge(other)

    def merge(self, other: "LogMeanAccumulator") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.shift, self.scaled_sum, self.count = other.shift, other.scaled_sum, other.count
            return
        top = max(self.shift, other.shift)
        if top == -math.inf:
            self.scaled_sum += other.scaled_sum
        else:
            self.scaled_sum = (self.scaled_sum * math.exp(self.shift - top)
                               + other.scaled_sum * math.exp(other.shift - top))
            self.shift = top
        self.count += other.count

    @property
    def value(self) -> float:
        if self.count == 0:
            raise ValueError("空数据流")
        return self.shift + math.log(self.scaled_sum / self.count)


class RatioEstimate(BaseModel):
    """比值估计量"""
    estimate: float = Field(..., allow_inf_nan=False, description="点估计")
    stderr: float = Field(..., ge=0, description="bootstrap 标准误")
    count: int = Field(..., ge=0, description="有效样本数")
    seed: int = Field(..., description="种子")
    ci_low: Optional[float] = Field(None, description="百分位置信区间下限")
    ci_high: Optional[float] = Field(None, description="百分位置信区间上限")
    singular_count: int = Field(default=0, ge=0, description="丢弃的奇异样本数")
