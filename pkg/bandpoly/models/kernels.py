import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class GaussKernel1D(BaseModel):
    """一维高斯核 c·exp(−a x² − b(x−y)² − a y²)"""
    a: float = Field(..., gt=0, description="外层高斯系数")
    b: float = Field(..., ge=0, description="耦合系数")
    c: float = Field(..., gt=0, description="前置常数")
    displayed_prefactor: float = Field(default=0.0, ge=0, description="未归一化的展示前置常数")

    @property
    def s(self) -> float:
        return math.sqrt(self.a * self.a + 2.0 * self.a * self.b)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.c * np.exp(-self.a * x * x - self.b * (x - y) ** 2 - self.a * y * y)


class NystromGrid(BaseModel):
    """[−X, X] 上的 Gauss–Legendre 求积网格"""
    nodes: np.ndarray = Field(..., description="节点")
    weights: np.ndarray = Field(..., description="正权重")
    half_width: float = Field(..., gt=0, description="X")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @classmethod
    def gauss_legendre(cls, count: int, half_width: float) -> "NystromGrid":
        x, w = np.polynomial.legendre.leggauss(count)
        return cls(nodes=x * half_width, weights=w * half_width, half_width=half_width)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.nodes))) if self.size > 1 else 2.0 * self.half_width


class HermiteMode(BaseModel):
    """A₍*₎ 的张量本征模"""
    index: Tuple[int, int, int, int] = Field(..., description="多重指标 m̄")
    eigenvalue: float = Field(..., description="λ₊^{|m̄|}")

    @property
    def level(self) -> int:
        return sum(self.index)
