import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class BandProfile(BaseModel):
    """带状方差矩阵 J = (−W²Δ+1)⁻¹"""
    n: int = Field(..., ge=1, description="矩阵维数")
    w: float = Field(..., gt=0, allow_inf_nan=False, description="带宽")
    j: np.ndarray = Field(..., description="n×n 对称方差矩阵")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def row_sum_error(self) -> float:
        return float(np.max(np.abs(self.j.sum(axis=1) - 1.0)))

    @property
    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.j - self.j.T)))


class BandSample(BaseModel):
    """一次采样的非厄米高斯带状矩阵"""
    h: np.ndarray = Field(..., description="n×n 复矩阵")
    seed: int = Field(..., ge=0, description="采样种子")
    index: int = Field(default=0, ge=0, description="样本序号")

    model_config = ConfigDict(arbitrary_types_allowed=True)
