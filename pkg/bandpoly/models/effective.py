import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class NuMatrix(BaseModel):
    """ν̂ 在带状调和基下的三对角矩阵"""
    m0: int = Field(..., ge=1, description="截断阶")
    zeta_abs: float = Field(..., ge=0, description="|ζ|")
    diagonal: np.ndarray = Field(..., description="对角元 (恒为 0)")
    off_diagonal: np.ndarray = Field(..., description="(ℓ, ℓ+1) 元")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)


class EffectiveMatrix(BaseModel):
    """有效三对角生成元 𝒟"""
    m0: int = Field(..., ge=1, description="截断阶")
    diagonal: np.ndarray = Field(..., description="d_ℓℓ")
    off_diagonal: np.ndarray = Field(..., description="d_{ℓ,ℓ+1}")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)
