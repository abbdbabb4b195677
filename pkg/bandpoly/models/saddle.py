import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class PolarForm(BaseModel):
    """Q = U·𝓡 极分解"""
    u: np.ndarray = Field(..., description="2×2 酉矩阵")
    r: np.ndarray = Field(..., description="2×2 半正定厄米矩阵")
    jacobian: float = Field(..., ge=0, description="π³(Tr 𝓡)²·det 𝓡")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.r


class SvdForm(BaseModel):
    """Q = V₁ΛV₂ 奇异值分解"""
    mu1: float = Field(..., ge=0, description="较大奇异值")
    mu2: float = Field(..., ge=0, description="较小奇异值")
    v1: np.ndarray = Field(..., description="左酉因子")
    v2: np.ndarray = Field(..., description="右酉因子")
    jacobian: float = Field(..., ge=0, description="4π⁴(μ₁²−μ₂²)²·μ₁μ₂")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def reconstruct(self) -> np.ndarray:
        return self.v1 @ np.diag([self.mu1, self.mu2]) @ self.v2
