import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class EulerAngles(BaseModel):
    """U(2) 的 Euler 角坐标"""
    theta: float = Field(..., ge=0.0, le=math.pi, description="θ ∈ [0, π]")
    sigma: float = Field(..., ge=-math.pi, le=math.pi, description="σ ∈ [−π, π]")
    delta: float = Field(..., ge=-math.pi, le=math.pi, description="δ ∈ [−π, π]")
    gamma: float = Field(..., ge=-math.pi / 2, le=math.pi / 2, description="γ ∈ [−π/2, π/2]")


class WignerFunction(BaseModel):
    """不可约表示矩阵元 t^{(ℓ)}_{mk} 的指标"""
    ell: int = Field(..., ge=0, description="表示指标 ℓ")
    m: int = Field(..., description="行权重")
    k: int = Field(..., description="列权重")

    @model_validator(mode="after")
    def _in_range(self):
        if abs(self.m) > self.ell or abs(self.k) > self.ell:
            raise ValueError(f"指标越界: ℓ={self.ell}, m={self.m}, k={self.k}")
        return self


class HermitianPair(BaseModel):
    """厄米涨落对 (R₁, R₂)"""
    r1: np.ndarray = Field(..., description="2×2 厄米矩阵")
    r2: np.ndarray = Field(..., description="2×2 厄米矩阵")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("r1", "r2")
    @classmethod
    def _hermitian(cls, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if v.shape != (2, 2):
            raise ValueError(f"需要 2×2 矩阵, 得到 {v.shape}")
        if np.max(np.abs(v - v.conj().T)) > 1e-14:
            raise ValueError("矩阵不是厄米的")
        return v

    @classmethod
    def zero(cls) -> "HermitianPair":
        return cls(r1=np.zeros((2, 2)), r2=np.zeros((2, 2)))

    def scaled(self, w: float):
        """A_i = R_i/√W"""
        return self.r1 / math.sqrt(w), self.r2 / math.sqrt(w)

    def s_matrix(self, w: float) -> np.ndarray:
        """S = ½{1+R₁/√W, 1+R₂/√W}"""
        a1, a2 = self.scaled(w)
        eye = np.eye(2)
        p, q = eye + a1, eye + a2
        return 0.5 * (p @ q + q @ p)

    def trace_s(self, w: float) -> float:
        return float(np.real(np.trace(self.s_matrix(w))))

    def norm_difference(self) -> float:
        return float(np.linalg.norm(self.r1 - self.r2, 2))
