"""
异常定义
"""
from typing import Any, Dict, Optional


class BandpolyError(Exception):
    """基础异常"""


class ConfigValidationError(BandpolyError, ValueError):
    """参数或配置校验失败"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SingularMatrixError(BandpolyError, ArithmeticError):
    """LU 分解出现精确零主元"""


class SingularDualError(BandpolyError, ArithmeticError):
    """det 𝒬 = 0"""


class QuadratureError(BandpolyError, RuntimeError):
    """节点加倍后积分不收敛"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(f"{message} {self.diagnostics}" if self.diagnostics else message)


class TruncationError(BandpolyError, RuntimeError):
    """截断阶达到上限仍未稳定"""


class SingularSampleBudgetError(BandpolyError, RuntimeError):
    """奇异样本比例超限"""

    def __init__(self, singular: int, total: int):
        self.singular = singular
        self.total = total
        super().__init__(f"奇异样本过多: {singular}/{total}")
