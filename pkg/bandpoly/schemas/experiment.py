from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class CommandName(str, Enum):
    """命令名称"""
    PROFILE = "profile"
    MC_RATIO = "mc-ratio"
    CROSSOVER_SCAN = "crossover-scan"
    SPECTRA = "spectra"
    GROUP_INTEGRALS = "group-integrals"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _parse_complex(v: Any) -> complex:
    if isinstance(v, str):
        text = v.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError as e:
            raise ValueError(f"无法解析复数 {v!r}") from e
    return complex(v)


class ExperimentConfig(BaseModel):
    """一次实验的完整参数"""
    model_config = ConfigDict(extra="forbid", use_enum_values=True, validate_default=True)

    command: CommandName = Field(..., description="命令名称")
    n: int = Field(64, ge=1, description="矩阵维数")
    w: float = Field(8.0, gt=0, allow_inf_nan=False, description="带宽")
    w_grid: Optional[List[float]] = Field(None, description="带宽扫描网格")
    z: complex = Field(0.5 + 0j, description="体内谱点")
    zeta: complex = Field(0.8 + 0j, description="微观偏移")
    samples: int = Field(20_000, ge=100, description="蒙特卡洛样本数")
    seed: int = Field(20240917, ge=0, description="随机种子")
    m0: Optional[int] = Field(None, ge=1, description="截断阶")
    out: Optional[str] = Field(None, description="输出路径")
    format: OutputFormat = Field(OutputFormat.CSV, description="输出格式")
    workers: Optional[int] = Field(None, ge=1, description="工作进程数")
    filter: Optional[str] = Field(None, description="verify 模块过滤")

    @field_validator("z", "zeta", mode="before")
    @classmethod
    def _complex(cls, v: Any) -> complex:
        return _parse_complex(v)

    @field_validator("z")
    @classmethod
    def _bulk(cls, v: complex) -> complex:
        if not abs(v) < 1.0:
            raise ValueError(f"|z| 必须小于 1, 当前 |z|={abs(v):.6g}")
        return v

    @field_validator("w_grid")
    @classmethod
    def _grid_positive(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and any(not x > 0 for x in v):
            raise ValueError(f"带宽网格必须全部为正: {v}")
        return v

    @model_validator(mode="after")
    def _grid_required(self):
        if self.command == CommandName.CROSSOVER_SCAN.value and (self.w_grid is None or len(self.w_grid) < 2):
            raise ValueError("w_grid: crossover-scan 需要至少 2 个带宽")
        return self


class CheckReport(BaseModel):
    """单项验收结果"""
    model_config = ConfigDict(populate_by_name=True)

    name: str = Field(..., description="检查名称")
    module: str = Field(..., description="所属模块")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="参数")
    computed: Any = Field(None, description="计算值")
    reference: Any = Field(None, description="参考值")
    tolerance: Any = Field(None, description="容差")
    passed: bool = Field(..., alias="pass", description="是否通过")
    error: Optional[str] = Field(None, description="错误信息")


class RunRecord(BaseModel):
    """一次运行的结果记录"""
    schema_version: str = Field(..., description="输出 schema 版本")
    command: str = Field(..., description="命令名称")
    config: Dict[str, Any] = Field(..., description="配置回显")
    seed: Optional[int] = Field(None, description="随机种子")
    header: List[str] = Field(default_factory=list, description="CSV 列名")
    rows: List[List[Any]] = Field(default_factory=list, description="逐点结果")
    results: Dict[str, Any] = Field(default_factory=dict, description="结构化结果")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="写入 CSV 头注释的元数据")
    extra_tables: Dict[str, Dict[str, Any]] = Field(default_factory=dict, description="附加表 (后缀 -> 表)")
    wall_time_s: float = Field(0.0, description="墙钟时间")
    failed: bool = Field(False, description="是否存在失败项")
