from pathlib import Path

import toml
from pydantic import BaseModel, Field

# 项目根目录
ROOT_DIR = Path(__file__).parent.parent.parent

# 加载静态配置
try:
    with open(ROOT_DIR / "config.toml") as f:
        _toml_config = toml.load(f)
except FileNotFoundError:
    _toml_config = {}


def _section(name: str) -> dict:
    return _toml_config.get(name, {})


# 日志配置
class LoggingConfig(BaseModel):
    level: str = Field(default=_section("logging").get("level", "INFO"), description="日志级别")

    file: str = Field(
        default=_section("logging").get("file", "logs/bandpoly.log"),
        description="日志文件路径"
    )

    max_bytes: int = Field(
        default=_section("logging").get("max_bytes", 20 * 1024 * 1024),
        description="单个日志文件上限"
    )

    backup_count: int = Field(
        default=_section("logging").get("backup_count", 10),
        description="日志轮转份数"
    )

    console: bool = Field(default=_section("logging").get("console", True), description="输出到控制台")


# 蒙特卡洛采样配置
class SamplingConfig(BaseModel):
    seed: int = Field(default=_section("sampling").get("seed", 20240917), description="默认种子")

    bootstrap_resamples: int = Field(
        default=_section("sampling").get("bootstrap_resamples", 200),
        description="bootstrap 重采样次数"
    )

    # 奇异样本超过该比例时中止
    singular_abort_fraction: float = Field(
        default=_section("sampling").get("singular_abort_fraction", 0.001),
        description="奇异样本比例上限"
    )

    chunk_size: int = Field(
        default=_section("sampling").get("chunk_size", 500),
        description="每个工作任务的样本数"
    )

    progress: bool = Field(default=_section("sampling").get("progress", True), description="显示进度条")


# 数值积分配置
class QuadratureConfig(BaseModel):
    euler_nodes: int = Field(
        default=_section("quadrature").get("euler_nodes", 48),
        description="Euler 角 θ/σ/γ 方向 Gauss-Legendre 节点数"
    )

    delta_nodes: int = Field(
        default=_section("quadrature").get("delta_nodes", 8),
        description="δ 方向梯形节点数"
    )

    tail_cutoff: float = Field(
        default=_section("quadrature").get("tail_cutoff", 40.0),
        description="权函数截断指数"
    )

    convergence_tol: float = Field(
        default=_section("quadrature").get("convergence_tol", 1e-9),
        description="节点加倍收敛容差"
    )

    z_remainder_fraction: float = Field(
        default=_section("quadrature").get("z_remainder_fraction", 1e-3),
        description="𝒵 求积收敛容差相对 W⁻³ 余项的比例"
    )

    nystrom_nodes: int = Field(
        default=_section("quadrature").get("nystrom_nodes", 400),
        description="Nyström 节点数"
    )

    nystrom_half_width: float = Field(
        default=_section("quadrature").get("nystrom_half_width", 8.0),
        description="Nyström 区间半宽系数"
    )

    laguerre_nodes: int = Field(
        default=_section("quadrature").get("laguerre_nodes", 8),
        description="N=1 对偶积分 Gauss-Laguerre 节点数"
    )


# 有效模型配置
class CrossoverConfig(BaseModel):
    damping_coefficient: float = Field(
        default=_section("crossover").get("damping_coefficient", 0.5),
        description="调和阻尼系数 κ"
    )

    base_m0: int = Field(default=_section("crossover").get("base_m0", 24), description="基础截断阶")

    max_m0: int = Field(default=_section("crossover").get("max_m0", 4096), description="截断阶上限")

    truncation_tol: float = Field(
        default=_section("crossover").get("truncation_tol", 1e-10),
        description="截断无关性容差"
    )


# 输出配置
class OutputConfig(BaseModel):
    directory: str = Field(default=_section("output").get("directory", "outputs"), description="输出目录")

    schema_version: str = Field(
        default=_section("output").get("schema_version", "bandpoly.run/1"),
        description="输出文件 schema 版本"
    )


# 应用配置
class TomlConfig(BaseModel):
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    crossover: CrossoverConfig = Field(default_factory=CrossoverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


# 全局配置实例
toml_config = TomlConfig()
