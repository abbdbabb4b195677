"""
运行时环境配置 (BANDPOLY_ 前缀环境变量)
"""
import os
from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="BANDPOLY_", extra="ignore")

    workers: Optional[int] = Field(default=None, ge=1, description="工作进程数")
    log_level: Optional[str] = Field(default=None, description="日志级别覆盖")


@lru_cache
def get_runtime_settings() -> RuntimeSettings:
    return RuntimeSettings()


def resolve_workers(flag: Optional[int] = None) -> int:
    """命令行参数 > 环境变量 > CPU 核数"""
    if flag is not None:
        return max(1, int(flag))
    env_workers = get_runtime_settings().workers
    if env_workers is not None:
        return env_workers
    return os.cpu_count() or 1
