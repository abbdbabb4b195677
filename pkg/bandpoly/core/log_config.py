import logging.handlers
from pathlib import Path
from typing import List, Optional

LOG_FORMAT = (
    "[%(asctime)s] | bandpoly %(levelname)s %(process)d %(name)s %(funcName)s:%(lineno)d | %(message)s"
)

FILE_HANDLER_NAME = "bandpoly.file"
CONSOLE_HANDLER_NAME = "bandpoly.console"


def resolve_log_file(log_file: str) -> Path:
    """相对路径按仓库根目录解析"""
    from bandpoly.core.toml_config import ROOT_DIR

    path = Path(log_file)
    return path if path.is_absolute() else Path(ROOT_DIR) / path


# 设置 logging 环境
def setup_logging(
        log_level: str = "INFO",
        log_file: str = "logs/bandpoly.log",
        max_bytes: int = 20 * 1024 * 1024,
        backup_count: int = 10,
        console: bool = True
) -> List[logging.Handler]:
    path = resolve_log_file(log_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT)

    # 文件转轮日志
    file_handler = logging.handlers.RotatingFileHandler(
        path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8"
    )
    file_handler.set_name(FILE_HANDLER_NAME)
    file_handler.setFormatter(formatter)
    handlers: List[logging.Handler] = [file_handler]

    # 控制台日志走 stderr，stdout 留给结果
    if console:
        console_handler = logging.StreamHandler()
        console_handler.set_name(CONSOLE_HANDLER_NAME)
        console_handler.setFormatter(formatter)
        handlers.append(console_handler)

    logging.basicConfig(level=log_level, handlers=handlers, force=True)
    return handlers


def setup_from_config(level_override: Optional[str] = None) -> List[logging.Handler]:
    """按 config.toml 与环境变量初始化日志"""
    from bandpoly.core.settings import get_runtime_settings
    from bandpoly.core.toml_config import toml_config

    cfg = toml_config.logging
    level = level_override or get_runtime_settings().log_level or cfg.level
    return setup_logging(
        log_level=level.upper(),
        log_file=cfg.file,
        max_bytes=cfg.max_bytes,
        backup_count=cfg.backup_count,
        console=cfg.console,
    )
