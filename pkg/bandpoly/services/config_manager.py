"""
实验配置管理服务 - 按命令提供默认参数，支持TOML格式
"""
import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import toml

from bandpoly.core.toml_config import ROOT_DIR

logger = logging.getLogger(__name__)


class ConfigManager:
    """实验配置管理器 - 文件值深度合并到代码默认值之上"""

    def __init__(self, config_file: Optional[Path] = None):
        self.config_file = Path(config_file) if config_file else ROOT_DIR / "config" / "experiments.toml"

        # 默认配置
        self.default_config = {
            "defaults": {
                "seed": 20240917,
                "format": "csv",
            },
            "commands": {
                "profile": {"n": 16, "w": 2.0},
                "mc-ratio": {"n": 64, "w": 8.0, "z": "0.5", "zeta": "0.8", "samples": 20000},
                "crossover-scan": {
                    "n": 64,
                    "z": "0.5",
                    "zeta": "0.8",
                    "samples": 20000,
                    "w_grid": [3.0, 6.0, 12.0, 24.0, 48.0],
                },
                "spectra": {"w": 20.0, "z": "0"},
                "group-integrals": {"w": 2.0, "samples": 1000000},
                "verify": {"format": "json"},
            },
        }

        # 加载配置
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """加载配置, 文件缺失时使用默认配置"""
        try:
            if not self.config_file.exists():
                logger.info("实验配置文件不存在，使用默认配置")
                return copy.deepcopy(self.default_config)
            with open(self.config_file, "r", encoding="utf-8") as f:
                loaded_config = toml.load(f)
            logger.info(f"实验配置加载成功: {self.config_file}")
            return self._deep_merge(copy.deepcopy(self.default_config), loaded_config)
        except Exception as e:
            logger.error(f"加载实验配置失败: {e}，使用默认配置")
            return copy.deepcopy(self.default_config)

    def _deep_merge(self, base: Dict, update: Dict) -> Dict:
        """深度合并字典"""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                base[key] = self._deep_merge(base[key], value)
            else:
                base[key] = value
        return base

    def get(self, key_path: str, default: Any = None) -> Any:
        """获取配置值（支持点号路径）"""
        try:
            value = self.config
            for key in key_path.split("."):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def get_command_defaults(self, command: str) -> Dict[str, Any]:
        """命令默认参数 = 公共默认 ∪ 命令专属"""
        merged = copy.deepcopy(self.get("defaults", {}))
        merged.update(copy.deepcopy(self.get(f"commands.{command}", {})))
        return merged

    def get_all_config(self) -> Dict[str, Any]:
        return copy.deepcopy(self.config)


# 全局实例
config_manager = ConfigManager()
