#!/usr/bin/env python3
"""
带状矩阵数值实验室启动脚本
"""

import sys
from pathlib import Path


def check_dependencies():
    """检查依赖是否安装"""
    try:
        import mpmath
        import numpy
        import pydantic
        import pydantic_settings
        import scipy
        import toml
        import tqdm
        print("✅ 依赖检查通过")
        return True
    except ImportError as e:
        print(f"❌ 缺少依赖: {e}")
        print("请运行: pip install -e .")
        return False


def check_config():
    """检查配置文件"""
    config_file = Path("config.toml")
    if not config_file.exists():
        print("❌ 配置文件 config.toml 不存在")
        return False

    if not Path("config/experiments.toml").exists():
        print("⚠️  config/experiments.toml 不存在, 使用内置实验默认值")

    print("✅ 配置文件检查通过")
    return True


def create_directories():
    """创建必要的目录"""
    dirs = ["outputs", "logs"]
    for dir_name in dirs:
        Path(dir_name).mkdir(exist_ok=True)
    print("✅ 目录创建完成")


def main():
    """主函数"""
    print("🔬 带状矩阵数值实验室")
    print("=" * 50)

    # 检查依赖
    if not check_dependencies():
        sys.exit(1)

    # 检查配置
    if not check_config():
        sys.exit(1)

    # 创建目录
    create_directories()

    from bandpoly.cli.main import main as cli_main

    # 无参数时运行验收套件
    argv = sys.argv[1:] or ["verify"]
    print(f"🚀 执行: bandpoly {' '.join(argv)}")
    print("=" * 50)
    sys.exit(cli_main(argv))


if __name__ == "__main__":
    main()
