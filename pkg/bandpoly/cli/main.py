"""
命令行入口: profile | mc-ratio | crossover-scan | spectra | group-integrals | verify
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from bandpoly.core.exceptions import ConfigValidationError
from bandpoly.core.log_config import setup_from_config
from bandpoly.schemas.experiment import CommandName, ExperimentConfig
from bandpoly.services.config_manager import config_manager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_VALIDATION = 2

FLAG_FIELDS = ("n", "w", "w_grid", "z", "zeta", "samples", "seed", "m0", "workers", "out", "format", "filter")


def _grid(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析带宽网格 {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="矩阵维数 N")
    common.add_argument("--w", type=float, help="带宽 W")
    common.add_argument("--w-grid", dest="w_grid", type=_grid, help="带宽网格, 逗号分隔")
    common.add_argument("--z", type=str, help="体内谱点 z, 如 0.5 或 0.3+0.2j")
    common.add_argument("--zeta", type=str, help="微观偏移 ζ")
    common.add_argument("--samples", type=int, help="蒙特卡洛样本数")
    common.add_argument("--seed", type=int, help="随机种子")
    common.add_argument("--m0", type=int, help="有效模型截断阶")
    common.add_argument("--workers", type=int, help="工作进程数 (默认 BANDPOLY_WORKERS 或 CPU 核数)")
    common.add_argument("--out", type=str, help="输出路径")
    common.add_argument("--format", choices=["csv", "json"], help="输出格式")
    common.add_argument("--filter", type=str, help="verify 仅运行指定模块 (逗号分隔)")
    common.add_argument("--log-level", dest="log_level", type=str, help="日志级别")

    parser = argparse.ArgumentParser(prog="bandpoly", description="非厄米高斯随机带状矩阵数值实验室")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in CommandName:
        sub.add_parser(name.value, parents=[common])
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """命令行参数 > experiments.toml > 代码默认值"""
    merged: Dict[str, Any] = config_manager.get_command_defaults(args.command)
    for field in FLAG_FIELDS:
        value = getattr(args, field, None)
        if value is not None:
            merged[field] = value
    merged["command"] = args.command
    return ExperimentConfig(**merged)


def describe_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        field = ".".join(str(p) for p in err.get("loc", ()))
        message = err.get("msg", "")
        parts.append(f"{field}: {message}" if field else message)
    return "; ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_from_config(args.log_level)

    try:
        cfg = build_config(args)
    except ValidationError as e:
        message = describe_validation_error(e)
        logger.error(f"参数校验失败: {message}")
        print(f"参数错误: {message}", file=sys.stderr)
        return EXIT_VALIDATION

    from bandpoly.cli.writers import write_record
    from bandpoly.services.experiment_runner import experiment_runner

    try:
        record = experiment_runner.run(cfg)
    except ConfigValidationError as e:
        logger.error(f"参数校验失败: {e}")
        print(f"参数错误: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"命令 {cfg.command} 执行失败: {e}")
        print(f"执行失败: {e}", file=sys.stderr)
        return EXIT_FAILED

    path = write_record(record, cfg.out, cfg.format)
    print(path)
    if record.failed and cfg.command == CommandName.VERIFY.value:
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
