"""
输出写入: CSV (全精度科学计数) 与 JSON 结果记录
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from bandpoly.core.toml_config import toml_config
from bandpoly.schemas.experiment import RunRecord

logger = logging.getLogger(__name__)

# 随运行环境变化的字段不进入 CSV
VOLATILE_KEYS = ("workers", "out", "wall_time_s")


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    if isinstance(value, (complex, np.complexfloating)):
        return f"{format_value(value.real)}{'+' if value.imag >= 0 else '-'}{format_value(abs(value.imag))}j"
    if value is None:
        return ""
    return str(value)


def jsonable(value: Any) -> Any:
    """numpy 标量/数组与复数转为 JSON 可序列化对象"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


def stable_config(config: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in config.items() if k not in VOLATILE_KEYS}


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
              config: Dict[str, Any], schema_version: Optional[str] = None,
              metadata: Optional[Dict[str, Any]] = None) -> Path:
    """写入 CSV, 文件头为 schema_version 与配置回显注释行"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    version = schema_version or toml_config.output.schema_version
    echo = json.dumps(jsonable(stable_config(config)), sort_keys=True, ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# schema_version: {version}\n")
        f.write(f"# config: {echo}\n")
        if metadata:
            f.write(f"# header: {json.dumps(jsonable(metadata), sort_keys=True, ensure_ascii=False)}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"CSV 写入完成: {path} ({count} 行)")
    return path


def write_json(path: Path, record: RunRecord) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(jsonable(record.model_dump()), f, ensure_ascii=False, indent=2)
    logger.info(f"JSON 写入完成: {path}")
    return path


def sibling_path(path: Path, suffix: str) -> Path:
    """scan.csv + predictions -> scan.predictions.csv"""
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}.csv")


def default_output(command: str, fmt: str) -> Path:
    return Path(toml_config.output.directory) / f"{command}.{fmt}"


def write_record(record: RunRecord, out: Optional[str], fmt: str) -> Path:
    """按格式写主输出, 附加表总是写为同名前缀的 CSV"""
    path = Path(out) if out else default_output(record.command, fmt)
    if fmt == "json":
        write_json(path, record)
    else:
        write_csv(path, record.header, record.rows, record.config, record.schema_version, record.metadata)
    for suffix, table in record.extra_tables.items():
        write_csv(sibling_path(path, suffix), table["header"], table["rows"], record.config,
                  record.schema_version)
    return path
