#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
key=value 配置文件解析与运行清单读写

优先级：JSON 默认值 → key=value 文件 → 命令行参数
"""

import logging
import os
from typing import Any, Callable, Dict, List, Optional, Tuple

from solvers.time_solver import SimulationConfig
from utils.common import DEFAULT_CONFIG_PATH, ConfigurationError, load_defaults

logger = logging.getLogger(__name__)


def parse_probes(text: str) -> List[Tuple[float, float, float]]:
    """'x,y,z;x,y,z' → 坐标列表"""
    probes = []
    for chunk in text.split(';'):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(',')
        if len(parts) != 3:
            raise ValueError(f"探头坐标应为 x,y,z: {chunk!r}")
        probes.append(tuple(float(p) for p in parts))
    return probes


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"不是布尔值: {text!r}")


def _optional_float(text: str) -> Optional[float]:
    value = text.strip().lower()
    if value in ('', 'none', 'auto'):
        return None
    return float(value)


# 配置键 → 解析函数
CONFIG_KEYS: Dict[str, Callable[[str], Any]] = {
    'c0': float,
    'rho0': float,
    'dt': _optional_float,
    'cfl_factor': float,
    't_total': float,
    'f0': float,
    't_gp': _optional_float,
    't_gp_factor': float,
    'lowpass_hz': _optional_float,
    'lowpass_order': int,
    'mu_w': float,
    'mu_z': float,
    'r_inf': float,
    'probes': parse_probes,
    'source_amplitude': float,
    'source_side': str.strip,
    'track_energy': _parse_bool,
    'growth_limit': float,
}


def parse_key_value(text: str, allowed: Optional[Dict[str, Callable]] = None) -> Dict[str, Any]:
    """
    解析 key=value 文本，# 开头为注释

    Raises:
        ConfigurationError: 缺少 '='、未知键、重复键或取值无法解析，带行号
    """
    allowed = CONFIG_KEYS if allowed is None else allowed
    values: Dict[str, Any] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(f"缺少 '=': {raw.strip()!r}", line_no)
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in allowed:
            raise ConfigurationError(f"未知配置项: {key}", line_no)
        if key in values:
            raise ConfigurationError(f"重复配置项: {key}", line_no)
        try:
            values[key] = allowed[key](value)
        except ValueError as e:
            raise ConfigurationError(f"{key} 取值无效 - {e}", line_no) from None
    return values


def read_key_value(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigurationError(f"找不到配置文件: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return parse_key_value(f.read())


def build_simulation_config(file_values: Optional[Dict[str, Any]] = None,
                            overrides: Optional[Dict[str, Any]] = None,
                            defaults_path: str = DEFAULT_CONFIG_PATH) -> SimulationConfig:
    """合并默认值、配置文件与命令行覆盖项（None 表示未给出）"""
    defaults = load_defaults(defaults_path).get('simulation', {})
    merged = {k: v for k, v in defaults.items() if k in CONFIG_KEYS}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(merged) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"未知配置项: {', '.join(sorted(unknown))}")
    return SimulationConfig(**merged)


def load_simulation_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None,
                           defaults_path: str = DEFAULT_CONFIG_PATH) -> SimulationConfig:
    file_values = read_key_value(path) if path else {}
    config = build_simulation_config(file_values, overrides, defaults_path)
    logger.info(f"仿真配置: c0={config.c0}, t_total={config.t_total}, "
                f"mu_z={config.mu_z}, mu_w={config.mu_w}, 探头 {len(config.probes)} 个")
    return config


def format_key_value(values: Dict[str, Any]) -> str:
    """按插入顺序输出 key=value，浮点数用 repr 保证可逐位复现"""
    lines = []
    for key, value in values.items():
        text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def write_manifest(manifest: Dict[str, Any], path: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_key_value(manifest))


def read_manifest(path: str) -> Dict[str, str]:
    """读取运行清单，值保持字符串"""
    if not os.path.exists(path):
        raise ConfigurationError(f"找不到运行清单: {path}")
    values = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip('\n')
            if not line.strip():
                continue
            if '=' not in line:
                raise ConfigurationError(f"缺少 '=': {line!r}", line_no)
            key, value = line.split('=', 1)
            values[key.strip()] = value
    return values
