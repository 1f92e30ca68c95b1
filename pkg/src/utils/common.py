#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
通用工具
异常体系、日志设置、默认配置加载
"""

import json
import logging
import os
import sys
from typing import Any, Dict, Optional

SRC_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROJECT_DIR = os.path.dirname(SRC_DIR)
DEFAULT_CONFIG_PATH = os.path.join(PROJECT_DIR, "config", "impedukt_defaults.json")

TOOL_VERSION = "1.0.0"


class ImpeduktError(Exception):
    """所有计算错误的基类"""


class DomainError(ImpeduktError, ValueError):
    """参数超出定义域"""


class MeshError(ImpeduktError):
    """网格生成或校验失败"""


class ParseError(ImpeduktError):
    """文件格式错误"""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)


class AssemblyError(ImpeduktError):
    """矩阵装配失败（退化单元等）"""


class ConfigurationError(ImpeduktError):
    """配置不合法"""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)


class SimulationError(ImpeduktError):
    """时间推进过程中数值发散"""

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        if step is not None:
            message = f"{message} (时间步 {step})"
        super().__init__(message)


class DecayError(ImpeduktError):
    """探头信号在记录结束前未充分衰减"""


def setup_logging(log_file: Optional[str] = None, level: int = logging.INFO) -> logging.Logger:
    """
    设置日志系统

    Args:
        log_file: 日志文件路径，为 None 时只输出到标准错误
        level: 日志级别

    Returns:
        项目根 logger
    """
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    return logging.getLogger("impedukt")


def load_defaults(config_path: str = DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    """加载默认配置文件（JSON）"""
    if not os.path.exists(config_path):
        raise ConfigurationError(f"找不到默认配置文件: {config_path}")
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"默认配置文件格式错误 - {e}") from e


def warn(logger: logging.Logger, warnings: list, message: str):
    """记录警告：写日志并附加到结果对象的 warnings 列表"""
    logger.warning(message)
    warnings.append(message)
