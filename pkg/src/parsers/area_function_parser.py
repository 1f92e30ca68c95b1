#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
声道面积函数 CSV 解析
表头: z_m,area_m2,eccentricity（偏心率列可省略，默认 0）
"""

import logging
from typing import Optional

import pandas as pd

from meshers.section import AreaFunction
from utils.common import DomainError, ParseError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ['z_m', 'area_m2']


def parse_area_function(df: pd.DataFrame, eccentricity: Optional[float] = None) -> AreaFunction:
    """
    DataFrame 转换为 AreaFunction

    Args:
        df: 含 z_m, area_m2 两列（可选 eccentricity 列）
        eccentricity: 给定时覆盖表中的偏心率
    """
    missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
    if missing:
        raise ParseError(f"面积函数缺少列: {', '.join(missing)}", 1)

    numeric = df.apply(pd.to_numeric, errors='coerce')
    bad_rows = numeric[REQUIRED_COLUMNS].isna().any(axis=1)
    if bad_rows.any():
        # 表头占第 1 行
        raise ParseError("面积函数含非数值项", int(bad_rows.idxmax()) + 2)

    if eccentricity is not None:
        ecc = float(eccentricity)
    elif 'eccentricity' in numeric.columns:
        if numeric['eccentricity'].isna().any():
            raise ParseError("偏心率列含非数值项", int(numeric['eccentricity'].isna().idxmax()) + 2)
        ecc = numeric['eccentricity'].to_numpy(dtype=float)
    else:
        ecc = 0.0

    try:
        return AreaFunction(numeric['z_m'].to_numpy(dtype=float),
                            numeric['area_m2'].to_numpy(dtype=float), ecc)
    except DomainError as e:
        raise ParseError(str(e)) from e


def read_area_function(path: str, eccentricity: Optional[float] = None) -> AreaFunction:
    try:
        df = pd.read_csv(path, comment='#', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ParseError(f"面积函数文件为空: {path}", 1) from None
    af = parse_area_function(df, eccentricity)
    logger.info(f"读取面积函数 {path}: {len(af.z)} 个站点, 长度 {af.length:g} m")
    return af
