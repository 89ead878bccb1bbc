#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
按能量选择输出通道
"""

from typing import Tuple

import numpy as np

from ..audio.waveform import SourceStack, energy
from ..utils.errors import ConfigError


def select_top_energy(ests: SourceStack, C: int) -> Tuple[SourceStack, Tuple[int, ...]]:
    """
    选出能量最高的C个源

    结果按能量降序排列，能量相同时序号小者在前。

    Args:
        ests: M个估计源
        C: 选择个数

    Returns:
        Tuple[SourceStack, Tuple[int, ...]]: (选中的源, 原始序号)

    Raises:
        ConfigError: C > M 或 C < 1
    """
    if not 1 <= C <= ests.num_sources:
        raise ConfigError(f"选择个数C={C}超出范围[1, {ests.num_sources}]")
    energies = np.array([energy(source) for source in ests])
    order = np.argsort(-energies, kind='stable')[:C]
    indices = tuple(int(i) for i in order)
    return ests.select(indices), indices
