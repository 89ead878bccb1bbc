#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PIT损失：对C!个排列穷举求最小
"""

import itertools
from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..audio.waveform import SourceStack
from ..losses.loss_base import LossSpec
from ..losses.snr import loss_matrix
from ..utils.errors import ConfigError, ShapeMismatchError
from .results import AssignmentResult, Permutation

MAX_PIT_SOURCES = 8


def pit_loss(refs: SourceStack, ests: SourceStack, spec: LossSpec = LossSpec()) -> AssignmentResult:
    """
    置换不变损失

    Σ_i loss(refs[i], ests[perm[i]])在所有排列上的最小值；并列时取字典序最小的排列。

    Args:
        refs: C个参考信号
        ests: C个估计信号
        spec: 损失配置

    Returns:
        AssignmentResult: remixed为按排列对齐后的估计

    Raises:
        ShapeMismatchError: C与M不相等
        ConfigError: C超过8
    """
    C, M = refs.num_sources, ests.num_sources
    if C != M:
        raise ShapeMismatchError(f"PIT要求参考数与估计数相等: C={C}, M={M}")
    if C > MAX_PIT_SOURCES:
        raise ConfigError(f"PIT穷举最多支持{MAX_PIT_SOURCES}个源，实际为{C}")

    matrix = loss_matrix(refs, ests, spec)
    best_total, best_perm = None, None
    for perm in itertools.permutations(range(C)):
        total = 0.0
        for i in range(C):
            total += float(matrix[i, perm[i]])
        if best_total is None or total < best_total:
            best_total, best_perm = total, perm

    return AssignmentResult(total_loss=best_total, assignment=Permutation(best_perm),
                            remixed=ests.select(best_perm))


def hungarian_pit_check(refs: SourceStack, ests: SourceStack,
                        spec: LossSpec = LossSpec()) -> Tuple[float, Permutation]:
    """
    用匈牙利算法在损失矩阵上求最优排列，作为穷举结果的交叉校验

    Returns:
        Tuple[float, Permutation]: (最小总损失, 排列)
    """
    matrix = loss_matrix(refs, ests, spec)
    rows, cols = linear_sum_assignment(matrix)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return float(matrix[rows, cols].sum()), Permutation(tuple(int(p) for p in perm))
