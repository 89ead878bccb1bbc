#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
MixIT损失：对全部2^M个混合矩阵穷举求最小

损失在同一重混信号内部耦合各源，问题不可分，只能穷举。
并列时取字典序最小的分配数组。
"""

from typing import List

import numpy as np

from ..audio.waveform import Waveform, SourceStack
from ..losses.loss_base import LossBase, LossSpec
from ..losses.loss_factory import loss_factory
from ..utils.errors import ConfigError, ShapeMismatchError
from .results import AssignmentResult, MixingMatrix

MAX_MIXIT_SOURCES = 20
# 每批向量化评估的矩阵个数上限，以及每批重混数组的元素数预算（约32 MB float64）
CHUNK_SIZE = 4096
CHUNK_ELEMENTS = 4 * 1024 * 1024
# 与最小值差距在该相对范围内的候选逐个用标量损失复核
TIE_RTOL = 1e-9


def _check_num_sources(M: int):
    if not 1 <= M <= MAX_MIXIT_SOURCES:
        raise ConfigError(f"源数量M必须在1到{MAX_MIXIT_SOURCES}之间: {M}")


def _assignment_bits(M: int, start: int, stop: int) -> np.ndarray:
    """第k行是k的M位二进制展开（最高位在前），即字典序"""
    codes = np.arange(start, stop, dtype=np.int64)[:, np.newaxis]
    shifts = np.arange(M - 1, -1, -1, dtype=np.int64)[np.newaxis, :]
    return (codes >> shifts) & 1


def chunk_size(length: int) -> int:
    """按信号长度确定每批评估的混合矩阵个数"""
    return max(1, min(CHUNK_SIZE, CHUNK_ELEMENTS // max(1, length)))


def enumerate_mixing_matrices(M: int) -> List[MixingMatrix]:
    """
    按字典序列出全部2^M个混合矩阵

    Args:
        M: 估计源数量，1 ≤ M ≤ 20

    Returns:
        List[MixingMatrix]: 混合矩阵列表，第一个为全0分配
    """
    _check_num_sources(M)
    bits = _assignment_bits(M, 0, 2 ** M)
    return [MixingMatrix(tuple(int(b) for b in row)) for row in bits]


def remix(ests: SourceStack, matrix: MixingMatrix) -> SourceStack:
    """
    按混合矩阵把估计源加回两路

    每行按源序号从左到右累加；没有分到源的行为全零。
    """
    if matrix.num_sources != ests.num_sources:
        raise ShapeMismatchError(
            f"混合矩阵列数{matrix.num_sources}与估计源数{ests.num_sources}不一致")
    rows = []
    for row in (0, 1):
        total = np.zeros(ests.length)
        for j in matrix.sources_of_row(row):
            total += ests[j].samples
        rows.append(Waveform(total, ests.sample_rate))
    return SourceStack(tuple(rows))


def _score(targets, ests: SourceStack, matrix: MixingMatrix, loss: LossBase):
    remixed = remix(ests, matrix)
    total = 0.0
    for target, row in zip(targets, remixed):
        total += loss.value(target.samples, row.samples)
    return total, remixed


def _search(targets, ests: SourceStack, spec: LossSpec) -> AssignmentResult:
    M = ests.num_sources
    _check_num_sources(M)
    if M < 2:
        raise ConfigError(f"MixIT需要至少2个估计源，实际为{M}")
    for index, target in enumerate(targets):
        if len(target) != ests.length:
            raise ShapeMismatchError(
                f"第{index}路混合长度为{len(target)}，估计长度为{ests.length}", index=index)

    loss = loss_factory.create_loss(spec)
    sources = ests.as_array()
    total_count = 2 ** M
    all_losses = np.empty(total_count)
    step = chunk_size(ests.length)
    for start in range(0, total_count, step):
        stop = min(start + step, total_count)
        bits = _assignment_bits(M, start, stop).astype(np.float64)
        first_rows = (1.0 - bits) @ sources
        second_rows = bits @ sources
        all_losses[start:stop] = (loss.batch_value(targets[0].samples, first_rows)
                                  + loss.batch_value(targets[1].samples, second_rows))

    best_vector = float(np.min(all_losses))
    tolerance = TIE_RTOL * max(1.0, abs(best_vector))
    candidates = np.flatnonzero(all_losses <= best_vector + tolerance)

    best = None
    for code in candidates:
        bits = _assignment_bits(M, int(code), int(code) + 1)[0]
        matrix = MixingMatrix(tuple(int(b) for b in bits))
        total, remixed = _score(targets, ests, matrix, loss)
        if best is None or total < best.total_loss:
            best = AssignmentResult(total_loss=total, assignment=matrix, remixed=remixed)
    return best


def mixit_loss(x1: Waveform, x2: Waveform, ests: SourceStack,
               spec: LossSpec = LossSpec()) -> AssignmentResult:
    """
    MixIT损失

    在所有混合矩阵A上最小化 Σ_i loss(x_i, [Aŝ]_i)。

    Args:
        x1: 第一路混合
        x2: 第二路混合
        ests: M个估计源（M ≥ 2）
        spec: 损失配置

    Returns:
        AssignmentResult: 最小总损失、获胜混合矩阵及两路重混信号
    """
    return _search((x1, x2), ests, spec)


def oracle_remix_select(refs: SourceStack, ests: SourceStack,
                        spec: LossSpec = LossSpec()) -> AssignmentResult:
    """
    以真实源为目标的重混选择（仅用于oracle基线评价）

    Args:
        refs: 2个真实源
        ests: M个估计源

    Returns:
        AssignmentResult: remixed的第i路与refs[i]对应
    """
    if refs.num_sources != 2:
        raise ShapeMismatchError(f"oracle重混需要2个参考源，实际为{refs.num_sources}")
    return _search((refs[0], refs[1]), ests, spec)
