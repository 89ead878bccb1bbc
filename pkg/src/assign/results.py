#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
分配结果数据类型
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..audio.waveform import SourceStack
from ..utils.errors import ConfigError


@dataclass(frozen=True)
class MixingMatrix:
    """
    2×M二值混合矩阵，每列恰有一个1

    assignment[j]是接收第j个估计源的行号（0对应x1，1对应x2）。
    """

    assignment: Tuple[int, ...]

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        if not assignment or any(a not in (0, 1) for a in assignment):
            raise ConfigError(f"混合矩阵的分配数组只能包含0或1: {self.assignment}")
        object.__setattr__(self, 'assignment', assignment)

    @property
    def num_sources(self) -> int:
        return len(self.assignment)

    def as_matrix(self) -> np.ndarray:
        """返回2×M的0/1矩阵"""
        matrix = np.zeros((2, len(self.assignment)))
        matrix[list(self.assignment), np.arange(len(self.assignment))] = 1.0
        return matrix

    def sources_of_row(self, row: int) -> Tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.assignment) if a == row)

    def flipped(self) -> 'MixingMatrix':
        """交换两行"""
        return MixingMatrix(tuple(1 - a for a in self.assignment))


@dataclass(frozen=True)
class Permutation:
    """C个参考到C个估计的双射，perm[i]是与参考i配对的估计序号"""

    perm: Tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ConfigError(f"不是合法的排列: {self.perm}")
        object.__setattr__(self, 'perm', perm)

    def __len__(self) -> int:
        return len(self.perm)


@dataclass(frozen=True)
class AssignmentResult:
    """
    最优分配结果

    remixed: MixIT为[Aŝ]₁、[Aŝ]₂；PIT为按排列对齐后的估计（第i路对应参考i）。
    """

    total_loss: float
    assignment: Union[MixingMatrix, Permutation]
    remixed: Optional[SourceStack] = None
