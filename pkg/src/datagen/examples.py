#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练/评价样本类型
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..audio.waveform import Waveform, SourceStack, mix
from ..utils.errors import DataError

SYNTHETIC = "synthetic"
CORPUS = "corpus"
# 无混响构造下mix(references)与mixture的逐样本容差
REFERENCE_TOLERANCE = 1e-9
MOM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MixExample:
    """一条混合信号记录"""

    id: str
    mixture: Waveform
    references: Optional[SourceStack] = None
    num_sources: int = 2
    provenance: str = SYNTHETIC
    seed: Optional[int] = None
    noisy: bool = False

    def __post_init__(self):
        if self.num_sources not in (1, 2):
            raise DataError(f"样本{self.id}的源数量必须为1或2: {self.num_sources}")
        if self.provenance not in (SYNTHETIC, CORPUS):
            raise DataError(f"未知的样本来源: {self.provenance}")
        if self.references is None:
            return
        if self.references.num_sources != self.num_sources:
            raise DataError(f"样本{self.id}的参考源数{self.references.num_sources}"
                            f"与num_sources={self.num_sources}不一致")
        if self.references.length != len(self.mixture):
            raise DataError(f"样本{self.id}的参考长度与混合长度不一致")
        if not self.noisy:
            deviation = np.max(np.abs(mix(self.references).samples - self.mixture.samples))
            if deviation > REFERENCE_TOLERANCE:
                raise DataError(f"样本{self.id}的参考之和偏离混合信号 {deviation:.3e}")


@dataclass(frozen=True, eq=False)
class MoMExample:
    """混合的混合：xbar = x1 + x2"""

    id: str
    x1: Waveform
    x2: Waveform
    xbar: Waveform
    sources_in_x1: int
    sources_in_x2: int

    def __post_init__(self):
        if len(self.x1) != len(self.x2) or len(self.xbar) != len(self.x1):
            raise DataError(f"MoM样本{self.id}的各路长度不一致")
        deviation = np.max(np.abs(self.xbar.samples - (self.x1.samples + self.x2.samples)))
        if deviation > MOM_TOLERANCE:
            raise DataError(f"MoM样本{self.id}的xbar偏离x1+x2 {deviation:.3e}")

    @classmethod
    def build(cls, example_id: str, x1: Waveform, x2: Waveform,
              sources_in_x1: int, sources_in_x2: int) -> 'MoMExample':
        if len(x1) != len(x2):
            raise DataError(f"MoM样本{example_id}的两路混合长度不一致: {len(x1)} vs {len(x2)}")
        return cls(example_id, x1, x2, mix([x1, x2]), sources_in_x1, sources_in_x2)

    @property
    def total_sources(self) -> int:
        return self.sources_in_x1 + self.sources_in_x2
