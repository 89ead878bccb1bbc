#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
评价模块

在整段语音上前向（不分段），按选择方式取C路输出，计算最优排列下的平均SI-SNRi。
"""

import csv
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set

import numpy as np

from ..assign.mixit import oracle_remix_select
from ..assign.selection import select_top_energy
from ..audio.waveform import SourceStack
from ..datagen.examples import MixExample
from ..losses.loss_base import LossSpec
from ..losses.snr import si_snr_improvement
from ..separator.network import forward
from ..utils.batch_processor import BatchProcessor
from ..utils.errors import ConfigError, DataError
from ..utils.logger import logger
from .stages import CheckpointLike, resolve_checkpoint

DIRECT = "direct"
ENERGY = "energy"
ORACLE = "oracle"
SELECTION_MODES = (DIRECT, ENERGY, ORACLE)
EVAL_COLUMNS = ("model_id", "dataset_id", "selection_mode", "utterance_id", "si_snri_db")
MEAN_ROW_ID = "__mean__"


@dataclass
class EvalReport:
    """评价结果"""

    per_utterance: List[float]
    utterance_ids: List[str]
    model_id: str = ""
    dataset_id: str = ""
    selection_mode: str = DIRECT
    mean_si_snri_db: float = field(init=False)

    def __post_init__(self):
        if len(self.per_utterance) != len(self.utterance_ids):
            raise DataError("逐条结果数与样本ID数不一致")
        self.mean_si_snri_db = float(np.mean(self.per_utterance)) if self.per_utterance else math.nan


def best_permutation_si_snri(mixture, estimates: SourceStack, references: SourceStack,
                             epsilon: float = 1e-12, zero_mean: bool = False) -> float:
    """C路估计与C路参考在最优排列下的平均SI-SNRi"""
    C = references.num_sources
    if estimates.num_sources != C:
        raise ConfigError(f"估计数{estimates.num_sources}与参考数{C}不一致")
    improvement = np.array([[si_snr_improvement(mixture, estimates[j], references[i], epsilon, zero_mean)
                             for j in range(C)] for i in range(C)])
    best = -math.inf
    for perm in itertools.permutations(range(C)):
        best = max(best, float(np.mean([improvement[i, perm[i]] for i in range(C)])))
    return best


def _check_mode(selection_mode: str, M: int, C: int):
    if selection_mode not in SELECTION_MODES:
        raise ConfigError(f"未知的选择方式: {selection_mode}")
    if selection_mode == DIRECT and M != C:
        raise ConfigError(f"direct方式要求M == C，实际M={M}, C={C}")
    if selection_mode in (ENERGY, ORACLE) and M <= C:
        raise ConfigError(f"{selection_mode}方式要求M > C，实际M={M}, C={C}")
    if selection_mode == ORACLE and C != 2:
        raise ConfigError(f"oracle方式只支持C=2，实际C={C}")


def evaluate(ckpt: CheckpointLike, test: Sequence[MixExample], selection_mode: str = DIRECT,
             C: int = 2, processor: Optional[BatchProcessor] = None, model_id: str = "",
             dataset_id: str = "test", spec: LossSpec = LossSpec()) -> EvalReport:
    """
    评价模型

    Args:
        ckpt: 检查点
        test: 带参考的测试样本
        selection_mode: direct / energy / oracle
        C: 参考源数
        processor: 批量处理器
        model_id: 模型标识
        dataset_id: 数据集标识
        spec: 提供epsilon与zero_mean

    Returns:
        EvalReport: 逐条与平均SI-SNRi
    """
    params, config = resolve_checkpoint(ckpt)
    _check_mode(selection_mode, config.num_outputs, C)
    for index, example in enumerate(test):
        if example.references is None or example.references.num_sources != C:
            raise DataError(f"测试样本{example.id}需要{C}个参考源", index=index)

    def score(example: MixExample) -> float:
        ests = forward(params, config, example.mixture)
        if selection_mode == ENERGY:
            ests, _ = select_top_energy(ests, C)
        elif selection_mode == ORACLE:
            ests = oracle_remix_select(example.references, ests, spec).remixed
        return best_permutation_si_snri(example.mixture, ests, example.references,
                                        spec.epsilon, spec.zero_mean)

    processor = processor or BatchProcessor(1)
    values = processor.map_ordered(score, list(test), process_name="评价")
    report = EvalReport(per_utterance=values, utterance_ids=[example.id for example in test],
                        model_id=model_id, dataset_id=dataset_id, selection_mode=selection_mode)
    logger.info(f"评价 {model_id or '模型'} ({selection_mode}): {len(values)} 条, "
                f"平均SI-SNRi {report.mean_si_snri_db:.3f} dB")
    return report


def write_eval_csv(path: str, report: EvalReport) -> str:
    """写出评价CSV，最后一行为平均值"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EVAL_COLUMNS)
        prefix = (report.model_id, report.dataset_id, report.selection_mode)
        for utterance_id, value in zip(report.utterance_ids, report.per_utterance):
            writer.writerow(prefix + (utterance_id, repr(float(value))))
        writer.writerow(prefix + (MEAN_ROW_ID, repr(report.mean_si_snri_db)))
    return path


def audit_output_channels(ckpt: CheckpointLike, test: Sequence[MixExample],
                          processor: Optional[BatchProcessor] = None) -> Set[int]:
    """统计模型在每条测试语音上输出的通道数（过分离审计）"""
    params, config = resolve_checkpoint(ckpt)
    processor = processor or BatchProcessor(1)
    counts = processor.map_ordered(lambda example: forward(params, config, example.mixture).num_sources,
                                   list(test), process_name="通道审计")
    return set(counts)
