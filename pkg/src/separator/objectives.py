#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练目标：MixIT（教师）与PIT（学生、微调、蒸馏）的批量损失与梯度

离散的最优分配在一步之内视为常数，梯度只沿获胜分配回传。
"""

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..assign.mixit import mixit_loss
from ..assign.pit import pit_loss
from ..assign.results import AssignmentResult
from ..audio.waveform import Waveform, SourceStack
from ..losses.loss_base import LossSpec
from ..losses.loss_factory import loss_factory
from ..utils.batch_processor import BatchProcessor
from ..utils.errors import ConfigError, NonFiniteLossError, ShapeMismatchError
from .config import SeparatorConfig
from .network import SeparatorParams, backward_array, forward_array

MIXIT = "mixit"
PIT = "pit"


@dataclass(frozen=True, eq=False)
class MixitExample:
    """MixIT训练样本：网络输入为x1 + x2"""

    x1: Waveform
    x2: Waveform
    example_id: str = ""


@dataclass(frozen=True, eq=False)
class PitExample:
    """PIT训练样本：混合信号与C路目标"""

    mixture: Waveform
    targets: SourceStack
    example_id: str = ""


@dataclass
class ExampleResult:
    """单个样本的损失、分配与梯度"""

    loss: float
    assignment: AssignmentResult
    grads: "OrderedDict[str, np.ndarray]"


def _check_output(output: np.ndarray, index: int):
    if not np.all(np.isfinite(output)):
        raise NonFiniteLossError("网络输出包含NaN或Inf", index=index)


def example_loss_and_grad(params: SeparatorParams, config: SeparatorConfig, example,
                          loss_mode: str, spec: LossSpec, index: int = 0) -> ExampleResult:
    """
    计算单个样本的最优分配损失与参数梯度

    Args:
        params: 网络参数
        config: 网络配置
        example: MixitExample或PitExample
        loss_mode: "mixit"或"pit"
        spec: 损失配置
        index: 样本在批中的序号，用于报错

    Returns:
        ExampleResult: 损失与梯度
    """
    loss = loss_factory.create_loss(spec)

    if loss_mode == MIXIT:
        if len(example.x1) != len(example.x2):
            raise ShapeMismatchError("x1与x2长度不一致", index=index)
        mixture = example.x1.samples + example.x2.samples
        output, cache = forward_array(params, config, mixture)
        _check_output(output, index)
        ests = SourceStack.from_array(output, example.x1.sample_rate)
        result = mixit_loss(example.x1, example.x2, ests, spec)
        grad_output = np.zeros_like(output)
        for row, target in enumerate((example.x1, example.x2)):
            members = result.assignment.sources_of_row(row)
            if not members:
                continue
            row_grad = loss.grad(target.samples, result.remixed[row].samples)
            for j in members:
                grad_output[j] = row_grad
    elif loss_mode == PIT:
        output, cache = forward_array(params, config, example.mixture.samples)
        _check_output(output, index)
        ests = SourceStack.from_array(output, example.mixture.sample_rate)
        result = pit_loss(example.targets, ests, spec)
        grad_output = np.zeros_like(output)
        for i, j in enumerate(result.assignment.perm):
            grad_output[j] = loss.grad(example.targets[i].samples, output[j])
    else:
        raise ConfigError(f"不支持的损失模式: {loss_mode}")

    if not math.isfinite(result.total_loss):
        raise NonFiniteLossError(f"样本损失为非有限值: {result.total_loss}", index=index)

    grads = backward_array(params, config, cache, grad_output)
    for name, value in grads.items():
        if not np.all(np.isfinite(value)):
            raise NonFiniteLossError(f"参数{name}的梯度包含NaN或Inf", index=index)
    return ExampleResult(loss=result.total_loss, assignment=result, grads=grads)


def loss_and_grad(params: SeparatorParams, config: SeparatorConfig, batch: Sequence,
                  loss_mode: str, spec: LossSpec = LossSpec(),
                  processor: Optional[BatchProcessor] = None) -> Tuple[float, SeparatorParams]:
    """
    批量平均损失与梯度

    各样本可并行计算，但求和严格按样本顺序进行，结果与线程数无关。

    Args:
        params: 网络参数
        config: 网络配置
        batch: 非空样本列表
        loss_mode: "mixit"或"pit"
        spec: 损失配置
        processor: 批量处理器，None时顺序执行

    Returns:
        Tuple[float, SeparatorParams]: (平均损失dB, 平均梯度)
    """
    if not batch:
        raise ConfigError("批次不能为空")
    processor = processor or BatchProcessor(1)

    indexed = list(enumerate(batch))
    results = processor.map_ordered(
        lambda item: example_loss_and_grad(params, config, item[1], loss_mode, spec, item[0]),
        indexed, process_name="样本梯度计算")

    total_loss = 0.0
    summed = OrderedDict((name, np.zeros_like(value)) for name, value in params.items())
    for result in results:
        total_loss += result.loss
        for name in summed:
            summed[name] += result.grads[name]

    count = len(batch)
    mean_grads = OrderedDict((name, value / count) for name, value in summed.items())
    for name, value in mean_grads.items():
        if not np.all(np.isfinite(value)):
            raise NonFiniteLossError(f"批平均梯度{name}包含NaN或Inf")
    return total_loss / count, SeparatorParams(mean_grads)
