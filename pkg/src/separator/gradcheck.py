#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
梯度检查模块

在若干随机配置上，把解析梯度与中心差分梯度逐坐标比较，
覆盖前向、混合一致性投影与MixIT/PIT损失的完整链路。
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..audio.waveform import Waveform, SourceStack
from ..losses.loss_base import LossSpec
from ..utils.logger import logger
from .config import SeparatorConfig
from .network import SeparatorParams, init_params
from .objectives import MIXIT, PIT, MixitExample, PitExample, example_loss_and_grad

# 相对误差分母的下限：绝对值小于该值的梯度按绝对误差比较
ABS_FLOOR = 1e-4
TARGET_REL_ERROR = 1e-4
MAX_REL_ERROR = 1e-3

DEFAULT_CASES: Tuple[Tuple[dict, str], ...] = (
    (dict(num_filters=8, hidden_dim=16, num_hidden_layers=1, num_outputs=2,
          mixture_consistency=True), MIXIT),
    (dict(num_filters=16, hidden_dim=16, num_hidden_layers=2, num_outputs=4,
          mixture_consistency=True), MIXIT),
    (dict(num_filters=8, hidden_dim=16, num_hidden_layers=2, num_outputs=2,
          mixture_consistency=False), PIT),
)


@dataclass
class CaseReport:
    """单个配置的检查结果"""

    config: SeparatorConfig
    loss_mode: str
    rel_errors: List[float] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max(self.rel_errors) if self.rel_errors else 0.0


@dataclass
class GradcheckReport:
    """梯度检查汇总"""

    cases: List[CaseReport]

    @property
    def all_errors(self) -> np.ndarray:
        return np.array([e for case in self.cases for e in case.rel_errors])

    @property
    def max_rel_error(self) -> float:
        errors = self.all_errors
        return float(errors.max()) if errors.size else 0.0

    @property
    def fraction_within_target(self) -> float:
        errors = self.all_errors
        return float(np.mean(errors <= TARGET_REL_ERROR)) if errors.size else 1.0

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= MAX_REL_ERROR


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), ABS_FLOOR)


def _make_example(loss_mode: str, length: int, rng: np.random.Generator):
    if loss_mode == MIXIT:
        x1 = Waveform(0.5 * rng.standard_normal(length))
        x2 = Waveform(0.5 * rng.standard_normal(length))
        return MixitExample(x1, x2, "gradcheck")
    targets = SourceStack.from_array(0.5 * rng.standard_normal((2, length)))
    mixture = Waveform(targets.as_array().sum(axis=0))
    return PitExample(mixture, targets, "gradcheck")


def _perturbed(params: SeparatorParams, name: str, flat_index: int, delta: float) -> SeparatorParams:
    arrays = OrderedDict((k, v.copy()) for k, v in params.items())
    arrays[name].reshape(-1)[flat_index] += delta
    return SeparatorParams(arrays)


def check_case(config: SeparatorConfig, loss_mode: str, example, spec: LossSpec,
               num_coords: int, h: float, rng: np.random.Generator) -> CaseReport:
    """
    检查单个配置

    Args:
        config: 网络配置
        loss_mode: "mixit"或"pit"
        example: 训练样本
        spec: 损失配置
        num_coords: 抽样坐标数
        h: 差分步长
        rng: 随机数生成器

    Returns:
        CaseReport: 各坐标的相对误差
    """
    params = init_params(config)
    analytic = example_loss_and_grad(params, config, example, loss_mode, spec).grads

    coordinates = [(name, i) for name, value in params.items() for i in range(value.size)]
    chosen = rng.choice(len(coordinates), size=min(num_coords, len(coordinates)), replace=False)

    report = CaseReport(config=config, loss_mode=loss_mode)
    for index in sorted(int(c) for c in chosen):
        name, flat_index = coordinates[index]
        plus = example_loss_and_grad(_perturbed(params, name, flat_index, h),
                                     config, example, loss_mode, spec).loss
        minus = example_loss_and_grad(_perturbed(params, name, flat_index, -h),
                                      config, example, loss_mode, spec).loss
        numeric = (plus - minus) / (2.0 * h)
        report.rel_errors.append(relative_error(float(analytic[name].reshape(-1)[flat_index]), numeric))
    return report


def run_gradcheck(seed: int = 0, cases: Optional[Sequence[Tuple[dict, str]]] = None,
                  num_coords: int = 40, h: float = 1e-5, length: int = 128,
                  spec: LossSpec = LossSpec()) -> GradcheckReport:
    """
    在多个随机配置上运行梯度检查

    Args:
        seed: 随机种子
        cases: (配置字段, 损失模式)列表，默认三种配置
        num_coords: 每个配置抽样的坐标数
        h: 差分步长
        length: 输入长度
        spec: 损失配置

    Returns:
        GradcheckReport: 汇总结果
    """
    rng = np.random.default_rng(seed)
    reports = []
    for case_index, (fields, loss_mode) in enumerate(cases or DEFAULT_CASES):
        config = SeparatorConfig(seed=seed + case_index, **fields)
        example = _make_example(loss_mode, length, rng)
        report = check_case(config, loss_mode, example, spec, num_coords, h, rng)
        logger.info(f"梯度检查 配置{case_index} ({loss_mode}, N={config.num_filters}, "
                    f"M={config.num_outputs}): 最大相对误差 {report.max_rel_error:.3e}")
        reports.append(report)
    return GradcheckReport(cases=reports)
