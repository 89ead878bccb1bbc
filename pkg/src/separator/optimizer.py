#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Adam优化器（带偏差修正）

函数式实现：adam_step返回新的参数与状态，不修改输入。
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..utils.errors import ConfigError, NonFiniteLossError, ShapeMismatchError
from .network import SeparatorParams


@dataclass(frozen=True, eq=False)
class AdamState:
    """Adam状态"""

    step: int
    first_moment: "OrderedDict[str, np.ndarray]"
    second_moment: "OrderedDict[str, np.ndarray]"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_opt: float = 1e-8

    def __post_init__(self):
        if self.step < 0:
            raise ConfigError(f"step不能为负: {self.step}")
        if not self.lr >= 0.0:
            raise ConfigError(f"学习率无效: {self.lr}")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ConfigError(f"beta参数无效: {self.beta1}, {self.beta2}")


def init_adam_state(params: SeparatorParams, lr: float = 1e-3, beta1: float = 0.9,
                    beta2: float = 0.999, eps_opt: float = 1e-8) -> AdamState:
    """为给定参数创建全零矩估计"""
    zeros = OrderedDict((name, np.zeros_like(value)) for name, value in params.items())
    return AdamState(step=0, first_moment=zeros,
                     second_moment=OrderedDict((k, v.copy()) for k, v in zeros.items()),
                     lr=lr, beta1=beta1, beta2=beta2, eps_opt=eps_opt)


def adam_step(params: SeparatorParams, grads: SeparatorParams,
              state: AdamState) -> Tuple[SeparatorParams, AdamState]:
    """
    执行一步Adam更新

    Args:
        params: 当前参数
        grads: 与参数同形状的梯度
        state: 当前优化器状态

    Returns:
        Tuple[SeparatorParams, AdamState]: (新参数, 新状态)

    Raises:
        ShapeMismatchError: 梯度或矩估计的形状与参数不一致
        NonFiniteLossError: 更新后的参数出现NaN或Inf
    """
    if grads.names() != params.names():
        raise ShapeMismatchError(f"梯度名称与参数不一致: {grads.names()}")

    step = state.step + 1
    bias_correction1 = 1.0 - state.beta1 ** step
    bias_correction2 = 1.0 - state.beta2 ** step

    new_params, new_m, new_v = OrderedDict(), OrderedDict(), OrderedDict()
    for index, name in enumerate(params.names()):
        p, g = params[name], grads[name]
        if g.shape != p.shape or state.first_moment[name].shape != p.shape:
            raise ShapeMismatchError(f"参数{name}形状为{p.shape}，梯度形状为{g.shape}", index=index)
        m = state.beta1 * state.first_moment[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.second_moment[name] + (1.0 - state.beta2) * (g * g)
        m_hat = m / bias_correction1
        v_hat = v / bias_correction2
        updated = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps_opt)
        if not np.all(np.isfinite(updated)):
            raise NonFiniteLossError(f"第{step}步更新后参数{name}包含NaN或Inf", index=index)
        new_params[name] = updated
        new_m[name] = m
        new_v[name] = v

    new_state = AdamState(step=step, first_moment=new_m, second_moment=new_v, lr=state.lr,
                          beta1=state.beta1, beta2=state.beta2, eps_opt=state.eps_opt)
    return SeparatorParams(new_params), new_state
