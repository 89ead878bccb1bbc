#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
损失函数工厂模块，按LossSpec.kind管理所有训练损失
"""

from typing import Callable, Dict, List

import numpy as np

from .loss_base import LossBase, LossSpec, THRESHOLDED_SNR, SI_SNR_NEGATIVE
from .snr import neg_thresh_snr, neg_thresh_snr_grad, si_snr, neg_si_snr_grad
from ..utils.errors import ConfigError
from ..utils.logger import logger


class ThresholdedSNRLoss(LossBase):
    """负阈值SNR损失"""

    def __init__(self, spec: LossSpec):
        super().__init__(THRESHOLDED_SNR, spec)

    def value(self, y: np.ndarray, yhat: np.ndarray) -> float:
        return neg_thresh_snr(y, yhat, self.spec)

    def batch_value(self, y: np.ndarray, yhats: np.ndarray) -> np.ndarray:
        residual = y[np.newaxis, :] - yhats
        err_power = np.einsum('kt,kt->k', residual, residual)
        ref_power = float(np.dot(y, y))
        return (10.0 * np.log10(err_power + self.spec.tau * ref_power + self.spec.epsilon)
                - 10.0 * np.log10(ref_power + self.spec.epsilon))

    def grad(self, y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
        return neg_thresh_snr_grad(y, yhat, self.spec)


class NegativeSISNRLoss(LossBase):
    """负SI-SNR损失"""

    def __init__(self, spec: LossSpec):
        super().__init__(SI_SNR_NEGATIVE, spec)

    def value(self, y: np.ndarray, yhat: np.ndarray) -> float:
        return -si_snr(y, yhat, self.spec.epsilon, self.spec.zero_mean)

    def grad(self, y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
        return neg_si_snr_grad(y, yhat, self.spec.epsilon, self.spec.zero_mean)


class LossFactory:
    """损失函数工厂类"""

    def __init__(self):
        """初始化损失工厂"""
        self.losses: Dict[str, Callable[[LossSpec], LossBase]] = {}
        self._register_losses()

    def _register_losses(self):
        """注册内置损失"""
        self.register_loss(THRESHOLDED_SNR, ThresholdedSNRLoss)
        self.register_loss(SI_SNR_NEGATIVE, NegativeSISNRLoss)
        logger.debug(f"已注册 {len(self.losses)} 种损失函数")

    def register_loss(self, kind: str, factory_func: Callable[[LossSpec], LossBase]):
        """
        注册损失函数

        Args:
            kind: 损失类型名
            factory_func: 由LossSpec创建损失实例的工厂函数
        """
        self.losses[kind] = factory_func

    def create_loss(self, spec: LossSpec) -> LossBase:
        """
        创建损失实例

        Raises:
            ConfigError: 类型未注册
        """
        if spec.kind not in self.losses:
            raise ConfigError(f"不支持的损失类型: {spec.kind}")
        return self.losses[spec.kind](spec)

    def get_all_losses(self) -> List[str]:
        return list(self.losses.keys())


# 全局损失工厂实例
loss_factory = LossFactory()
