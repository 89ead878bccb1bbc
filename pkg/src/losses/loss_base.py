#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
损失函数基础类，定义损失值与梯度接口
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..utils.errors import ConfigError

THRESHOLDED_SNR = "thresholded_snr"
SI_SNR_NEGATIVE = "si_snr_negative"
LOSS_KINDS = (THRESHOLDED_SNR, SI_SNR_NEGATIVE)


@dataclass(frozen=True)
class LossSpec:
    """
    损失配置

    tau由snr_max_db推导，不单独存储。
    """

    kind: str = THRESHOLDED_SNR
    snr_max_db: float = 30.0
    epsilon: float = 1e-12
    zero_mean: bool = False

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigError(f"不支持的损失类型: {self.kind}")
        if not math.isfinite(self.snr_max_db):
            raise ConfigError(f"snr_max_db必须为有限值: {self.snr_max_db}")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ConfigError(f"epsilon必须为非负有限值: {self.epsilon}")

    @property
    def tau(self) -> float:
        return 10.0 ** (-self.snr_max_db / 10.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "snr_max_db": self.snr_max_db,
                "epsilon": self.epsilon, "zero_mean": self.zero_mean}

    @classmethod
    def from_dict(cls, data: dict) -> 'LossSpec':
        return cls(kind=data.get("kind", THRESHOLDED_SNR),
                   snr_max_db=float(data.get("snr_max_db", 30.0)),
                   epsilon=float(data.get("epsilon", 1e-12)),
                   zero_mean=bool(data.get("zero_mean", False)))


class LossBase(ABC):
    """信号级损失抽象类，输入为一维numpy数组，单位为dB，越小越好"""

    def __init__(self, name: str, spec: LossSpec):
        """
        初始化损失

        Args:
            name: 损失名称
            spec: 损失配置
        """
        self.name = name
        self.spec = spec

    @abstractmethod
    def value(self, y: np.ndarray, yhat: np.ndarray) -> float:
        """
        计算损失值

        Args:
            y: 参考信号
            yhat: 估计信号

        Returns:
            float: 损失（dB）
        """
        pass

    def batch_value(self, y: np.ndarray, yhats: np.ndarray) -> np.ndarray:
        """
        对同一参考批量计算损失

        Args:
            y: 参考信号，形状(T,)
            yhats: 候选估计，形状(K, T)

        Returns:
            np.ndarray: 长度为K的损失向量
        """
        return np.array([self.value(y, row) for row in yhats])

    @abstractmethod
    def grad(self, y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
        """
        计算损失对估计信号每个样本的梯度

        Args:
            y: 参考信号
            yhat: 估计信号

        Returns:
            np.ndarray: 与yhat同形状的梯度
        """
        pass
