#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
异常定义模块

每个异常类携带CLI使用的退出码。
"""

from typing import Optional


class SeparationError(Exception):
    """所有业务异常的基类"""

    exit_code = 1

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.index = index

    def __str__(self) -> str:
        if self.index is None:
            return self.message
        return f"{self.message} (index={self.index})"


class ShapeMismatchError(SeparationError, ValueError):
    """长度、采样率或通道数不匹配"""


class InvalidSignalError(SeparationError, ValueError):
    """空信号或含NaN/Inf的信号"""


class ConfigError(SeparationError, ValueError):
    """配置校验失败"""

    exit_code = 3


class PrerequisiteError(SeparationError, FileNotFoundError):
    """缺少前一阶段的产物"""

    exit_code = 4


class CheckpointError(SeparationError, ValueError):
    """检查点文件损坏、版本不符或与配置不一致"""


class NonFiniteLossError(SeparationError, ArithmeticError):
    """训练损失出现非有限值"""


class DataError(SeparationError, ValueError):
    """清单、WAV或语料不满足约定"""


class GradientCheckError(SeparationError):
    """梯度检查误差超过阈值"""

    exit_code = 5
