#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
分离网络配置
"""

from dataclasses import dataclass, asdict, replace
from typing import Any, Dict, Tuple

from ..utils.errors import ConfigError

MASK_ACTIVATIONS = ("sigmoid", "relu")


@dataclass(frozen=True)
class SeparatorConfig:
    """编码器-掩码器-解码器微型分离网络的超参数"""

    num_filters: int = 32
    kernel_len: int = 16
    stride: int = 8
    hidden_dim: int = 64
    num_hidden_layers: int = 2
    num_outputs: int = 2
    mixture_consistency: bool = True
    mask_activation: str = "sigmoid"
    seed: int = 0

    def __post_init__(self):
        for name in ("num_filters", "kernel_len", "stride", "hidden_dim",
                     "num_hidden_layers", "num_outputs"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name}必须为正整数: {value}")
        if self.stride > self.kernel_len:
            raise ConfigError(f"stride({self.stride})不能大于kernel_len({self.kernel_len})")
        if self.mask_activation not in MASK_ACTIVATIONS:
            raise ConfigError(f"不支持的掩码激活函数: {self.mask_activation}")

    def architecture(self) -> Tuple:
        """决定参数形状与网络行为的字段（不含随机种子）"""
        return (self.num_filters, self.kernel_len, self.stride, self.hidden_dim,
                self.num_hidden_layers, self.num_outputs, self.mixture_consistency,
                self.mask_activation)

    def dimensions(self) -> Tuple:
        """网络尺寸：N、L、stride、H与隐藏层数（不含输出数与开关）"""
        return (self.num_filters, self.kernel_len, self.stride, self.hidden_dim,
                self.num_hidden_layers)

    def with_updates(self, **changes) -> 'SeparatorConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SeparatorConfig':
        known = {key: data[key] for key in cls.__dataclass_fields__ if key in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"分离网络配置中存在未知字段: {sorted(unknown)}")
        return cls(**known)
