#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
波形容器模块

Waveform与SourceStack构造后不可变，可在线程间共享。所有运算均为64位浮点。
"""

import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Union

import numpy as np

from ..utils.errors import InvalidSignalError, ShapeMismatchError

DEFAULT_SAMPLE_RATE = 8000


def _frozen_array(samples) -> np.ndarray:
    array = np.array(samples, dtype=np.float64, copy=True).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Waveform:
    """单声道波形"""

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.size < 1:
            raise InvalidSignalError("波形长度必须至少为1")
        if not np.all(np.isfinite(samples)):
            raise InvalidSignalError("波形包含NaN或Inf")
        if int(self.sample_rate) <= 0:
            raise InvalidSignalError(f"采样率必须为正数: {self.sample_rate}")
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'sample_rate', int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """时长（秒）"""
        return len(self) / self.sample_rate

    @classmethod
    def zeros(cls, length: int, sample_rate: int = DEFAULT_SAMPLE_RATE) -> 'Waveform':
        return cls(np.zeros(length), sample_rate)

    def scaled(self, gain: float) -> 'Waveform':
        return Waveform(self.samples * gain, self.sample_rate)

    def __add__(self, other: 'Waveform') -> 'Waveform':
        return mix([self, other])


@dataclass(frozen=True, eq=False)
class SourceStack:
    """M个等长、同采样率波形的有序集合"""

    sources: tuple

    def __post_init__(self):
        sources = tuple(self.sources)
        if len(sources) < 1:
            raise InvalidSignalError("SourceStack至少需要一个波形")
        first = sources[0]
        for index, source in enumerate(sources):
            if not isinstance(source, Waveform):
                raise InvalidSignalError(f"第{index}个元素不是Waveform", index=index)
            if len(source) != len(first):
                raise ShapeMismatchError(
                    f"第{index}个波形长度为{len(source)}，应为{len(first)}", index=index)
            if source.sample_rate != first.sample_rate:
                raise ShapeMismatchError(
                    f"第{index}个波形采样率为{source.sample_rate}，应为{first.sample_rate}",
                    index=index)
        object.__setattr__(self, 'sources', sources)

    @classmethod
    def from_array(cls, array: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> 'SourceStack':
        """
        由M×T数组构造

        Args:
            array: 形状为(M, T)的数组
            sample_rate: 采样率

        Returns:
            SourceStack: 源集合
        """
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2:
            raise ShapeMismatchError(f"需要二维数组，实际为{array.ndim}维")
        return cls(tuple(Waveform(row, sample_rate) for row in array))

    def as_array(self) -> np.ndarray:
        """返回M×T数组副本"""
        return np.stack([source.samples for source in self.sources])

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def length(self) -> int:
        return len(self.sources[0])

    @property
    def sample_rate(self) -> int:
        return self.sources[0].sample_rate

    def select(self, indices: Sequence[int]) -> 'SourceStack':
        return SourceStack(tuple(self.sources[i] for i in indices))

    def __len__(self) -> int:
        return len(self.sources)

    def __getitem__(self, index: int) -> Waveform:
        return self.sources[index]

    def __iter__(self) -> Iterator[Waveform]:
        return iter(self.sources)


def _as_stack(stack: Union[SourceStack, Sequence[Waveform]]) -> SourceStack:
    if isinstance(stack, SourceStack):
        return stack
    return SourceStack(tuple(stack))


def mix(stack: Union[SourceStack, Sequence[Waveform]]) -> Waveform:
    """
    逐样本求和得到混合信号

    求和顺序固定为从左到右，64位累加。

    Args:
        stack: 源集合

    Returns:
        Waveform: 混合信号

    Raises:
        ShapeMismatchError: 长度或采样率不一致，异常中记录出错序号
    """
    stack = _as_stack(stack)
    total = stack[0].samples.copy()
    for source in stack.sources[1:]:
        total += source.samples
    return Waveform(total, stack.sample_rate)


def energy(w: Waveform) -> float:
    """平方和能量（不是均值，也不是RMS）"""
    return float(np.dot(w.samples, w.samples))


def _segment_length(seg_seconds: float, sample_rate: int) -> int:
    if not seg_seconds > 0:
        raise InvalidSignalError(f"分段时长必须为正数: {seg_seconds}")
    # 容差只用于吸收0.1一类十进制小数的表示误差
    seg_len = int(math.floor(seg_seconds * sample_rate + 1e-9))
    if seg_len < 1:
        raise InvalidSignalError(f"分段长度为0: {seg_seconds} 秒 @ {sample_rate} Hz")
    return seg_len


def segment(w: Waveform, seg_seconds: float, drop_last: bool) -> List[Waveform]:
    """
    把波形切成不重叠的等长片段

    Args:
        w: 输入波形
        seg_seconds: 片段时长（秒）
        drop_last: True时丢弃末尾不完整片段，否则补零

    Returns:
        List[Waveform]: 片段列表
    """
    seg_len = _segment_length(seg_seconds, w.sample_rate)
    total = len(w)
    full, remainder = divmod(total, seg_len)
    pieces = [Waveform(w.samples[i * seg_len:(i + 1) * seg_len], w.sample_rate)
              for i in range(full)]
    if remainder and not drop_last:
        padded = np.zeros(seg_len)
        padded[:remainder] = w.samples[full * seg_len:]
        pieces.append(Waveform(padded, w.sample_rate))
    return pieces


def segment_stack(stack: SourceStack, seg_seconds: float, drop_last: bool) -> List[SourceStack]:
    """
    对源集合同步分段，保证各通道片段一一对应

    Args:
        stack: 源集合
        seg_seconds: 片段时长（秒）
        drop_last: 是否丢弃末尾不完整片段

    Returns:
        List[SourceStack]: 每个片段位置一个SourceStack
    """
    per_source = [segment(source, seg_seconds, drop_last) for source in stack]
    return [SourceStack(tuple(pieces)) for pieces in zip(*per_source)]


def concatenate(pieces: Sequence[Waveform], length: int = None) -> Waveform:
    """拼接片段，可选截断到length"""
    if not pieces:
        raise InvalidSignalError("没有可拼接的片段")
    samples = np.concatenate([piece.samples for piece in pieces])
    if length is not None:
        samples = samples[:length]
    return Waveform(samples, pieces[0].sample_rate)
