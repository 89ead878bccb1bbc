#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
微型分离网络

结构：
1. 按stride分帧，卷积编码 + ReLU，得到F×N表示；
2. 逐帧MLP掩码器输出M·N个logit，经激活得到M个掩码；
3. 掩码后的表示用解码滤波器重叠相加还原为M路波形，截断到输入长度；
4. 可选的混合一致性投影。

反向传播为手写解析梯度，参数在前向与求梯度期间不被修改。
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..audio.waveform import Waveform, SourceStack
from ..utils.errors import InvalidSignalError, ShapeMismatchError
from .config import SeparatorConfig


@dataclass(frozen=True, eq=False)
class SeparatorParams:
    """全部可训练张量，按声明顺序保存"""

    arrays: "OrderedDict[str, np.ndarray]"

    def __post_init__(self):
        arrays = OrderedDict((name, np.asarray(value, dtype=np.float64))
                             for name, value in self.arrays.items())
        for name, value in arrays.items():
            if not np.all(np.isfinite(value)):
                raise InvalidSignalError(f"参数{name}包含NaN或Inf")
        object.__setattr__(self, 'arrays', arrays)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.arrays)

    def items(self):
        return self.arrays.items()

    def names(self) -> List[str]:
        return list(self.arrays.keys())

    @property
    def encoder_filters(self) -> np.ndarray:
        return self.arrays["encoder.filters"]

    @property
    def decoder_filters(self) -> np.ndarray:
        return self.arrays["decoder.filters"]

    @property
    def masker_weights(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        layers = []
        index = 0
        while f"masker.{index}.weight" in self.arrays:
            layers.append((self.arrays[f"masker.{index}.weight"],
                           self.arrays[f"masker.{index}.bias"]))
            index += 1
        return layers

    def num_parameters(self) -> int:
        return int(sum(value.size for value in self.arrays.values()))

    def copy(self) -> 'SeparatorParams':
        return SeparatorParams(OrderedDict((k, v.copy()) for k, v in self.arrays.items()))

    def equals(self, other: 'SeparatorParams') -> bool:
        """逐位比较"""
        if self.names() != other.names():
            return False
        return all(np.array_equal(self[name], other[name]) for name in self.names())


def expected_shapes(config: SeparatorConfig) -> "OrderedDict[str, Tuple[int, ...]]":
    """
    由配置推导每个参数张量的形状（声明顺序即检查点中的存储顺序）

    Args:
        config: 网络配置

    Returns:
        OrderedDict: 参数名到形状的映射
    """
    N, L, H = config.num_filters, config.kernel_len, config.hidden_dim
    shapes = OrderedDict()
    shapes["encoder.filters"] = (N, L)
    in_dim = N
    for index in range(config.num_hidden_layers):
        shapes[f"masker.{index}.weight"] = (in_dim, H)
        shapes[f"masker.{index}.bias"] = (H,)
        in_dim = H
    out_index = config.num_hidden_layers
    shapes[f"masker.{out_index}.weight"] = (in_dim, config.num_outputs * N)
    shapes[f"masker.{out_index}.bias"] = (config.num_outputs * N,)
    shapes["decoder.filters"] = (N, L)
    return shapes


def _fan_in(name: str, shape: Tuple[int, ...], config: SeparatorConfig) -> int:
    if name == "encoder.filters":
        return config.kernel_len
    if name == "decoder.filters":
        return config.num_filters
    return shape[0] if name.endswith(".weight") else None


def init_params(config: SeparatorConfig) -> SeparatorParams:
    """
    按种子确定性地初始化参数

    权重与偏置均取自uniform(−a, a)，a = sqrt(1/fan_in)。偏置的fan_in取所在层的权重输入维度。

    Args:
        config: 网络配置

    Returns:
        SeparatorParams: 初始参数，同一配置与种子逐位一致
    """
    rng = np.random.default_rng(config.seed)
    arrays = OrderedDict()
    last_fan_in = None
    for name, shape in expected_shapes(config).items():
        fan_in = _fan_in(name, shape, config)
        if fan_in is None:
            fan_in = last_fan_in
        last_fan_in = fan_in
        bound = np.sqrt(1.0 / fan_in)
        arrays[name] = rng.uniform(-bound, bound, size=shape)
    return SeparatorParams(arrays)


def check_params(params: SeparatorParams, config: SeparatorConfig):
    """校验参数形状与配置一致"""
    shapes = expected_shapes(config)
    if list(shapes.keys()) != params.names():
        raise ShapeMismatchError(f"参数名与配置不一致: {params.names()}")
    for index, (name, shape) in enumerate(shapes.items()):
        if params[name].shape != shape:
            raise ShapeMismatchError(
                f"参数{name}形状为{params[name].shape}，配置要求{shape}", index=index)


def mixture_consistency_project_array(initial: np.ndarray, mixture: np.ndarray) -> np.ndarray:
    """数组版混合一致性投影，initial形状(M, T)"""
    num_sources = initial.shape[0]
    residual = mixture - initial.sum(axis=0)
    return initial + residual[np.newaxis, :] / num_sources


def mixture_consistency_project(initial: SourceStack, mixture: Waveform) -> SourceStack:
    """
    混合一致性投影

    ŝ_m = s̲_m + (x − Σ s̲)/M，即在Σŝ = x约束下离s̲最近的解。

    Args:
        initial: 初始分离结果
        mixture: 混合信号

    Returns:
        SourceStack: 投影后的分离结果
    """
    if initial.length != len(mixture):
        raise ShapeMismatchError(f"分离结果长度{initial.length}与混合长度{len(mixture)}不一致")
    projected = mixture_consistency_project_array(initial.as_array(), mixture.samples)
    return SourceStack.from_array(projected, initial.sample_rate)


@dataclass
class ForwardCache:
    """反向传播所需的前向中间量"""

    length: int
    num_frames: int
    frames: np.ndarray
    pre_encoded: np.ndarray
    encoded: np.ndarray
    hidden_inputs: List[np.ndarray]
    hidden_pre: List[np.ndarray]
    logits: np.ndarray
    masks: np.ndarray
    masked: np.ndarray


def _num_frames(length: int, config: SeparatorConfig) -> int:
    return (length - config.kernel_len + config.stride - 1) // config.stride + 1


def forward_array(params: SeparatorParams, config: SeparatorConfig,
                  mixture: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    前向计算（数组版）

    Args:
        params: 网络参数
        config: 网络配置
        mixture: 一维混合信号

    Returns:
        Tuple[np.ndarray, ForwardCache]: (M×T输出, 前向缓存)
    """
    x = np.asarray(mixture, dtype=np.float64)
    T, L, S = x.size, config.kernel_len, config.stride
    N, M = config.num_filters, config.num_outputs
    if T < L:
        raise ShapeMismatchError(f"输入长度{T}小于卷积核长度{L}")

    F = _num_frames(T, config)
    padded = np.zeros((F - 1) * S + L)
    padded[:T] = x
    frames = np.ascontiguousarray(sliding_window_view(padded, L)[::S])

    pre_encoded = frames @ params.encoder_filters.T
    encoded = np.maximum(pre_encoded, 0.0)

    hidden_inputs, hidden_pre = [], []
    h = encoded
    layers = params.masker_weights
    for weight, bias in layers[:-1]:
        hidden_inputs.append(h)
        z = h @ weight + bias
        hidden_pre.append(z)
        h = np.maximum(z, 0.0)
    hidden_inputs.append(h)
    out_weight, out_bias = layers[-1]
    logits = (h @ out_weight + out_bias).reshape(F, M, N)

    if config.mask_activation == "sigmoid":
        masks = expit(logits)
    else:
        masks = np.maximum(logits, 0.0)
    masked = masks * encoded[:, np.newaxis, :]

    decoded = np.einsum('fmn,nl->mfl', masked, params.decoder_filters)
    num_blocks = -(-L // S)
    buffer = np.zeros((M, F + num_blocks, S))
    for r in range(num_blocks):
        width = min(S, L - r * S)
        buffer[:, r:r + F, :width] += decoded[:, :, r * S:r * S + width]
    output = buffer.reshape(M, -1)[:, :T]

    if config.mixture_consistency:
        output = mixture_consistency_project_array(output, x)

    cache = ForwardCache(length=T, num_frames=F, frames=frames, pre_encoded=pre_encoded,
                         encoded=encoded, hidden_inputs=hidden_inputs, hidden_pre=hidden_pre,
                         logits=logits, masks=masks, masked=masked)
    return np.ascontiguousarray(output), cache


def forward(params: SeparatorParams, config: SeparatorConfig, mixture: Waveform) -> SourceStack:
    """
    前向计算

    Args:
        params: 网络参数
        config: 网络配置
        mixture: 混合信号，长度不小于kernel_len

    Returns:
        SourceStack: M路输出，长度与输入一致
    """
    output, _ = forward_array(params, config, mixture.samples)
    return SourceStack.from_array(output, mixture.sample_rate)


def backward_array(params: SeparatorParams, config: SeparatorConfig, cache: ForwardCache,
                   grad_output: np.ndarray) -> "OrderedDict[str, np.ndarray]":
    """
    反向传播

    Args:
        params: 网络参数
        config: 网络配置
        cache: 前向缓存
        grad_output: 损失对M×T输出的梯度

    Returns:
        OrderedDict: 与参数同名同形状的梯度
    """
    L, S, N, M = config.kernel_len, config.stride, config.num_filters, config.num_outputs
    F, T = cache.num_frames, cache.length
    g = np.asarray(grad_output, dtype=np.float64)

    if config.mixture_consistency:
        # 投影的雅可比为 I − (1/M)·全1耦合
        g = g - g.mean(axis=0, keepdims=True)

    num_blocks = -(-L // S)
    g_buffer = np.zeros((M, (F + num_blocks) * S))
    g_buffer[:, :T] = g
    g_buffer = g_buffer.reshape(M, F + num_blocks, S)
    d_decoded = np.zeros((M, F, L))
    for r in range(num_blocks):
        width = min(S, L - r * S)
        d_decoded[:, :, r * S:r * S + width] = g_buffer[:, r:r + F, :width]

    grads = OrderedDict()
    d_decoder = np.einsum('fmn,mfl->nl', cache.masked, d_decoded)
    d_masked = np.einsum('mfl,nl->fmn', d_decoded, params.decoder_filters)

    d_masks = d_masked * cache.encoded[:, np.newaxis, :]
    d_encoded = np.einsum('fmn,fmn->fn', d_masked, cache.masks)

    if config.mask_activation == "sigmoid":
        d_logits = d_masks * cache.masks * (1.0 - cache.masks)
    else:
        d_logits = d_masks * (cache.logits > 0.0)
    d_h = d_logits.reshape(F, M * N)

    layers = params.masker_weights
    out_index = len(layers) - 1
    layer_grads = {}
    out_weight, _ = layers[out_index]
    layer_grads[out_index] = (cache.hidden_inputs[out_index].T @ d_h, d_h.sum(axis=0))
    d_h = d_h @ out_weight.T
    for index in range(out_index - 1, -1, -1):
        weight, _ = layers[index]
        d_z = d_h * (cache.hidden_pre[index] > 0.0)
        layer_grads[index] = (cache.hidden_inputs[index].T @ d_z, d_z.sum(axis=0))
        d_h = d_z @ weight.T
    d_encoded = d_encoded + d_h

    d_pre = d_encoded * (cache.pre_encoded > 0.0)
    grads["encoder.filters"] = d_pre.T @ cache.frames
    for index in range(out_index + 1):
        grads[f"masker.{index}.weight"] = layer_grads[index][0]
        grads[f"masker.{index}.bias"] = layer_grads[index][1]
    grads["decoder.filters"] = d_decoder
    return grads
