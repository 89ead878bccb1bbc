#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
信噪比类损失与指标

负阈值SNR用于训练；SI-SNR与SI-SNRi只用于评价。
"""

from typing import Union

import numpy as np

from ..audio.waveform import Waveform, SourceStack
from ..utils.errors import InvalidSignalError, ShapeMismatchError
from .loss_base import LossSpec

DB_PER_NEPER = 10.0 / np.log(10.0)

SignalLike = Union[Waveform, np.ndarray]


def _samples(x: SignalLike) -> np.ndarray:
    if isinstance(x, Waveform):
        return x.samples
    return np.asarray(x, dtype=np.float64)


def _check_lengths(y: np.ndarray, yhat: np.ndarray):
    if y.shape != yhat.shape:
        raise ShapeMismatchError(f"参考与估计长度不一致: {y.shape} vs {yhat.shape}")


def neg_thresh_snr(y: SignalLike, yhat: SignalLike, spec: LossSpec = LossSpec()) -> float:
    """
    负阈值SNR

    10·log10(‖y−ŷ‖² + τ‖y‖² + ε) − 10·log10(‖y‖² + ε)，下界为−snr_max_db。

    Args:
        y: 参考信号
        yhat: 估计信号
        spec: 损失配置

    Returns:
        float: 损失（dB），越小越好
    """
    y, yhat = _samples(y), _samples(yhat)
    _check_lengths(y, yhat)
    residual = y - yhat
    ref_power = float(np.dot(y, y))
    err_power = float(np.dot(residual, residual))
    return float(10.0 * np.log10(err_power + spec.tau * ref_power + spec.epsilon)
                 - 10.0 * np.log10(ref_power + spec.epsilon))


def neg_thresh_snr_grad(y: SignalLike, yhat: SignalLike, spec: LossSpec = LossSpec()) -> np.ndarray:
    """负阈值SNR对估计信号的解析梯度"""
    y, yhat = _samples(y), _samples(yhat)
    _check_lengths(y, yhat)
    residual = y - yhat
    denom = float(np.dot(residual, residual)) + spec.tau * float(np.dot(y, y)) + spec.epsilon
    return (-2.0 * DB_PER_NEPER / denom) * residual


def _center(x: np.ndarray) -> np.ndarray:
    return x - np.mean(x)


def si_snr(y: SignalLike, yhat: SignalLike, epsilon: float = 1e-12, zero_mean: bool = False) -> float:
    """
    尺度不变信噪比

    α = ⟨ŷ,y⟩/(‖y‖²+ε)，返回10·log10((‖αy‖²+ε)/(‖αy−ŷ‖²+ε))。
    默认不去均值；zero_mean=True时先对两路信号去直流。

    Args:
        y: 参考信号
        yhat: 估计信号
        epsilon: 对数与分母保护项
        zero_mean: 是否去均值

    Returns:
        float: SI-SNR（dB）

    Raises:
        InvalidSignalError: 参考信号能量为0
    """
    y, yhat = _samples(y), _samples(yhat)
    _check_lengths(y, yhat)
    if zero_mean:
        y, yhat = _center(y), _center(yhat)
    ref_power = float(np.dot(y, y))
    if ref_power <= 0.0:
        raise InvalidSignalError("参考信号能量为0，无法计算SI-SNR")
    alpha = float(np.dot(yhat, y)) / (ref_power + epsilon)
    target = alpha * y
    noise = target - yhat
    return float(10.0 * np.log10((float(np.dot(target, target)) + epsilon)
                                 / (float(np.dot(noise, noise)) + epsilon)))


def neg_si_snr_grad(y: SignalLike, yhat: SignalLike, epsilon: float = 1e-12,
                    zero_mean: bool = False) -> np.ndarray:
    """负SI-SNR对估计信号的解析梯度"""
    y, yhat = _samples(y), _samples(yhat)
    _check_lengths(y, yhat)
    if zero_mean:
        y, yhat = _center(y), _center(yhat)
    ref_power = float(np.dot(y, y))
    if ref_power <= 0.0:
        raise InvalidSignalError("参考信号能量为0，无法计算SI-SNR")
    scale = ref_power + epsilon
    alpha = float(np.dot(yhat, y)) / scale
    noise = alpha * y - yhat
    target_power = alpha * alpha * ref_power + epsilon
    noise_power = float(np.dot(noise, noise)) + epsilon
    d_target = (2.0 * alpha * ref_power / scale) * y
    d_noise = 2.0 * ((float(np.dot(noise, y)) / scale) * y - noise)
    grad = -DB_PER_NEPER * (d_target / target_power - d_noise / noise_power)
    if zero_mean:
        grad = _center(grad)
    return grad


def si_snr_improvement(mixture: SignalLike, estimate: SignalLike, reference: SignalLike,
                       epsilon: float = 1e-12, zero_mean: bool = False) -> float:
    """SI-SNRi：估计信号相对直接使用混合信号的SI-SNR提升"""
    return (si_snr(reference, estimate, epsilon, zero_mean)
            - si_snr(reference, mixture, epsilon, zero_mean))


def loss_matrix(refs: SourceStack, ests: SourceStack, spec: LossSpec = LossSpec()) -> np.ndarray:
    """
    计算C×M损失矩阵

    Args:
        refs: C个参考信号
        ests: M个估计信号
        spec: 损失配置

    Returns:
        np.ndarray: 第(i, j)项为loss(refs[i], ests[j])
    """
    from .loss_factory import loss_factory

    if refs.length != ests.length:
        raise ShapeMismatchError(f"参考与估计长度不一致: {refs.length} vs {ests.length}")
    loss = loss_factory.create_loss(spec)
    matrix = np.empty((refs.num_sources, ests.num_sources))
    for i, ref in enumerate(refs):
        for j, est in enumerate(ests):
            matrix[i, j] = loss.value(ref.samples, est.samples)
    return matrix
