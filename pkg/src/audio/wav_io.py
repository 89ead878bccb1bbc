#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
WAV文件读写模块

只支持RIFF/WAVE、16位PCM、单声道。量化只发生在这里：
写入时先钳位到[-1, 1 - 2^-15]再按32768缩放取整，读取时除以32768。
"""

import os

import numpy as np
import soundfile as sf

from .waveform import Waveform
from ..utils.errors import DataError
from ..utils.logger import logger

PCM_SCALE = 32768.0
# RIFF/WAVE，含WAVE_FORMAT_EXTENSIBLE头
WAVE_CONTAINERS = ("WAV", "WAVEX")


def read_wav(path: str) -> Waveform:
    """
    读取16位PCM单声道WAV文件

    Args:
        path: 文件路径

    Returns:
        Waveform: 波形，采样率与文件一致

    Raises:
        DataError: 文件不存在、多声道或编码不受支持
    """
    if not os.path.isfile(path):
        raise DataError(f"WAV文件不存在: {path}")
    try:
        info = sf.info(path)
    except Exception as e:
        raise DataError(f"无法解析WAV文件 {path}: {str(e)}") from e

    if info.channels != 1:
        raise DataError(f"只支持单声道WAV，文件有 {info.channels} 个声道: {path}")
    if info.format not in WAVE_CONTAINERS:
        raise DataError(f"不支持的容器格式 {info.format}: {path}")
    if info.subtype != 'PCM_16':
        raise DataError(f"不支持的编码 {info.subtype}，只支持PCM_16: {path}")

    data, sample_rate = sf.read(path, dtype='int16', always_2d=False)
    samples = np.asarray(data, dtype=np.float64) / PCM_SCALE
    logger.debug(f"读取WAV: {path}, {samples.size} 样本 @ {sample_rate} Hz")
    return Waveform(samples, int(sample_rate))


def write_wav(path: str, w: Waveform) -> None:
    """
    写入16位PCM单声道WAV文件

    超出[-1, 1)的样本被钳位，钳位次数记录到日志。

    Args:
        path: 输出路径
        w: 波形
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    scaled = np.round(w.samples * PCM_SCALE)
    clipped = int(np.count_nonzero((scaled < -32768) | (scaled > 32767)))
    if clipped:
        logger.warning(f"写入 {path} 时钳位了 {clipped} 个样本")
    pcm = np.clip(scaled, -32768, 32767).astype(np.int16)
    sf.write(path, pcm, w.sample_rate, subtype='PCM_16', format='WAV')
