#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
检查点读写模块

文件布局（小端）：
    魔数 b"TSMIXCKP" | 版本 u32 | 配置块长度 u32 | 配置块(UTF-8 JSON)
    | 按声明顺序排列的float64参数 | SHA-256摘要(32字节，覆盖前面全部内容)
"""

import hashlib
import json
import os
import struct
from collections import OrderedDict
from typing import Tuple

import numpy as np

from ..utils.errors import CheckpointError, PrerequisiteError
from ..utils.logger import logger
from .config import SeparatorConfig
from .network import SeparatorParams, check_params, expected_shapes

MAGIC = b"TSMIXCKP"
FORMAT_VERSION = 1
DIGEST_SIZE = 32
_HEADER = struct.Struct("<8sII")


def save_checkpoint(params: SeparatorParams, config: SeparatorConfig, path: str) -> str:
    """
    保存检查点

    先写临时文件再原子替换，避免留下半个文件。

    Args:
        params: 网络参数
        config: 网络配置
        path: 输出路径

    Returns:
        str: 写入的文件路径
    """
    check_params(params, config)
    config_block = json.dumps(config.to_dict(), sort_keys=True).encode('utf-8')
    body = bytearray(_HEADER.pack(MAGIC, FORMAT_VERSION, len(config_block)))
    body += config_block
    for name in expected_shapes(config):
        body += np.ascontiguousarray(params[name], dtype='<f8').tobytes()
    digest = hashlib.sha256(bytes(body)).digest()

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    temp_path = f"{path}.tmp"
    with open(temp_path, 'wb') as f:
        f.write(bytes(body))
        f.write(digest)
    os.replace(temp_path, path)
    logger.info(f"检查点已保存: {path} ({params.num_parameters()} 个参数)")
    return path


def load_checkpoint(path: str) -> Tuple[SeparatorParams, SeparatorConfig]:
    """
    加载检查点

    Args:
        path: 检查点路径

    Returns:
        Tuple[SeparatorParams, SeparatorConfig]: (参数, 配置)

    Raises:
        PrerequisiteError: 文件不存在
        CheckpointError: 魔数、版本、长度或摘要校验失败
    """
    if not os.path.isfile(path):
        raise PrerequisiteError(f"检查点不存在: {path}")
    with open(path, 'rb') as f:
        data = f.read()

    if len(data) < _HEADER.size + DIGEST_SIZE:
        raise CheckpointError(f"检查点文件过短: {path}")
    magic, version, config_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"不是检查点文件（魔数不符）: {path}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"检查点版本{version}不受支持，需要版本{FORMAT_VERSION}: {path}")

    offset = _HEADER.size
    if len(data) < offset + config_len + DIGEST_SIZE:
        raise CheckpointError(f"检查点在配置块处被截断: {path}")
    try:
        config = SeparatorConfig.from_dict(json.loads(data[offset:offset + config_len].decode('utf-8')))
    except (ValueError, TypeError) as e:
        raise CheckpointError(f"检查点配置块无效: {str(e)}") from e
    offset += config_len

    shapes = expected_shapes(config)
    expected_values = sum(int(np.prod(shape)) for shape in shapes.values())
    expected_size = offset + expected_values * 8 + DIGEST_SIZE
    if len(data) != expected_size:
        raise CheckpointError(
            f"检查点大小{len(data)}与配置推导的{expected_size}不一致（截断或形状不符）: {path}")

    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"检查点摘要校验失败: {path}")

    arrays = OrderedDict()
    for name, shape in shapes.items():
        count = int(np.prod(shape))
        values = np.frombuffer(data, dtype='<f8', count=count, offset=offset)
        arrays[name] = values.astype(np.float64).reshape(shape)
        offset += count * 8

    logger.debug(f"检查点已加载: {path}")
    return SeparatorParams(arrays), config
