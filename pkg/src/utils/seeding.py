#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
种子派生工具

子种子只由(基础种子, 标识)决定，与执行顺序无关。
"""

import hashlib


def derive_seed(*parts) -> int:
    """
    由若干部分派生一个63位非负整数种子

    Args:
        *parts: 基础种子、epoch、样本ID等任意可转为字符串的值

    Returns:
        int: 派生种子
    """
    hash_obj = hashlib.sha256()
    for part in parts:
        hash_obj.update(str(part).encode('utf-8'))
        hash_obj.update(b"\x00")
    return int.from_bytes(hash_obj.digest()[:8], 'little') >> 1
