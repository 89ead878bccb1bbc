#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
日志记录工具模块
"""

import os
import logging
from logging.handlers import RotatingFileHandler
import time
from typing import Optional

LOGGER_NAME = 'ts_mixit'

# 日志文件目录
LOG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), 'logs')


def setup_logger(log_level=logging.INFO, log_dir: Optional[str] = None):
    """
    设置和配置日志记录器

    控制台输出走stderr，stdout只留给机器可读的结果。

    Args:
        log_level: 日志级别，默认为INFO
        log_dir: 日志文件目录，默认为项目根目录下的logs

    Returns:
        logging.Logger: 配置好的日志记录器
    """
    if isinstance(log_level, str):
        log_level = getattr(logging, log_level.upper(), logging.INFO)

    log_dir = log_dir or LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(log_level)
    logger.propagate = False

    # 避免重复添加handler
    if logger.hasHandlers():
        for handler in list(logger.handlers):
            handler.close()
        logger.handlers.clear()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)

    log_file = os.path.join(log_dir, f'app_{time.strftime("%Y%m%d")}.log')
    file_handler = RotatingFileHandler(
        log_file, maxBytes=10*1024*1024, backupCount=5, encoding='utf-8'
    )
    file_handler.setLevel(log_level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s'
    )
    console_handler.setFormatter(formatter)
    file_handler.setFormatter(formatter)

    logger.addHandler(console_handler)
    logger.addHandler(file_handler)

    return logger

# 全局logger实例
logger = setup_logger()
