#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置模块初始化
"""

from .config import ExperimentConfig, SECTIONS, STAGE_BLOCKS
from .stage_settings import StageSettings

__all__ = ['ExperimentConfig', 'SECTIONS', 'STAGE_BLOCKS', 'StageSettings']
