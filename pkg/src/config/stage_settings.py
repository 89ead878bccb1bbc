#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
阶段设置模块，把配置节转换为类型化的阶段配置
"""

from typing import Dict

from ..pipeline.stage_config import StageConfig
from ..separator.config import SeparatorConfig
from ..utils.errors import ConfigError
from ..utils.seeding import derive_seed
from .config import ExperimentConfig, STAGE_BLOCKS


class StageSettings:
    """阶段设置管理类"""

    def __init__(self, config: ExperimentConfig):
        """
        初始化阶段设置

        Args:
            config: 实验配置
        """
        self.config = config
        self.master_seed = int(config.get("run", "seed", 0))
        self.num_sources = int(config.get("eval", "num_sources", 2))

    def _seed(self, name: str) -> int:
        return derive_seed(self.master_seed, "stage", name) % (2 ** 31)

    def stage(self, name: str) -> StageConfig:
        """
        构造某阶段的StageConfig

        未显式给出的种子由主种子与阶段名派生。

        Raises:
            ConfigError: 阶段不存在或配置无效
        """
        if name not in STAGE_BLOCKS:
            raise ConfigError(f"未知的阶段配置块: {name}")
        block = self.config.stage_block(name)
        block.setdefault("stage", name)
        block.setdefault("seed", self._seed(name))
        block.setdefault("num_target_sources", self.num_sources)
        separator = block.setdefault("separator", {})
        if not isinstance(separator, dict):
            raise ConfigError(f"{name}.separator必须是JSON对象")
        separator.setdefault("seed", block["seed"])
        return StageConfig.from_dict(block)

    def separator(self, name: str) -> SeparatorConfig:
        return self.stage(name).separator

    def all_stages(self) -> Dict[str, StageConfig]:
        return {name: self.stage(name) for name in STAGE_BLOCKS}
