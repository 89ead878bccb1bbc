#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置模块，用于管理实验配置

配置文件为分节的JSON，用户值覆盖在默认值之上。
"""

import copy
import json
import math
import os
from typing import Dict, Any, Optional

from ..utils.errors import ConfigError
from ..utils.logger import logger

SECTIONS = ("paths", "data", "stages", "eval", "run")
STAGE_BLOCKS = ("teacher", "teacher_2src", "student", "finetune", "distill", "supervised")


def _merge(base: Dict[str, Any], override: Dict[str, Any], where: str = "") -> Dict[str, Any]:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value, f"{where}{key}.")
        else:
            base[key] = value
    return base


class ExperimentConfig:
    """实验配置管理类"""

    def __init__(self, config_file: Optional[str] = None):
        """
        初始化配置

        Args:
            config_file: 配置文件路径，None时只使用默认配置
        """
        self.config_file = config_file
        self.config = self._get_default_config()
        if config_file is not None:
            user_config = self._load_config(config_file)
            unknown = set(user_config) - set(SECTIONS)
            if unknown:
                raise ConfigError(f"配置文件中存在未知的配置节: {sorted(unknown)}")
            _merge(self.config, user_config)
            logger.info(f"已加载配置文件: {config_file}")

    @classmethod
    def load(cls, path: Optional[str]) -> 'ExperimentConfig':
        """
        从配置文件加载，path为空时返回默认配置

        Raises:
            ConfigError: 文件不存在、不是JSON对象或含未知配置节
        """
        if not path:
            logger.info("未指定配置文件，使用默认配置")
            return cls()
        return cls(path)

    @staticmethod
    def _load_config(path: str) -> Dict[str, Any]:
        """
        加载配置文件

        Raises:
            ConfigError: 文件不存在或不是合法的JSON对象
        """
        if not os.path.isfile(path):
            raise ConfigError(f"配置文件不存在: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"配置文件不是合法JSON: {str(e)}") from e
        if not isinstance(data, dict):
            raise ConfigError("配置文件顶层必须是JSON对象")
        return data

    @staticmethod
    def _get_default_config() -> Dict[str, Any]:
        """
        获取默认配置（玩具语料规模）

        Returns:
            Dict[str, Any]: 默认配置项字典
        """
        teacher_separator = {"num_outputs": 4, "mixture_consistency": True}
        student_separator = {"num_outputs": 2, "mixture_consistency": True}
        return {
            "paths": {
                "workdir": "work",
                "manifest": "data/manifest.jsonl",
                "checkpoints": "checkpoints"
            },
            "data": {
                "strategy": "one_or_two_src",
                "single_fraction": 0.10,
                "num_train": 64,
                "num_test": 16,
                "duration_s": 4.0,
                "sample_rate": 8000,
                "gain_range_db": [-3.0, 3.0],
                "noise_snr_db": None,
                "supervised_fraction": 0.10,
                "dynamic_remix": True,
                "export_wavs": True,
                "seed": 0
            },
            "stages": {
                "teacher": {"stage": "teacher", "epochs": 30, "separator": dict(teacher_separator)},
                "teacher_2src": {"stage": "teacher", "epochs": 30, "separator": dict(teacher_separator)},
                "student": {"stage": "student", "epochs": 30, "separator": dict(student_separator)},
                "finetune": {"stage": "finetune", "epochs": 10, "separator": dict(student_separator)},
                "distill": {"stage": "distill", "epochs": 30,
                            "separator": dict(student_separator, hidden_dim=96, num_hidden_layers=3)},
                "supervised": {"stage": "supervised", "epochs": 30, "separator": dict(student_separator)}
            },
            "eval": {
                "num_sources": 2,
                "teacher_modes": ["energy", "oracle"]
            },
            "run": {
                "seed": 0,
                "threads": 1,
                "log_level": "INFO"
            }
        }

    def get(self, section: str, key: str, default=None) -> Any:
        """
        获取配置项值

        Args:
            section: 配置节
            key: 配置项键名
            default: 默认值，当配置项不存在时返回

        Returns:
            Any: 配置项值
        """
        if section in self.config and key in self.config[section]:
            return self.config[section][key]
        return default

    def set(self, section: str, key: str, value: Any):
        """
        设置配置项值（只修改内存中的配置）

        Args:
            section: 配置节
            key: 配置项键名
            value: 配置项值
        """
        if section not in SECTIONS:
            raise ConfigError(f"未知的配置节: {section}")
        self.config.setdefault(section, {})[key] = value

    def stage_block(self, name: str) -> Dict[str, Any]:
        """返回某阶段配置块的副本"""
        stages = self.config.get("stages", {})
        if name not in stages:
            raise ConfigError(f"配置中缺少阶段: {name}")
        return copy.deepcopy(stages[name])

    def copy(self) -> 'ExperimentConfig':
        """深拷贝，修改副本不影响原配置"""
        duplicate = ExperimentConfig()
        duplicate.config_file = self.config_file
        duplicate.config = copy.deepcopy(self.config)
        return duplicate

    @property
    def workdir(self) -> str:
        return self.get("paths", "workdir", "work")

    def path(self, key: str) -> str:
        """返回paths节中相对工作目录解析后的路径"""
        value = self.get("paths", key)
        if value is None:
            raise ConfigError(f"paths节缺少: {key}")
        return value if os.path.isabs(value) else os.path.join(self.workdir, value)

    def save(self, path: Optional[str] = None) -> bool:
        """
        保存配置到文件

        Returns:
            bool: 是否保存成功
        """
        path = path or self.config_file
        if not path:
            logger.error("保存配置失败: 未指定文件路径")
            return False
        try:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False, sort_keys=True)
            logger.debug(f"配置已保存: {path}")
            return True
        except OSError as e:
            logger.error(f"保存配置失败: {str(e)}")
            return False

    def validate(self):
        """
        在开始任何工作之前校验整个配置（包括各阶段的M约束）

        Raises:
            ConfigError: 任一配置项无效
        """
        from ..datagen.mom import STRATEGIES
        from .stage_settings import StageSettings

        data = self.config["data"]
        if data.get("strategy") not in STRATEGIES:
            raise ConfigError(f"data.strategy无效: {data.get('strategy')}")
        for key in ("single_fraction", "supervised_fraction"):
            value = data.get(key)
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise ConfigError(f"data.{key}必须在[0, 1]内: {value}")
        for key in ("num_train", "num_test", "sample_rate"):
            value = data.get(key)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"data.{key}必须为正整数: {value}")
        duration = data.get("duration_s")
        if not isinstance(duration, (int, float)) or not (duration > 0 and math.isfinite(duration)):
            raise ConfigError(f"data.duration_s必须为正数: {duration}")
        gains = data.get("gain_range_db")
        if not (isinstance(gains, list) and len(gains) == 2 and gains[0] <= gains[1]):
            raise ConfigError(f"data.gain_range_db必须为[下限, 上限]: {gains}")
        noise = data.get("noise_snr_db")
        if noise is not None and not (isinstance(noise, (int, float)) and math.isfinite(noise)):
            raise ConfigError(f"data.noise_snr_db必须为有限数值或null: {noise}")

        threads = self.get("run", "threads", 1)
        if not isinstance(threads, int) or threads < 1:
            raise ConfigError(f"run.threads必须为正整数: {threads}")
        for mode in self.get("eval", "teacher_modes", []):
            if mode not in ("energy", "oracle"):
                raise ConfigError(f"教师评价方式无效: {mode}")

        settings = StageSettings(self)
        for name in STAGE_BLOCKS:
            settings.stage(name)
        logger.debug("配置校验通过")
