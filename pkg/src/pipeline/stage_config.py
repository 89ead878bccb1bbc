#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练阶段配置
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict

from ..losses.loss_base import LossSpec
from ..separator.config import SeparatorConfig
from ..utils.errors import ConfigError

TEACHER = "teacher"
STUDENT = "student"
FINETUNE = "finetune"
DISTILL = "distill"
SUPERVISED = "supervised"
STAGES = (TEACHER, STUDENT, FINETUNE, DISTILL, SUPERVISED)

# 各阶段的默认epoch数（玩具语料规模）
DEFAULT_EPOCHS = {TEACHER: 30, STUDENT: 30, FINETUNE: 10, DISTILL: 30, SUPERVISED: 30}


@dataclass(frozen=True)
class StageConfig:
    """
    单个训练阶段的配置

    教师阶段要求 M ≥ 2C 且开启混合一致性；其余阶段要求 M == C。
    """

    stage: str
    separator: SeparatorConfig
    epochs: int = 30
    batch_size: int = 8
    lr: float = 1e-3
    loss: LossSpec = field(default_factory=LossSpec)
    seed: int = 0
    segment_seconds: float = 4.0
    num_target_sources: int = 2

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ConfigError(f"未知的训练阶段: {self.stage}")
        if not isinstance(self.separator, SeparatorConfig):
            raise ConfigError("separator必须是SeparatorConfig")
        if self.epochs < 0:
            raise ConfigError(f"{self.stage}: epochs不能为负: {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"{self.stage}: batch_size必须至少为1: {self.batch_size}")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ConfigError(f"{self.stage}: 学习率必须为正数: {self.lr}")
        if not self.segment_seconds > 0:
            raise ConfigError(f"{self.stage}: segment_seconds必须为正数: {self.segment_seconds}")
        if self.num_target_sources < 1:
            raise ConfigError(f"{self.stage}: 目标源数必须至少为1")

        M, C = self.separator.num_outputs, self.num_target_sources
        if self.stage == TEACHER:
            if M < 2 * C:
                raise ConfigError(f"教师模型要求输出通道数M ≥ 2C，实际M={M}, C={C}")
            if not self.separator.mixture_consistency:
                raise ConfigError("教师模型必须开启混合一致性")
        elif M != C:
            raise ConfigError(f"{self.stage}阶段要求M == C，实际M={M}, C={C}")

    @property
    def loss_mode(self) -> str:
        return "mixit" if self.stage == TEACHER else "pit"

    def with_updates(self, **changes) -> 'StageConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {"stage": self.stage, "separator": self.separator.to_dict(),
                "epochs": self.epochs, "batch_size": self.batch_size, "lr": self.lr,
                "loss": self.loss.to_dict(), "seed": self.seed,
                "segment_seconds": self.segment_seconds,
                "num_target_sources": self.num_target_sources}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StageConfig':
        try:
            stage = data["stage"]
            return cls(stage=stage,
                       separator=SeparatorConfig.from_dict(data.get("separator", {})),
                       epochs=int(data.get("epochs", DEFAULT_EPOCHS.get(stage, 30))),
                       batch_size=int(data.get("batch_size", 8)),
                       lr=float(data.get("lr", 1e-3)),
                       loss=LossSpec.from_dict(data.get("loss", {})),
                       seed=int(data.get("seed", 0)),
                       segment_seconds=float(data.get("segment_seconds", 4.0)),
                       num_target_sources=int(data.get("num_target_sources", 2)))
        except KeyError as e:
            raise ConfigError(f"阶段配置缺少字段: {str(e)}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"阶段配置字段类型错误: {str(e)}") from e
