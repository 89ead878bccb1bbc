#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
通用训练循环

每个epoch打乱样本顺序（种子由阶段种子与epoch派生），最后一个不完整批次保留。
"""

import csv
import os
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..audio.waveform import SourceStack, segment_stack
from ..datagen.examples import MoMExample
from ..separator.checkpoint import save_checkpoint
from ..separator.config import SeparatorConfig
from ..separator.network import SeparatorParams
from ..separator.objectives import MixitExample, PitExample, loss_and_grad
from ..separator.optimizer import init_adam_state, adam_step
from ..utils.batch_processor import BatchProcessor
from ..utils.errors import DataError, NonFiniteLossError
from ..utils.logger import logger
from ..utils.seeding import derive_seed
from .stage_config import StageConfig

CHECKPOINT_NAME = "model.ckpt"
LOSS_CURVE_NAME = "loss_curve.csv"
LOSS_CURVE_COLUMNS = ("step", "epoch", "loss_db")
MOVING_AVERAGE_EPOCHS = 5


@dataclass
class StageResult:
    """一个训练阶段的产物"""

    stage: str
    checkpoint_path: str
    params: SeparatorParams
    config: SeparatorConfig
    loss_curve: List[Tuple[int, int, float]] = field(default_factory=list)
    loss_curve_path: Optional[str] = None

    @property
    def num_steps(self) -> int:
        return len(self.loss_curve)


def segment_mom(mom: MoMExample, segment_seconds: float) -> List[MixitExample]:
    """把MoM的两路混合同步切成训练片段"""
    pieces = segment_stack(SourceStack((mom.x1, mom.x2)), segment_seconds, drop_last=False)
    return [MixitExample(piece[0], piece[1], f"{mom.id}@{index}")
            for index, piece in enumerate(pieces)]


def segment_pair(example_id: str, mixture, targets: SourceStack,
                 segment_seconds: float) -> List[PitExample]:
    """把(混合, 目标)同步分段，保证通道对应关系在分段后不变"""
    stack = SourceStack((mixture,) + tuple(targets))
    pieces = segment_stack(stack, segment_seconds, drop_last=False)
    return [PitExample(piece[0], piece.select(range(1, piece.num_sources)), f"{example_id}@{index}")
            for index, piece in enumerate(pieces)]


def write_loss_curve(path: str, curve: Sequence[Tuple[int, int, float]]) -> str:
    """写出损失曲线CSV（step, epoch, loss_db）"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LOSS_CURVE_COLUMNS)
        for step, epoch, loss in curve:
            writer.writerow((step, epoch, repr(float(loss))))
    return path


def _log_moving_average(stage: str, epoch_means: List[float]):
    window = MOVING_AVERAGE_EPOCHS
    if len(epoch_means) < 2 * window:
        return
    averages = np.convolve(epoch_means, np.ones(window) / window, mode='valid')
    increases = int(np.sum(np.diff(averages) > 0))
    if increases:
        logger.warning(f"{stage}: {window}-epoch滑动平均损失有 {increases} 次上升")
    else:
        logger.info(f"{stage}: {window}-epoch滑动平均损失单调不增")


def run_training(params: SeparatorParams, cfg: StageConfig,
                 epoch_examples: Callable[[int], Sequence], out_dir: str,
                 processor: Optional[BatchProcessor] = None) -> StageResult:
    """
    执行训练循环并保存检查点与损失曲线

    Args:
        params: 初始参数
        cfg: 阶段配置
        epoch_examples: 给定epoch返回该epoch训练片段的函数
        out_dir: 阶段输出目录
        processor: 批量处理器

    Returns:
        StageResult: 训练结果

    Raises:
        NonFiniteLossError: 损失非有限，训练中止并转储当前状态
    """
    processor = processor or BatchProcessor(1)
    os.makedirs(out_dir, exist_ok=True)
    state = init_adam_state(params, lr=cfg.lr)
    curve: List[Tuple[int, int, float]] = []
    epoch_means: List[float] = []
    step = 0

    logger.info(f"开始训练阶段 {cfg.stage}: epochs={cfg.epochs}, batch_size={cfg.batch_size}, "
                f"M={cfg.separator.num_outputs}, 参数量={params.num_parameters()}")

    for epoch in range(cfg.epochs):
        examples = list(epoch_examples(epoch))
        if not examples:
            raise DataError(f"{cfg.stage}: 第{epoch}个epoch没有训练样本")
        rng = np.random.default_rng(derive_seed(cfg.seed, cfg.stage, "shuffle", epoch))
        order = rng.permutation(len(examples))

        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = [examples[int(i)] for i in order[start:start + cfg.batch_size]]
            try:
                loss, grads = loss_and_grad(params, cfg.separator, batch, cfg.loss_mode,
                                            cfg.loss, processor)
                params, state = adam_step(params, grads, state)
            except NonFiniteLossError as e:
                dump_path = os.path.join(out_dir, f"abort_step{step}.ckpt")
                save_checkpoint(params, cfg.separator, dump_path)
                logger.error(f"{cfg.stage}: 第{epoch}个epoch出现非有限损失，"
                             f"已转储状态到 {dump_path}: {str(e)}")
                raise
            step += 1
            curve.append((step, epoch, loss))
            epoch_losses.append(loss)

        epoch_means.append(float(np.mean(epoch_losses)))
        logger.info(f"{cfg.stage}: epoch {epoch + 1}/{cfg.epochs}, 平均损失 {epoch_means[-1]:.3f} dB")

    _log_moving_average(cfg.stage, epoch_means)

    checkpoint_path = save_checkpoint(params, cfg.separator, os.path.join(out_dir, CHECKPOINT_NAME))
    curve_path = write_loss_curve(os.path.join(out_dir, LOSS_CURVE_NAME), curve)
    logger.info(f"训练阶段 {cfg.stage} 完成，共 {step} 步，检查点: {checkpoint_path}")
    return StageResult(stage=cfg.stage, checkpoint_path=checkpoint_path, params=params,
                       config=cfg.separator, loss_curve=curve, loss_curve_path=curve_path)
