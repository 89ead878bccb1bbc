#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练阶段：MixIT教师、伪目标生成、PIT学生、微调、蒸馏与监督基线
"""

import json
import os
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

from ..assign.selection import select_top_energy
from ..audio.waveform import SourceStack, Waveform, energy
from ..datagen.examples import MixExample, MoMExample
from ..separator.checkpoint import load_checkpoint
from ..separator.config import SeparatorConfig
from ..separator.network import SeparatorParams, init_params, forward, check_params
from ..utils.batch_processor import BatchProcessor
from ..utils.errors import CheckpointError, ConfigError, DataError, ShapeMismatchError
from ..utils.logger import logger
from .stage_config import StageConfig, TEACHER, STUDENT, FINETUNE, DISTILL, SUPERVISED
from .training import StageResult, run_training, segment_mom, segment_pair

# 选中通道能量低于混合能量的该比例时丢弃该样本
MIN_ENERGY_RATIO = 1e-6
ENERGY_SELECTION = "energy"
DIRECT_SELECTION = "direct"

CheckpointLike = Union[str, StageResult, Tuple[SeparatorParams, SeparatorConfig]]
MomSource = Union[Sequence[MoMExample], Callable[[int], Sequence[MoMExample]]]


@dataclass(frozen=True, eq=False)
class PseudoTarget:
    """一条原始混合及其伪目标"""

    example_id: str
    mixture: Waveform
    targets: SourceStack
    indices: Tuple[int, ...]
    energies: Tuple[float, ...]


def resolve_checkpoint(ckpt: CheckpointLike) -> Tuple[SeparatorParams, SeparatorConfig]:
    """
    把检查点路径、阶段结果或(参数, 配置)统一为(参数, 配置)

    Raises:
        PrerequisiteError: 检查点文件不存在
    """
    if isinstance(ckpt, StageResult):
        return ckpt.params, ckpt.config
    if isinstance(ckpt, str):
        return load_checkpoint(ckpt)
    params, config = ckpt
    check_params(params, config)
    return params, config


def _check_stage(cfg: StageConfig, expected: str):
    if cfg.stage != expected:
        raise ConfigError(f"需要{expected}阶段配置，实际为{cfg.stage}")


def train_teacher(moms: MomSource, cfg: StageConfig, out_dir: str,
                  processor: Optional[BatchProcessor] = None) -> StageResult:
    """
    用MixIT训练教师模型

    Args:
        moms: 固定的MoM列表，或按epoch返回MoM列表的函数（动态重混）
        cfg: 教师阶段配置
        out_dir: 输出目录
        processor: 批量处理器

    Returns:
        StageResult: 教师检查点与损失曲线
    """
    _check_stage(cfg, TEACHER)

    def epoch_examples(epoch: int):
        epoch_moms = moms(epoch) if callable(moms) else moms
        pieces = []
        for mom in epoch_moms:
            pieces.extend(segment_mom(mom, cfg.segment_seconds))
        return pieces

    return run_training(init_params(cfg.separator), cfg, epoch_examples, out_dir, processor)


def _teacher_outputs(params: SeparatorParams, config: SeparatorConfig,
                     mixtures: Sequence[MixExample], processor: BatchProcessor) -> List[SourceStack]:
    return processor.map_ordered(lambda example: forward(params, config, example.mixture),
                                 list(mixtures), process_name="教师前向")


def generate_pseudo_targets(teacher_ckpt: CheckpointLike, mixtures: Sequence[MixExample], C: int,
                            processor: Optional[BatchProcessor] = None,
                            selection: str = ENERGY_SELECTION,
                            out_path: Optional[str] = None) -> List[PseudoTarget]:
    """
    教师处理原始混合（不是MoM），按整段能量选出C路作为伪目标

    Args:
        teacher_ckpt: 教师检查点
        mixtures: 原始混合
        C: 伪目标数
        processor: 批量处理器
        selection: energy为能量选择，direct为直接使用前C路（M == C时）
        out_path: 伪目标清单输出路径（JSON-lines），None时不写出

    Returns:
        List[PseudoTarget]: 伪目标，能量过低的样本被丢弃
    """
    params, config = resolve_checkpoint(teacher_ckpt)
    if config.num_outputs < C:
        raise ConfigError(f"教师输出通道数{config.num_outputs}小于伪目标数{C}")
    if selection == DIRECT_SELECTION and config.num_outputs != C:
        raise ConfigError(f"直接输出要求M == C，实际M={config.num_outputs}, C={C}")
    if selection not in (ENERGY_SELECTION, DIRECT_SELECTION):
        raise ConfigError(f"未知的伪目标选择方式: {selection}")

    processor = processor or BatchProcessor(1)
    outputs = _teacher_outputs(params, config, mixtures, processor)

    pseudo, records = [], []
    for example, ests in zip(mixtures, outputs):
        if selection == ENERGY_SELECTION:
            targets, indices = select_top_energy(ests, C)
        else:
            targets, indices = ests, tuple(range(C))
        energies = tuple(energy(target) for target in targets)
        dropped = min(energies) < MIN_ENERGY_RATIO * energy(example.mixture)
        records.append({"id": example.id, "indices": list(indices),
                        "energies": list(energies), "dropped": dropped})
        if dropped:
            logger.warning(f"样本{example.id}的伪目标能量过低，已丢弃: {min(energies):.3e}")
            continue
        pseudo.append(PseudoTarget(example.id, example.mixture, targets, indices, energies))

    if out_path:
        write_pseudo_manifest(out_path, records)
    logger.info(f"伪目标生成完成: 保留 {len(pseudo)} / {len(mixtures)} 条 (C={C}, 选择={selection})")
    return pseudo


def write_pseudo_manifest(path: str, records: Sequence[dict]) -> str:
    """写出伪目标清单（JSON-lines，含选中通道序号）"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def _train_pit(params: SeparatorParams, pairs: Sequence[Tuple[str, Waveform, SourceStack]],
               cfg: StageConfig, out_dir: str, processor: Optional[BatchProcessor]) -> StageResult:
    C = cfg.num_target_sources
    pieces = []
    for index, (example_id, mixture, targets) in enumerate(pairs):
        if targets.num_sources != C:
            raise ShapeMismatchError(f"样本{example_id}的目标数为{targets.num_sources}，应为{C}",
                                     index=index)
        pieces.extend(segment_pair(example_id, mixture, targets, cfg.segment_seconds))
    return run_training(params, cfg, lambda epoch: pieces, out_dir, processor)


def train_student(pseudo: Sequence[PseudoTarget], cfg: StageConfig, out_dir: str,
                  processor: Optional[BatchProcessor] = None) -> StageResult:
    """用PIT损失在伪目标上训练学生模型（M == C）"""
    _check_stage(cfg, STUDENT)
    pairs = [(item.example_id, item.mixture, item.targets) for item in pseudo]
    return _train_pit(init_params(cfg.separator), pairs, cfg, out_dir, processor)


def _reference_pairs(examples: Sequence[MixExample]) -> List[Tuple[str, Waveform, SourceStack]]:
    pairs = []
    for index, example in enumerate(examples):
        if example.references is None:
            raise DataError(f"样本{example.id}没有参考源", index=index)
        pairs.append((example.id, example.mixture, example.references))
    return pairs


def finetune(student_ckpt: CheckpointLike, supervised: Sequence[MixExample], cfg: StageConfig,
             out_dir: str, processor: Optional[BatchProcessor] = None) -> StageResult:
    """
    从学生参数出发在带参考的监督子集上继续训练

    所有层都可训练，优化器状态重新初始化。

    Raises:
        CheckpointError: 检查点结构与cfg.separator不一致
    """
    _check_stage(cfg, FINETUNE)
    params, config = resolve_checkpoint(student_ckpt)
    if config.architecture() != cfg.separator.architecture():
        raise CheckpointError(f"检查点结构{config.architecture()}与微调配置"
                              f"{cfg.separator.architecture()}不一致")
    pairs = _reference_pairs(supervised)
    return _train_pit(params, pairs, cfg.with_updates(separator=config), out_dir, processor)


def distill(teacher_ckpt: CheckpointLike, mixtures: Sequence[MixExample], cfg: StageConfig,
            out_dir: str, processor: Optional[BatchProcessor] = None,
            pseudo_out: Optional[str] = None) -> StageResult:
    """
    蒸馏：冻结的M == C教师在无标注混合上重新生成伪目标，训练不同结构的学生

    Raises:
        ConfigError: 教师M != C，或学生网络尺寸与教师相同
    """
    _check_stage(cfg, DISTILL)
    teacher_params, teacher_config = resolve_checkpoint(teacher_ckpt)
    C = cfg.num_target_sources
    if teacher_config.num_outputs != C:
        raise ConfigError(f"蒸馏教师要求M == C，实际M={teacher_config.num_outputs}, C={C}")
    if teacher_config.dimensions() == cfg.separator.dimensions():
        raise ConfigError(f"蒸馏学生的网络尺寸必须与教师不同: {cfg.separator.dimensions()}")

    pseudo = generate_pseudo_targets((teacher_params, teacher_config), mixtures, C, processor,
                                     selection=DIRECT_SELECTION, out_path=pseudo_out)
    pairs = [(item.example_id, item.mixture, item.targets) for item in pseudo]
    return _train_pit(init_params(cfg.separator), pairs, cfg, out_dir, processor)


def train_supervised(supervised: Sequence[MixExample], cfg: StageConfig, out_dir: str,
                     processor: Optional[BatchProcessor] = None) -> StageResult:
    """监督基线：在固定监督子集上从头做PIT训练（不重混）"""
    _check_stage(cfg, SUPERVISED)
    return _train_pit(init_params(cfg.separator), _reference_pairs(supervised), cfg,
                      out_dir, processor)


def read_pseudo_manifest(path: str) -> List[dict]:
    """读取伪目标清单"""
    if not os.path.isfile(path):
        raise DataError(f"伪目标清单不存在: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def verify_pseudo_targets(pseudo: Sequence[PseudoTarget], records: Sequence[dict]):
    """
    核对重新生成的伪目标与清单中记录的选中序号是否一致

    Raises:
        DataError: 序号或保留样本不一致
    """
    kept = [record for record in records if not record.get("dropped")]
    if [item.example_id for item in pseudo] != [record["id"] for record in kept]:
        raise DataError("重新生成的伪目标样本与清单不一致")
    for index, (item, record) in enumerate(zip(pseudo, kept)):
        if list(item.indices) != list(record["indices"]):
            raise DataError(f"样本{item.example_id}的选中通道{item.indices}与清单"
                            f"{record['indices']}不一致", index=index)
