#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练流水线包：阶段配置、训练循环、各训练阶段与评价

完整编排（run_all）在 pipeline.runner 中。
"""

from .stage_config import StageConfig, STAGES, TEACHER, STUDENT, FINETUNE, DISTILL, SUPERVISED
from .training import StageResult, run_training, segment_mom, segment_pair, write_loss_curve
from .stages import (PseudoTarget, train_teacher, generate_pseudo_targets, train_student, finetune,
                     distill, train_supervised, resolve_checkpoint)
from .evaluation import (EvalReport, DIRECT, ENERGY, ORACLE, evaluate, audit_output_channels,
                         best_permutation_si_snri, write_eval_csv)

__all__ = ['StageConfig', 'STAGES', 'TEACHER', 'STUDENT', 'FINETUNE', 'DISTILL', 'SUPERVISED',
           'StageResult', 'run_training', 'segment_mom', 'segment_pair', 'write_loss_curve',
           'PseudoTarget', 'train_teacher', 'generate_pseudo_targets', 'train_student', 'finetune',
           'distill', 'train_supervised', 'resolve_checkpoint',
           'EvalReport', 'DIRECT', 'ENERGY', 'ORACLE', 'evaluate', 'audit_output_channels',
           'best_permutation_si_snri', 'write_eval_csv']
