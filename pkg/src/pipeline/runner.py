#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
流水线编排模块

各阶段的产物放在工作目录下以阶段命名的子目录中:
    data/manifest.jsonl, data/*.wav
    checkpoints/<阶段>/model.ckpt, checkpoints/<阶段>/loss_curve.csv
    pseudo/pseudo_targets.jsonl, pseudo/distill_targets.jsonl
    eval/<模型>_<选择方式>.csv, summary.csv
"""

import csv
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..config.config import ExperimentConfig
from ..config.stage_settings import StageSettings
from ..datagen.manifest import (DatasetManifest, TRAIN, TEST, export_wavs, read_manifest,
                                simulate_corpus, write_manifest)
from ..datagen.mom import TWO_SRC, build_unsupervised_set, dynamic_remix, supervised_subset
from ..utils.batch_processor import BatchProcessor
from ..utils.errors import ConfigError, PrerequisiteError
from ..utils.logger import logger
from ..utils.seeding import derive_seed
from .evaluation import (DIRECT, ENERGY, ORACLE, EvalReport, audit_output_channels, evaluate,
                         write_eval_csv)
from .stages import (PseudoTarget, distill, finetune, generate_pseudo_targets, read_pseudo_manifest,
                     train_student, train_supervised, train_teacher, verify_pseudo_targets)
from .training import CHECKPOINT_NAME, StageResult

PSEUDO_NAME = "pseudo_targets.jsonl"
DISTILL_PSEUDO_NAME = "distill_targets.jsonl"
SUMMARY_COLUMNS = ("row_type", "method", "strategy", "num_outputs", "selection", "si_snri_db", "holds")

# 模型名 -> 训练阶段配置块
MODELS = ("teacher", "teacher_2src", "student", "finetune", "distill", "supervised")


class Workspace:
    """工作目录布局"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.root = config.workdir

    @property
    def manifest_path(self) -> str:
        return self.config.path("manifest")

    def checkpoint_dir(self, model: str) -> str:
        return os.path.join(self.config.path("checkpoints"), model)

    def checkpoint(self, model: str) -> str:
        return os.path.join(self.checkpoint_dir(model), CHECKPOINT_NAME)

    def pseudo_path(self, name: str = PSEUDO_NAME) -> str:
        return os.path.join(self.root, "pseudo", name)

    def eval_path(self, model: str, mode: str) -> str:
        return os.path.join(self.root, "eval", f"{model}_{mode}.csv")

    @property
    def summary_path(self) -> str:
        return os.path.join(self.root, "summary.csv")

    @property
    def log_dir(self) -> str:
        return os.path.join(self.root, "logs")


def require(path: str, what: str) -> str:
    """
    检查前一阶段产物是否存在

    Raises:
        PrerequisiteError: 文件不存在
    """
    if not os.path.exists(path):
        raise PrerequisiteError(f"缺少{what}: {path}")
    return path


def make_processor(config: ExperimentConfig) -> BatchProcessor:
    return BatchProcessor(int(config.get("run", "threads", 1)))


def prepare_data(config: ExperimentConfig) -> DatasetManifest:
    """生成玩具语料，写出清单与WAV（同一种子重复运行结果相同）"""
    workspace = Workspace(config)
    manifest = simulate_corpus(num_train=config.get("data", "num_train"),
                               num_test=config.get("data", "num_test"),
                               duration_s=config.get("data", "duration_s"),
                               seed=config.get("data", "seed"),
                               sample_rate=config.get("data", "sample_rate"),
                               gain_range_db=tuple(config.get("data", "gain_range_db")),
                               noise_snr_db=config.get("data", "noise_snr_db"))
    if config.get("data", "export_wavs", True):
        manifest = export_wavs(manifest, os.path.dirname(os.path.abspath(workspace.manifest_path)))
    write_manifest(workspace.manifest_path, manifest)
    return manifest


def load_data(config: ExperimentConfig) -> DatasetManifest:
    """读取已生成的清单"""
    return read_manifest(require(Workspace(config).manifest_path, "数据清单"))


def teacher_strategy(config: ExperimentConfig, model: str) -> str:
    return TWO_SRC if model == "teacher_2src" else config.get("data", "strategy")


def teacher_moms(config: ExperimentConfig, manifest: DatasetManifest, model: str):
    """返回教师训练用的MoM（动态重混时为按epoch生成的函数）"""
    strategy = teacher_strategy(config, model)
    fraction = config.get("data", "single_fraction")
    base_seed = derive_seed(config.get("data", "seed"), "mom", model)
    if config.get("data", "dynamic_remix", True):
        return lambda epoch: dynamic_remix(manifest, epoch, base_seed, strategy, fraction)
    return build_unsupervised_set(manifest, strategy, fraction, base_seed)


def run_teacher(config: ExperimentConfig, manifest: DatasetManifest, model: str = "teacher",
                processor: Optional[BatchProcessor] = None) -> StageResult:
    if model not in ("teacher", "teacher_2src"):
        raise ConfigError(f"未知的教师模型: {model}")
    cfg = StageSettings(config).stage(model)
    logger.info(f"训练教师 {model} (策略={teacher_strategy(config, model)})")
    return train_teacher(teacher_moms(config, manifest, model), cfg,
                         Workspace(config).checkpoint_dir(model), processor)


def run_pseudo(config: ExperimentConfig, manifest: DatasetManifest,
               processor: Optional[BatchProcessor] = None) -> List[PseudoTarget]:
    workspace = Workspace(config)
    teacher = require(workspace.checkpoint("teacher"), "教师检查点")
    return generate_pseudo_targets(teacher, manifest.load_examples(TRAIN),
                                   StageSettings(config).num_sources, processor,
                                   out_path=workspace.pseudo_path())


def load_pseudo(config: ExperimentConfig, manifest: DatasetManifest,
                processor: Optional[BatchProcessor] = None) -> List[PseudoTarget]:
    """由教师检查点重新生成伪目标，并与伪目标清单中的选中序号核对"""
    workspace = Workspace(config)
    records = read_pseudo_manifest(require(workspace.pseudo_path(), "伪目标清单"))
    teacher = require(workspace.checkpoint("teacher"), "教师检查点")
    pseudo = generate_pseudo_targets(teacher, manifest.load_examples(TRAIN),
                                     StageSettings(config).num_sources, processor)
    verify_pseudo_targets(pseudo, records)
    return pseudo


def run_student(config: ExperimentConfig, manifest: DatasetManifest,
                pseudo: Optional[List[PseudoTarget]] = None,
                processor: Optional[BatchProcessor] = None) -> StageResult:
    if pseudo is None:
        pseudo = load_pseudo(config, manifest, processor)
    return train_student(pseudo, StageSettings(config).stage("student"),
                         Workspace(config).checkpoint_dir("student"), processor)


def _supervised(config: ExperimentConfig, manifest: DatasetManifest):
    return supervised_subset(manifest, config.get("data", "supervised_fraction"))


def run_finetune(config: ExperimentConfig, manifest: DatasetManifest,
                 processor: Optional[BatchProcessor] = None) -> StageResult:
    workspace = Workspace(config)
    student = require(workspace.checkpoint("student"), "学生检查点")
    return finetune(student, _supervised(config, manifest), StageSettings(config).stage("finetune"),
                    workspace.checkpoint_dir("finetune"), processor)


def run_distill(config: ExperimentConfig, manifest: DatasetManifest, teacher_model: str = "finetune",
                processor: Optional[BatchProcessor] = None) -> StageResult:
    workspace = Workspace(config)
    teacher = require(workspace.checkpoint(teacher_model), f"蒸馏教师({teacher_model})检查点")
    return distill(teacher, manifest.load_examples(TRAIN), StageSettings(config).stage("distill"),
                   workspace.checkpoint_dir("distill"), processor,
                   pseudo_out=workspace.pseudo_path(DISTILL_PSEUDO_NAME))


def run_supervised(config: ExperimentConfig, manifest: DatasetManifest,
                   processor: Optional[BatchProcessor] = None) -> StageResult:
    return train_supervised(_supervised(config, manifest), StageSettings(config).stage("supervised"),
                            Workspace(config).checkpoint_dir("supervised"), processor)


def default_mode(model: str) -> str:
    return ENERGY if model in ("teacher", "teacher_2src") else DIRECT


def run_eval(config: ExperimentConfig, manifest: DatasetManifest, model: str = "student",
             mode: Optional[str] = None, processor: Optional[BatchProcessor] = None) -> EvalReport:
    """评价某个已训练模型并写出评价CSV"""
    if model not in MODELS:
        raise ConfigError(f"未知的模型: {model}，可选: {', '.join(MODELS)}")
    mode = mode or default_mode(model)
    workspace = Workspace(config)
    checkpoint = require(workspace.checkpoint(model), f"{model}检查点")
    report = evaluate(checkpoint, manifest.load_examples(TEST), mode,
                      StageSettings(config).num_sources, processor, model_id=model)
    write_eval_csv(workspace.eval_path(model, mode), report)
    return report


@dataclass
class SummaryRow:
    """汇总表的一行"""

    method: str
    strategy: str
    num_outputs: int
    selection: str
    si_snri_db: float


@dataclass
class OrderingCheck:
    """顺序关系检查：left ≥ right"""

    name: str
    left: str
    right: str
    margin_db: float

    @property
    def holds(self) -> bool:
        return self.margin_db >= 0.0


@dataclass
class RunSummary:
    """完整流水线的结果"""

    rows: List[SummaryRow] = field(default_factory=list)
    checks: List[OrderingCheck] = field(default_factory=list)
    reports: Dict[Tuple[str, str], EvalReport] = field(default_factory=dict)
    results: Dict[str, StageResult] = field(default_factory=dict)
    channel_counts: Dict[str, set] = field(default_factory=dict)
    summary_path: Optional[str] = None

    def score(self, model: str, mode: str) -> float:
        return self.reports[(model, mode)].mean_si_snri_db


def write_summary(path: str, summary: RunSummary) -> str:
    """写出汇总表与顺序关系检查"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary.rows:
            writer.writerow(("model", row.method, row.strategy, row.num_outputs, row.selection,
                             repr(float(row.si_snri_db)), ""))
        for check in summary.checks:
            writer.writerow(("check", f"{check.name}: {check.left} >= {check.right}", "", "", "",
                             repr(float(check.margin_db)), str(check.holds).lower()))
    return path


def _ordering_checks(summary: RunSummary) -> List[OrderingCheck]:
    pairs = [
        ("a", ("teacher", ORACLE), ("teacher", ENERGY)),
        ("b", ("student", DIRECT), ("teacher", ENERGY)),
        ("c", ("finetune", DIRECT), ("student", DIRECT)),
        ("d", ("distill", DIRECT), ("student", DIRECT)),
        ("e", ("teacher", ENERGY), ("teacher_2src", ENERGY)),
    ]
    checks = []
    for name, left, right in pairs:
        if left not in summary.reports or right not in summary.reports:
            continue
        margin = summary.score(*left) - summary.score(*right)
        checks.append(OrderingCheck(name, f"{left[0]}({left[1]})", f"{right[0]}({right[1]})", margin))
    return checks


def run_all(config: ExperimentConfig) -> RunSummary:
    """
    执行完整流水线：数据、两种策略的教师、伪目标、学生、微调、蒸馏、监督基线与评价

    顺序关系只记录在日志与summary.csv中，不作为失败条件。

    Returns:
        RunSummary: 汇总结果
    """
    config.validate()
    processor = make_processor(config)
    settings = StageSettings(config)
    workspace = Workspace(config)
    summary = RunSummary()

    manifest = prepare_data(config)
    test = manifest.load_examples(TEST)
    C = settings.num_sources

    for model in ("teacher", "teacher_2src"):
        summary.results[model] = run_teacher(config, manifest, model, processor)
    pseudo = run_pseudo(config, manifest, processor)
    summary.results["student"] = run_student(config, manifest, pseudo, processor)
    summary.results["finetune"] = run_finetune(config, manifest, processor)
    summary.results["distill"] = run_distill(config, manifest, "finetune", processor)
    summary.results["supervised"] = run_supervised(config, manifest, processor)

    for model in MODELS:
        result = summary.results[model]
        modes = config.get("eval", "teacher_modes") if model.startswith("teacher") else [DIRECT]
        for mode in modes:
            report = evaluate(result, test, mode, C, processor, model_id=model)
            write_eval_csv(workspace.eval_path(model, mode), report)
            summary.reports[(model, mode)] = report
            strategy = teacher_strategy(config, model) if model.startswith("teacher") else ""
            summary.rows.append(SummaryRow(model, strategy, result.config.num_outputs, mode,
                                           report.mean_si_snri_db))
        summary.channel_counts[model] = audit_output_channels(result, test, processor)
        logger.info(f"通道审计 {model}: {sorted(summary.channel_counts[model])}")

    summary.checks = _ordering_checks(summary)
    for check in summary.checks:
        level = logger.info if check.holds else logger.warning
        level(f"顺序检查 {check.name}: {check.left} - {check.right} = {check.margin_db:+.3f} dB "
              f"({'成立' if check.holds else '不成立'})")

    summary.summary_path = write_summary(workspace.summary_path, summary)
    logger.info(f"流水线完成，汇总表: {summary.summary_path}")
    return summary
