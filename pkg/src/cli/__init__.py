#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行界面模块

日志与进度写到stderr；机器可读的结果（key=value）写到stdout。
失败时在stderr输出一行: error code=<退出码> kind=<异常类名> detail=<信息>
"""

import os
import sys
import argparse
import traceback
from typing import List, Optional

from ..config.config import ExperimentConfig
from ..datagen.manifest import TRAIN
from ..datagen.mom import ONE_OR_TWO_SRC, build_unsupervised_set, write_mom_index
from ..pipeline import pilot, runner
from ..pipeline.evaluation import SELECTION_MODES
from ..separator.gradcheck import run_gradcheck, MAX_REL_ERROR
from ..utils.errors import SeparationError, GradientCheckError
from ..utils.logger import setup_logger
from ..utils.seeding import derive_seed

EXIT_OK = 0
EXIT_FAILURE = 1

COMMANDS = ("simulate", "train-teacher", "pseudo", "train-student", "finetune", "distill",
            "train-supervised", "eval", "gradcheck", "run-all", "pilot")


def build_parser() -> argparse.ArgumentParser:
    """创建参数解析器（每个子命令都接受公共参数）"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="实验配置文件（JSON），省略时使用默认玩具配置")
    common.add_argument("--seed", type=int, help="主随机种子，覆盖run.seed与data.seed")
    common.add_argument("--workdir", help="工作目录，覆盖paths.workdir")
    common.add_argument("--threads", type=int, help="样本级并行线程数，1为逐位可复现的参考模式")
    common.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")

    parser = argparse.ArgumentParser(prog="ts_mixit", description="教师-学生MixIT语音分离流水线")
    subparsers = parser.add_subparsers(dest="command", metavar="command")

    subparsers.add_parser("simulate", parents=[common], help="生成玩具语料清单与WAV")

    teacher_parser = subparsers.add_parser("train-teacher", parents=[common], help="MixIT训练教师模型")
    teacher_parser.add_argument("--variant", choices=["teacher", "teacher_2src"], default="teacher",
                                help="teacher使用data.strategy，teacher_2src固定为2源策略")

    subparsers.add_parser("pseudo", parents=[common], help="用教师模型生成伪目标")
    subparsers.add_parser("train-student", parents=[common], help="在伪目标上用PIT训练学生模型")
    subparsers.add_parser("finetune", parents=[common], help="在监督子集上微调学生模型")

    distill_parser = subparsers.add_parser("distill", parents=[common], help="蒸馏到另一结构的学生模型")
    distill_parser.add_argument("--from", dest="source", choices=["finetune", "student"],
                                default="finetune", help="作为蒸馏教师的模型")

    subparsers.add_parser("train-supervised", parents=[common], help="监督基线（10%%带参考数据）")

    eval_parser = subparsers.add_parser("eval", parents=[common], help="评价模型，输出si_snri_db")
    eval_parser.add_argument("--model", choices=runner.MODELS, default="student", help="被评价的模型")
    eval_parser.add_argument("--mode", choices=SELECTION_MODES, default=None,
                             help="输出选择方式，默认教师为energy、其余为direct")

    gradcheck_parser = subparsers.add_parser("gradcheck", parents=[common], help="解析梯度与有限差分对比")
    gradcheck_parser.add_argument("--coords", type=int, default=40, help="每个配置抽样的坐标数")

    subparsers.add_parser("run-all", parents=[common], help="执行完整流水线并写出汇总表")

    pilot_parser = subparsers.add_parser("pilot", parents=[common], help="试运行：收敛指标与多种子顺序检查")
    pilot_parser.add_argument("--extra-seeds", type=int, default=pilot.DEFAULT_EXTRA_SEEDS,
                              help="主种子之外追加的种子数")
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        config.set("run", "seed", args.seed)
        config.set("data", "seed", args.seed)
    if args.workdir is not None:
        config.set("paths", "workdir", args.workdir)
    if args.threads is not None:
        config.set("run", "threads", args.threads)
    if args.log_level is not None:
        config.set("run", "log_level", args.log_level)
    return config


def _emit(**values):
    for key, value in values.items():
        print(f"{key}={value}")


def cmd_simulate(config: ExperimentConfig, args) -> int:
    manifest = runner.prepare_data(config)
    workspace = runner.Workspace(config)
    _emit(manifest=workspace.manifest_path, num_train=len(manifest.split(TRAIN)),
          num_test=len(manifest.split("test")))

    strategy = config.get("data", "strategy")
    moms = build_unsupervised_set(manifest, strategy, config.get("data", "single_fraction"),
                                  derive_seed(config.get("data", "seed"), "mom", "teacher"))
    index_path = write_mom_index(os.path.join(os.path.dirname(workspace.manifest_path),
                                              f"moms_{strategy}.jsonl"), moms)
    single = sum(1 for mom in moms if mom.total_sources == 3)
    _emit(mom_index=index_path, num_moms=len(moms))
    if strategy == ONE_OR_TWO_SRC:
        _emit(single_source_moms=single)
    return EXIT_OK


def cmd_train(config: ExperimentConfig, args) -> int:
    processor = runner.make_processor(config)
    manifest = runner.load_data(config)
    if args.command == "train-teacher":
        result = runner.run_teacher(config, manifest, args.variant, processor)
    elif args.command == "train-student":
        result = runner.run_student(config, manifest, processor=processor)
    elif args.command == "finetune":
        result = runner.run_finetune(config, manifest, processor)
    elif args.command == "distill":
        result = runner.run_distill(config, manifest, args.source, processor)
    else:
        result = runner.run_supervised(config, manifest, processor)
    _emit(checkpoint=result.checkpoint_path, steps=result.num_steps)
    return EXIT_OK


def cmd_pseudo(config: ExperimentConfig, args) -> int:
    manifest = runner.load_data(config)
    pseudo = runner.run_pseudo(config, manifest, runner.make_processor(config))
    _emit(pseudo_targets=runner.Workspace(config).pseudo_path(), kept=len(pseudo))
    return EXIT_OK


def cmd_eval(config: ExperimentConfig, args) -> int:
    manifest = runner.load_data(config)
    report = runner.run_eval(config, manifest, args.model, args.mode, runner.make_processor(config))
    _emit(si_snri_db=f"{report.mean_si_snri_db:.6f}")
    return EXIT_OK


def cmd_gradcheck(config: ExperimentConfig, args) -> int:
    report = run_gradcheck(seed=int(config.get("run", "seed", 0)), num_coords=args.coords)
    _emit(max_rel_error=f"{report.max_rel_error:.6e}",
          fraction_within_target=f"{report.fraction_within_target:.4f}")
    if not report.passed:
        raise GradientCheckError(f"最大相对误差{report.max_rel_error:.3e}超过阈值{MAX_REL_ERROR:.0e}")
    return EXIT_OK


def cmd_run_all(config: ExperimentConfig, args) -> int:
    summary = runner.run_all(config)
    for row in summary.rows:
        print(f"method={row.method} strategy={row.strategy or '-'} M={row.num_outputs} "
              f"selection={row.selection} si_snri_db={row.si_snri_db:.6f}")
    for check in summary.checks:
        print(f"check={check.name} margin_db={check.margin_db:+.6f} holds={str(check.holds).lower()}")
    _emit(summary=summary.summary_path)
    return EXIT_OK


def cmd_pilot(config: ExperimentConfig, args) -> int:
    report = pilot.run_pilot(config, args.extra_seeds)
    for metric in report.metrics:
        print(f"metric={metric.name} value_db={metric.value_db:+.6f} "
              f"threshold_db={metric.threshold_db:+.1f} holds={str(metric.holds).lower()}")
    held = report.seeds_where_required_checks_hold()
    _emit(convergence=report.convergence_path, seeds=report.seeds_path,
          seeds_holding=",".join(str(seed) for seed in held) or "-")
    return EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "train-teacher": cmd_train,
    "pseudo": cmd_pseudo,
    "train-student": cmd_train,
    "finetune": cmd_train,
    "distill": cmd_train,
    "train-supervised": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "run-all": cmd_run_all,
    "pilot": cmd_pilot,
}


def _report_error(error: BaseException, code: int):
    detail = " ".join(str(error).split())
    print(f"error code={code} kind={type(error).__name__} detail={detail}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行应用程序入口点

    Args:
        argv: 参数列表，None时读取sys.argv

    Returns:
        int: 退出码
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_OK

    logger = setup_logger(args.log_level or "INFO")
    try:
        config = _load_config(args)
        logger = setup_logger(config.get("run", "log_level", "INFO"),
                              runner.Workspace(config).log_dir)
        logger.info(f"命令 {args.command} 启动，工作目录: {config.workdir}")
        config.validate()
        return HANDLERS[args.command](config, args)
    except SeparationError as e:
        logger.error(f"命令 {args.command} 失败: {str(e)}")
        _report_error(e, e.exit_code)
        return e.exit_code
    except Exception as e:
        logger.error(f"命令行应用程序错误: {str(e)}")
        logger.error(traceback.format_exc())
        _report_error(e, EXIT_FAILURE)
        return EXIT_FAILURE
    finally:
        logger.info(f"命令 {args.command} 结束")
