#!/usr/bin/env python
# -*- coding: utf-8 -*-

import csv
import math
import os

import pytest

from src.config.config import ExperimentConfig
from src.losses import LossSpec
from src.pipeline import pilot
from src.pipeline.pilot import (ConvergenceMetric, DISTILL_GAP, ORACLE_STUDENT, TEACHER_DROP,
                                epoch_means, loss_drop, mean_pit_loss, measure_convergence,
                                oracle_pseudo_targets, run_pilot, seed_config)
from src.pipeline.runner import prepare_data, run_teacher
from src.pipeline.training import StageResult
from src.separator import forward, init_params
from src.utils.errors import DataError

STAGE_NAMES = ("teacher", "teacher_2src", "student", "finetune", "distill", "supervised")


def experiment(workdir, num_train, duration_s, epochs, separator, distill_separator, **stage_values):
    config = ExperimentConfig()
    config.set("paths", "workdir", workdir)
    for key, value in (("num_train", num_train), ("num_test", 2), ("duration_s", duration_s),
                       ("export_wavs", False)):
        config.set("data", key, value)
    for name in STAGE_NAMES:
        block = config.config["stages"][name]
        outputs = 4 if name.startswith("teacher") else 2
        block["separator"] = dict(separator, num_outputs=outputs)
        block["epochs"] = epochs
        block["segment_seconds"] = duration_s
        block.update(stage_values)
    config.config["stages"]["distill"]["separator"] = dict(distill_separator, num_outputs=2)
    return config


def tiny_experiment(workdir):
    small = {"num_filters": 8, "kernel_len": 16, "stride": 8, "hidden_dim": 16, "num_hidden_layers": 1}
    return experiment(workdir, 8, 0.05, 1, small, dict(small, hidden_dim=24, num_hidden_layers=2))


def curve_result(config, curve):
    return StageResult(stage="teacher", checkpoint_path="", params=init_params(config), config=config,
                       loss_curve=curve)


def test_loss_drop_compares_first_and_last_epoch(tiny_teacher_config):
    result = curve_result(tiny_teacher_config, [(1, 0, -2.0), (2, 0, -4.0), (3, 1, -8.0), (4, 1, -10.0)])
    assert epoch_means(result) == [-3.0, -9.0]
    assert loss_drop(result) == 6.0
    with pytest.raises(DataError):
        loss_drop(curve_result(tiny_teacher_config, []))


def test_metric_direction():
    assert ConvergenceMetric(TEACHER_DROP, 3.5, 3.0, at_least=True).holds
    assert not ConvergenceMetric(TEACHER_DROP, 2.5, 3.0, at_least=True).holds
    assert ConvergenceMetric(ORACLE_STUDENT, -25.0, -20.0).holds
    assert not ConvergenceMetric(DISTILL_GAP, -10.0, -15.0).holds


def test_oracle_pseudo_targets_are_the_references(tiny_manifest):
    examples = tiny_manifest.load_examples("train")
    pseudo = oracle_pseudo_targets(examples, 2)
    assert [item.example_id for item in pseudo] == [example.id for example in examples]
    for item, example in zip(pseudo, examples):
        assert item.targets is example.references
        assert item.indices == (0, 1)
    with pytest.raises(DataError):
        oracle_pseudo_targets(examples, 3)


def test_pit_loss_against_own_outputs_hits_floor(tiny_manifest, tiny_student_config):
    params = init_params(tiny_student_config)
    examples = tiny_manifest.load_examples("test")
    pairs = [(example.mixture, forward(params, tiny_student_config, example.mixture))
             for example in examples]
    value = mean_pit_loss((params, tiny_student_config), pairs)
    assert value == pytest.approx(-2 * LossSpec().snr_max_db, abs=1e-4)


def test_seed_config_leaves_original_untouched(tmp_path):
    config = tiny_experiment(str(tmp_path))
    seeded = seed_config(config, 7, str(tmp_path / "seed_7"))
    assert seeded.get("run", "seed") == 7
    assert seeded.get("data", "seed") == 7
    assert seeded.workdir == str(tmp_path / "seed_7")
    assert config.get("run", "seed") == 0
    assert config.workdir == str(tmp_path)


def test_run_pilot_writes_tables(tmp_path):
    report = run_pilot(tiny_experiment(str(tmp_path)), extra_seeds=1)
    assert sorted(report.summaries) == [0, 1]
    assert report.convergence_path == os.path.join(str(tmp_path), "pilot", "convergence.csv")

    with open(report.convergence_path, encoding='utf-8') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["metric", "value_db", "threshold_db", "holds"]
    assert [row[0] for row in rows[1:]] == [TEACHER_DROP, ORACLE_STUDENT, DISTILL_GAP]
    for row, metric in zip(rows[1:], report.metrics):
        assert math.isfinite(float(row[1]))
        assert row[3] == str(metric.holds).lower()

    with open(report.seeds_path, encoding='utf-8') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["seed", "check", "margin_db", "holds"]
    assert [(row[0], row[1]) for row in rows[1:]] == [
        (str(seed), name) for seed in (0, 1) for name in ("a", "b", "c", "d", "e")]
    for seed in (0, 1):
        assert os.path.isfile(os.path.join(str(tmp_path), "pilot", f"seed_{seed}", "summary.csv"))
    assert set(report.seeds_where_required_checks_hold()) <= {0, 1}


def test_negative_extra_seeds_rejected(tmp_path):
    with pytest.raises(DataError):
        run_pilot(tiny_experiment(str(tmp_path)), extra_seeds=-1)


@pytest.fixture(scope="module")
def convergence(tmp_path_factory):
    workdir = str(tmp_path_factory.mktemp("convergence"))
    separator = {"num_filters": 64, "kernel_len": 32, "stride": 16, "hidden_dim": 64,
                 "num_hidden_layers": 2}
    config = experiment(workdir, 16, 0.5, 30, separator,
                        dict(separator, hidden_dim=96, num_hidden_layers=3),
                        batch_size=2, lr=3e-3)
    manifest = prepare_data(config)
    teacher = run_teacher(config, manifest, "teacher")
    metrics = measure_convergence(config, manifest.load_examples("train"), teacher,
                                  os.path.join(workdir, "convergence"))
    return {metric.name: metric for metric in metrics}


@pytest.mark.slow
def test_teacher_mixit_loss_drops(convergence):
    assert convergence[TEACHER_DROP].value_db >= pilot.TEACHER_DROP_DB


@pytest.mark.slow
def test_student_on_true_sources_converges(convergence):
    assert convergence[ORACLE_STUDENT].value_db <= pilot.ORACLE_STUDENT_MAX_DB


@pytest.mark.slow
def test_distilled_student_tracks_its_teacher(convergence):
    assert convergence[DISTILL_GAP].value_db <= pilot.DISTILL_MAX_DB
