#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os

import pytest

from src.config import ExperimentConfig, StageSettings, STAGE_BLOCKS
from src.pipeline.stage_config import TEACHER, DISTILL
from src.utils.errors import ConfigError


def write_json(path, data):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f)
    return str(path)


def test_defaults_validate():
    config = ExperimentConfig()
    config.validate()
    assert config.get("data", "strategy") == "one_or_two_src"
    assert config.get("data", "missing", 5) == 5
    assert config.path("manifest") == os.path.join("work", "data", "manifest.jsonl")


def test_user_file_is_merged_over_defaults(tmp_path):
    path = write_json(tmp_path / "exp.json", {
        "data": {"num_train": 10},
        "stages": {"student": {"epochs": 3, "separator": {"hidden_dim": 32}}},
    })
    config = ExperimentConfig(path)
    assert config.get("data", "num_train") == 10
    assert config.get("data", "num_test") == 16
    student = StageSettings(config).stage("student")
    assert student.epochs == 3
    assert student.separator.hidden_dim == 32
    assert student.separator.num_outputs == 2


@pytest.mark.parametrize("content", ['{"network": {}}', '{"data": ', '[1, 2]'])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "exp.json"
    path.write_text(content, encoding='utf-8')
    with pytest.raises(ConfigError):
        ExperimentConfig(str(path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig(str(tmp_path / "absent.json"))


def test_unknown_section_cannot_be_set():
    with pytest.raises(ConfigError):
        ExperimentConfig().set("network", "depth", 3)


@pytest.mark.parametrize("section, key, value", [
    ("data", "strategy", "three_src"),
    ("data", "single_fraction", 1.5),
    ("data", "num_train", 0),
    ("data", "gain_range_db", [3.0, -3.0]),
    ("data", "noise_snr_db", "loud"),
    ("data", "noise_snr_db", float("inf")),
    ("run", "threads", 0),
    ("eval", "teacher_modes", ["direct"]),
])
def test_validate_rejects_bad_values(section, key, value):
    config = ExperimentConfig()
    config.set(section, key, value)
    with pytest.raises(ConfigError):
        config.validate()


def test_teacher_needs_twice_the_sources():
    config = ExperimentConfig()
    config.config["stages"]["teacher"]["separator"]["num_outputs"] = 3
    with pytest.raises(ConfigError):
        config.validate()


def test_student_needs_c_outputs():
    config = ExperimentConfig()
    config.config["stages"]["finetune"]["separator"]["num_outputs"] = 4
    with pytest.raises(ConfigError):
        config.validate()


def test_stage_seeds_are_derived_per_stage():
    stages = StageSettings(ExperimentConfig()).all_stages()
    assert set(stages) == set(STAGE_BLOCKS)
    seeds = [cfg.seed for cfg in stages.values()]
    assert len(set(seeds)) == len(seeds)
    again = StageSettings(ExperimentConfig()).all_stages()
    assert [cfg.seed for cfg in again.values()] == seeds
    assert stages["student"].separator.seed == stages["student"].seed

    reseeded = ExperimentConfig()
    reseeded.set("run", "seed", 1)
    assert StageSettings(reseeded).stage("student").seed != stages["student"].seed


def test_stage_blocks_have_expected_shape():
    settings = StageSettings(ExperimentConfig())
    teacher = settings.stage("teacher_2src")
    assert teacher.stage == TEACHER
    assert teacher.separator.num_outputs == 4
    distill = settings.stage("distill")
    assert distill.stage == DISTILL
    assert distill.separator.hidden_dim == 96
    assert distill.separator.dimensions() != settings.separator("student").dimensions()
    with pytest.raises(ConfigError):
        settings.stage("pretrain")


def test_explicit_seed_is_kept(tmp_path):
    path = write_json(tmp_path / "exp.json", {"stages": {"student": {"seed": 77}}})
    student = StageSettings(ExperimentConfig(path)).stage("student")
    assert student.seed == 77
    assert student.separator.seed == 77


def test_save_and_reload(tmp_path):
    config = ExperimentConfig()
    config.set("data", "num_train", 12)
    path = str(tmp_path / "saved" / "exp.json")
    assert config.save(path)
    again = ExperimentConfig(path)
    assert again.config == config.config
    assert not ExperimentConfig().save()


def test_load_reads_file_or_falls_back_to_defaults(tmp_path):
    path = write_json(tmp_path / "exp.json", {"run": {"threads": 3}})
    loaded = ExperimentConfig.load(path)
    assert loaded.config_file == path
    assert loaded.get("run", "threads") == 3
    assert ExperimentConfig.load(None).config == ExperimentConfig().config
    with pytest.raises(ConfigError):
        ExperimentConfig.load(str(tmp_path / "absent.json"))
