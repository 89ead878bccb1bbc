#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os

import pytest

from src.cli import main, build_parser
from src.separator import SeparatorConfig, init_params, save_checkpoint
from src.utils.logger import setup_logger


@pytest.fixture(autouse=True)
def reset_logger(tmp_path):
    yield
    setup_logger("WARNING", str(tmp_path / "logs"))


def small_config(tmp_path, **data):
    values = {"num_train": 10, "num_test": 2, "duration_s": 0.1, "single_fraction": 0.2}
    values.update(data)
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"data": values}), encoding='utf-8')
    return str(path)


def test_gradcheck_passes(tmp_path, capsys):
    code = main(["gradcheck", "--coords", "5", "--workdir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "max_rel_error=" in out
    assert "fraction_within_target=" in out


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--frobnicate"])
    assert info.value.code == 2


def test_subcommand_help_lists_common_flags(capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["eval", "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert "--threads" in out
    assert "--mode" in out


def test_missing_prerequisite(tmp_path, capsys):
    code = main(["pseudo", "--workdir", str(tmp_path / "empty")])
    err = capsys.readouterr().err
    assert code == 4
    assert "error code=4 kind=PrerequisiteError" in err


def test_invalid_config_exits_with_config_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"stages": {"teacher": {"separator": {"num_outputs": 3}}}}),
                    encoding='utf-8')
    code = main(["simulate", "--config", str(path), "--workdir", str(tmp_path / "w")])
    assert code == 3
    assert "kind=ConfigError" in capsys.readouterr().err
    assert not os.path.exists(tmp_path / "w" / "data")


def test_simulate_is_reproducible(tmp_path, capsys):
    config = small_config(tmp_path)
    workdirs = [str(tmp_path / "a"), str(tmp_path / "b")]
    for workdir in workdirs:
        assert main(["simulate", "--config", config, "--workdir", workdir]) == 0
    out = capsys.readouterr().out
    assert "num_train=10" in out
    assert "single_source_moms=1" in out

    data_dirs = [os.path.join(workdir, "data") for workdir in workdirs]
    names = sorted(os.listdir(data_dirs[0]))
    assert "train_00000.wav" in names and "train_00000_s1.wav" in names
    assert names == sorted(os.listdir(data_dirs[1]))
    for name in names:
        with open(os.path.join(data_dirs[0], name), 'rb') as a, \
                open(os.path.join(data_dirs[1], name), 'rb') as b:
            assert a.read() == b.read(), name


def test_eval_prints_mean_improvement(tmp_path, capsys):
    config = small_config(tmp_path)
    workdir = str(tmp_path / "w")
    assert main(["simulate", "--config", config, "--workdir", workdir]) == 0
    student = SeparatorConfig(num_filters=8, kernel_len=16, stride=8, hidden_dim=16,
                              num_hidden_layers=1, num_outputs=2, seed=1)
    save_checkpoint(init_params(student), student,
                    os.path.join(workdir, "checkpoints", "student", "model.ckpt"))
    capsys.readouterr()

    code = main(["eval", "--config", config, "--workdir", workdir, "--model", "student"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("si_snri_db=")
    assert os.path.isfile(os.path.join(workdir, "eval", "student_direct.csv"))

    assert main(["eval", "--config", config, "--workdir", workdir, "--model", "student",
                 "--mode", "energy"]) == 3


def test_missing_config_file_exits_with_config_code(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "absent.json"),
                 "--workdir", str(tmp_path / "w")])
    assert code == 3
    assert "kind=ConfigError" in capsys.readouterr().err


def test_pilot_subcommand_defaults_to_three_extra_seeds():
    assert build_parser().parse_args(["pilot"]).extra_seeds == 3
    assert build_parser().parse_args(["pilot", "--extra-seeds", "0"]).extra_seeds == 0
