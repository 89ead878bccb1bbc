#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""测试公共夹具"""

import numpy as np
import pytest

from src.datagen.manifest import simulate_corpus
from src.separator.config import SeparatorConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_teacher_config():
    return SeparatorConfig(num_filters=8, kernel_len=16, stride=8, hidden_dim=16,
                           num_hidden_layers=1, num_outputs=4, seed=3)


@pytest.fixture
def tiny_student_config():
    return SeparatorConfig(num_filters=8, kernel_len=16, stride=8, hidden_dim=16,
                           num_hidden_layers=1, num_outputs=2, seed=5)


@pytest.fixture
def tiny_manifest():
    """4条训练、2条测试，每条0.05秒"""
    return simulate_corpus(num_train=4, num_test=2, duration_s=0.05, seed=7)


