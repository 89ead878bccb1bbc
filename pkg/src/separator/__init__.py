#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
微型分离网络：前向、混合一致性、解析梯度、Adam与检查点
"""

from .config import SeparatorConfig
from .network import (SeparatorParams, init_params, forward, forward_array, backward_array,
                      mixture_consistency_project, expected_shapes, check_params)
from .objectives import MIXIT, PIT, MixitExample, PitExample, loss_and_grad, example_loss_and_grad
from .optimizer import AdamState, init_adam_state, adam_step
from .checkpoint import save_checkpoint, load_checkpoint
from .gradcheck import run_gradcheck, GradcheckReport

__all__ = ['SeparatorConfig', 'SeparatorParams', 'init_params', 'forward', 'forward_array',
           'backward_array', 'mixture_consistency_project', 'expected_shapes', 'check_params',
           'MIXIT', 'PIT', 'MixitExample', 'PitExample', 'loss_and_grad', 'example_loss_and_grad',
           'AdamState', 'init_adam_state', 'adam_step', 'save_checkpoint', 'load_checkpoint',
           'run_gradcheck', 'GradcheckReport']
