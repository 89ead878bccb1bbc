#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
损失与评价指标模块
"""

from .loss_base import LossSpec, LossBase
from .snr import (neg_thresh_snr, neg_thresh_snr_grad, si_snr, neg_si_snr_grad,
                  si_snr_improvement, loss_matrix)
from .loss_factory import loss_factory, LossFactory

__all__ = ['LossSpec', 'LossBase', 'neg_thresh_snr', 'neg_thresh_snr_grad', 'si_snr',
           'neg_si_snr_grad', 'si_snr_improvement', 'loss_matrix', 'loss_factory',
           'LossFactory']
