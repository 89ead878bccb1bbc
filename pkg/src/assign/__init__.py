#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
MixIT混合矩阵与PIT排列的精确求解
"""

from .results import MixingMatrix, Permutation, AssignmentResult
from .mixit import enumerate_mixing_matrices, mixit_loss, oracle_remix_select, remix
from .pit import pit_loss, hungarian_pit_check
from .selection import select_top_energy

__all__ = ['MixingMatrix', 'Permutation', 'AssignmentResult', 'enumerate_mixing_matrices',
           'mixit_loss', 'oracle_remix_select', 'remix', 'pit_loss', 'hungarian_pit_check',
           'select_top_energy']
