#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""测试辅助函数"""

from src.audio.waveform import Waveform, SourceStack


def random_stack(rng, num_sources, length, scale=0.5):
    return SourceStack.from_array(scale * rng.standard_normal((num_sources, length)))


def random_waveform(rng, length, scale=0.5):
    return Waveform(scale * rng.standard_normal(length))
