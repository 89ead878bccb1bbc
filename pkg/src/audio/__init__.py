#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
波形容器、能量、分段与WAV读写
"""

from .waveform import (DEFAULT_SAMPLE_RATE, Waveform, SourceStack, mix, energy,
                       segment, segment_stack, concatenate)
from .wav_io import read_wav, write_wav

__all__ = ['DEFAULT_SAMPLE_RATE', 'Waveform', 'SourceStack', 'mix', 'energy',
           'segment', 'segment_stack', 'concatenate', 'read_wav', 'write_wav']
