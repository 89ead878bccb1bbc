#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
数据生成包：合成声源、混合、清单、MoM构造与监督子集
"""

from .examples import MixExample, MoMExample, SYNTHETIC, CORPUS
from .synthetic import (FAMILIES, LOW_BAND, HIGH_BAND, NOISE_BAND, gen_synthetic_source,
                        make_mixture, add_noise, synthesize)
from .manifest import (ManifestRecord, DatasetManifest, TRAIN, TEST, read_manifest,
                       write_manifest, simulate_corpus, export_wavs)
from .mom import (TWO_SRC, ONE_OR_TWO_SRC, STRATEGIES, build_unsupervised_set, dynamic_remix,
                  supervised_subset, write_mom_index, round_half_up)

__all__ = [
    'MixExample', 'MoMExample', 'SYNTHETIC', 'CORPUS',
    'FAMILIES', 'LOW_BAND', 'HIGH_BAND', 'NOISE_BAND', 'gen_synthetic_source',
    'make_mixture', 'add_noise', 'synthesize',
    'ManifestRecord', 'DatasetManifest', 'TRAIN', 'TEST', 'read_manifest',
    'write_manifest', 'simulate_corpus', 'export_wavs',
    'TWO_SRC', 'ONE_OR_TWO_SRC', 'STRATEGIES', 'build_unsupervised_set', 'dynamic_remix',
    'supervised_subset', 'write_mom_index', 'round_half_up',
]
