#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
混合的混合(MoM)构造模块

two_src:        两路都是2源混合，xbar含4个源
one_or_two_src: 其中round(single_fraction·MoM数)个MoM的x2换成单源混合，xbar含3个源
"""

import json
import math
import os
from decimal import Decimal, ROUND_HALF_UP
from typing import List

import numpy as np

from ..utils.errors import DataError, ConfigError
from ..utils.logger import logger
from ..utils.seeding import derive_seed
from .examples import MixExample, MoMExample
from .manifest import DatasetManifest, TRAIN

TWO_SRC = "two_src"
ONE_OR_TWO_SRC = "one_or_two_src"
STRATEGIES = (TWO_SRC, ONE_OR_TWO_SRC)


def round_half_up(value: float) -> int:
    return int(Decimal(repr(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _single_source_version(example: MixExample) -> MixExample:
    if example.references is None:
        raise DataError(f"样本{example.id}没有参考源，无法构造单源混合")
    reference = example.references[0]
    return MixExample(id=f"{example.id}#s1", mixture=reference,
                      references=example.references.select([0]), num_sources=1,
                      provenance=example.provenance, seed=example.seed)


def build_unsupervised_set(manifest: DatasetManifest, strategy: str = TWO_SRC,
                           single_fraction: float = 0.10, seed: int = 0,
                           split: str = TRAIN) -> List[MoMExample]:
    """
    随机无放回配对，构造MoM训练集

    Args:
        manifest: 数据清单
        strategy: two_src 或 one_or_two_src
        single_fraction: 单源MoM比例（仅one_or_two_src）
        seed: 配对种子
        split: 使用的数据划分

    Returns:
        List[MoMExample]: MoM列表

    Raises:
        ConfigError: 策略或比例无效
        DataError: 可配对的混合不足两条
    """
    if strategy not in STRATEGIES:
        raise ConfigError(f"未知的MoM构造策略: {strategy}")
    if not 0.0 <= single_fraction <= 1.0:
        raise ConfigError(f"单源比例必须在[0, 1]内: {single_fraction}")

    records = manifest.split(split)
    pool = [record for record in records if record.num_sources == 2]
    if len(pool) != len(records):
        logger.info(f"跳过 {len(records) - len(pool)} 条非2源记录，不参与配对")
    if len(pool) < 2:
        raise DataError(f"可配对的2源混合不足两条: {len(pool)}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))
    if len(order) % 2 == 1:
        leftover = pool[int(order[-1])]
        logger.warning(f"混合数量为奇数，丢弃剩余混合: {leftover.id}")
        order = order[:-1]
    pairs = order.reshape(-1, 2)

    num_single = round_half_up(single_fraction * len(pairs)) if strategy == ONE_OR_TWO_SRC else 0
    single_pairs = set(int(i) for i in rng.choice(len(pairs), size=num_single, replace=False))

    moms = []
    for pair_index, (i, j) in enumerate(pairs):
        first = manifest.load_example(pool[int(i)])
        second = manifest.load_example(pool[int(j)])
        if pair_index in single_pairs:
            second = _single_source_version(second)
        moms.append(MoMExample.build(f"{first.id}+{second.id}", first.mixture, second.mixture,
                                     first.num_sources, second.num_sources))

    logger.debug(f"构造MoM {len(moms)} 条 (策略={strategy}, 单源={num_single}, 种子={seed})")
    return moms


def dynamic_remix(manifest: DatasetManifest, epoch: int, base_seed: int,
                  strategy: str = TWO_SRC, single_fraction: float = 0.10,
                  split: str = TRAIN) -> List[MoMExample]:
    """每个epoch用种子hash(base_seed, epoch)重新配对"""
    return build_unsupervised_set(manifest, strategy, single_fraction,
                                  derive_seed(base_seed, "remix", epoch), split)


def supervised_subset(manifest: DatasetManifest, fraction: float = 0.10,
                      split: str = TRAIN) -> List[MixExample]:
    """
    取清单顺序下前⌈fraction·N⌉条带参考的样本，不做重混

    Raises:
        ConfigError: 比例不在[0, 1]内
        DataError: 选中的记录没有参考源
    """
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"监督子集比例必须在[0, 1]内: {fraction}")
    records = manifest.split(split)
    count = int(math.ceil(round(fraction * len(records), 9)))
    subset = []
    for index, record in enumerate(records[:count]):
        example = manifest.load_example(record)
        if example.references is None:
            raise DataError(f"监督子集中的样本{record.id}没有参考源", index=index)
        subset.append(example)
    return subset


def write_mom_index(path: str, moms: List[MoMExample]) -> str:
    """写出MoM配对索引（JSON-lines）"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for mom in moms:
            f.write(json.dumps({"id": mom.id, "sources_in_x1": mom.sources_in_x1,
                                "sources_in_x2": mom.sources_in_x2,
                                "total_sources": mom.total_sources}) + "\n")
    return path
