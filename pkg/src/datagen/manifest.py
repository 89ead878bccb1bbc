#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
数据清单模块

清单为JSON-lines文件，每行一条记录:
    {"id": ..., "split": "train"|"test", "num_sources": 1|2,
     "synth": {...} | null, "path": "...wav" | null, "reference_paths": [...],
     "noise_snr_db": null}
"""

import json
import math
import os
from dataclasses import dataclass, field, asdict
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..audio.waveform import DEFAULT_SAMPLE_RATE, SourceStack, mix
from ..audio.wav_io import read_wav, write_wav
from ..utils.errors import DataError
from ..utils.logger import logger
from ..utils.seeding import derive_seed
from .examples import MixExample, CORPUS
from .synthetic import add_noise, draw_synthesis_spec, synthesize

TRAIN = "train"
TEST = "test"
SPLITS = (TRAIN, TEST)


@dataclass(frozen=True)
class ManifestRecord:
    """清单中的一条记录"""

    id: str
    num_sources: int
    split: str = TRAIN
    synth: Optional[dict] = None
    path: Optional[str] = None
    reference_paths: tuple = field(default_factory=tuple)
    noise_snr_db: Optional[float] = None

    def __post_init__(self):
        if not self.id:
            raise DataError("记录ID不能为空")
        if self.split not in SPLITS:
            raise DataError(f"记录{self.id}的划分无效: {self.split}")
        if self.num_sources not in (1, 2):
            raise DataError(f"记录{self.id}的源数量必须为1或2: {self.num_sources}")
        if self.synth is None and self.path is None:
            raise DataError(f"记录{self.id}既没有合成参数也没有文件路径")
        object.__setattr__(self, 'reference_paths', tuple(self.reference_paths))
        if self.reference_paths and len(self.reference_paths) != self.num_sources:
            raise DataError(f"记录{self.id}的参考文件数与num_sources不一致")

    @property
    def has_references(self) -> bool:
        return self.synth is not None or bool(self.reference_paths)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['reference_paths'] = list(self.reference_paths)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'ManifestRecord':
        try:
            return cls(id=str(data['id']), num_sources=int(data['num_sources']),
                       split=data.get('split', TRAIN), synth=data.get('synth'),
                       path=data.get('path'),
                       reference_paths=tuple(data.get('reference_paths') or ()),
                       noise_snr_db=data.get('noise_snr_db'))
        except KeyError as e:
            raise DataError(f"清单记录缺少字段: {str(e)}") from e


class DatasetManifest:
    """数据清单，负责把记录物化为MixExample（带缓存）"""

    def __init__(self, records: Iterable[ManifestRecord], base_dir: str = "."):
        self.records: List[ManifestRecord] = list(records)
        self.base_dir = base_dir
        self._cache: Dict[str, MixExample] = {}

        seen = set()
        for index, record in enumerate(self.records):
            if record.id in seen:
                raise DataError(f"清单中存在重复ID: {record.id}", index=index)
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def ids(self) -> List[str]:
        return [record.id for record in self.records]

    def split(self, name: str) -> List[ManifestRecord]:
        """按划分返回记录，保持清单顺序"""
        if name not in SPLITS:
            raise DataError(f"未知的数据划分: {name}")
        return [record for record in self.records if record.split == name]

    def subset(self, records: Sequence[ManifestRecord]) -> 'DatasetManifest':
        subset = DatasetManifest(records, self.base_dir)
        subset._cache = self._cache
        return subset

    def _resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def load_example(self, record: ManifestRecord) -> MixExample:
        """
        物化一条记录

        优先使用内联合成参数（精确的64位浮点）；否则读取WAV。
        有参考文件时混合信号按mix(references)重建，避免量化误差破坏参考之和约束。
        """
        cached = self._cache.get(record.id)
        if cached is not None:
            return cached

        if record.synth is not None:
            example = synthesize(record.synth, record.id)
        else:
            example = self._load_corpus_example(record)

        if record.noise_snr_db is not None:
            example = add_noise(example, float(record.noise_snr_db),
                                derive_seed(example.seed or 0, record.id))

        self._cache[record.id] = example
        return example

    def _load_corpus_example(self, record: ManifestRecord) -> MixExample:
        mixture = read_wav(self._resolve(record.path))
        if not record.reference_paths:
            return MixExample(id=record.id, mixture=mixture, references=None,
                              num_sources=record.num_sources, provenance=CORPUS)

        references = SourceStack(tuple(read_wav(self._resolve(p)) for p in record.reference_paths))
        rebuilt = mix(references)
        if len(rebuilt) != len(mixture):
            raise DataError(f"记录{record.id}的参考长度与混合长度不一致")
        deviation = float(np.max(np.abs(rebuilt.samples - mixture.samples)))
        if deviation > record.num_sources / 32768.0:
            logger.warning(f"记录{record.id}的混合文件与参考之和偏差较大: {deviation:.3e}")
        return MixExample(id=record.id, mixture=rebuilt, references=references,
                          num_sources=record.num_sources, provenance=CORPUS)

    def load_examples(self, split: str) -> List[MixExample]:
        return [self.load_example(record) for record in self.split(split)]


def write_manifest(path: str, manifest: DatasetManifest) -> str:
    """
    写入JSON-lines清单

    Args:
        path: 输出路径
        manifest: 清单

    Returns:
        str: 输出路径
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in manifest.records:
            f.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    logger.info(f"清单已写入: {path} ({len(manifest)} 条记录)")
    return path


def read_manifest(path: str) -> DatasetManifest:
    """
    读取JSON-lines清单，相对路径以清单所在目录为基准

    Raises:
        DataError: 文件不存在或格式错误
    """
    if not os.path.isfile(path):
        raise DataError(f"清单文件不存在: {path}")
    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(ManifestRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                raise DataError(f"清单第{line_no}行不是合法JSON: {str(e)}") from e
    return DatasetManifest(records, os.path.dirname(os.path.abspath(path)))


def simulate_corpus(num_train: int = 64, num_test: int = 16, duration_s: float = 4.0,
                    seed: int = 0, sample_rate: int = DEFAULT_SAMPLE_RATE,
                    gain_range_db=(-3.0, 3.0),
                    noise_snr_db: Optional[float] = None) -> DatasetManifest:
    """
    生成合成玩具语料的清单（每条为两个不同类别声源的混合）

    每条记录的随机性只来自(seed, 记录ID)。noise_snr_db不为None时为含噪条件：
    加载时混合中叠加白噪声，参考源保持纯净。

    Returns:
        DatasetManifest: 训练集在前、测试集在后
    """
    if num_train < 0 or num_test < 0:
        raise DataError("语料规模不能为负数")
    low, high = float(gain_range_db[0]), float(gain_range_db[1])
    if not (math.isfinite(low) and math.isfinite(high)) or low > high:
        raise DataError(f"增益范围无效: {gain_range_db}")
    if noise_snr_db is not None and not math.isfinite(float(noise_snr_db)):
        raise DataError(f"信噪比必须为有限值: {noise_snr_db}")

    records = []
    for split, count in ((TRAIN, num_train), (TEST, num_test)):
        for index in range(count):
            record_id = f"{split}_{index:05d}"
            spec = draw_synthesis_spec(derive_seed(seed, record_id), duration_s,
                                       sample_rate, (low, high))
            records.append(ManifestRecord(id=record_id, num_sources=2, split=split, synth=spec,
                                          noise_snr_db=noise_snr_db))
    logger.info(f"已生成合成语料清单: 训练 {num_train} 条, 测试 {num_test} 条"
                + ("" if noise_snr_db is None else f", 含噪 SNR={noise_snr_db} dB"))
    return DatasetManifest(records)


def export_wavs(manifest: DatasetManifest, out_dir: str) -> DatasetManifest:
    """
    把清单中的每条样本写为WAV（混合与参考），返回带文件路径的新清单

    合成参数保留在记录中，加载时仍优先使用合成参数。
    """
    os.makedirs(out_dir, exist_ok=True)
    records = []
    for record in manifest.records:
        example = manifest.load_example(record)
        mixture_name = f"{record.id}.wav"
        write_wav(os.path.join(out_dir, mixture_name), example.mixture)
        reference_names = []
        if example.references is not None:
            for index, reference in enumerate(example.references):
                name = f"{record.id}_s{index + 1}.wav"
                write_wav(os.path.join(out_dir, name), reference)
                reference_names.append(name)
        records.append(ManifestRecord(id=record.id, num_sources=record.num_sources,
                                      split=record.split, synth=record.synth,
                                      path=mixture_name, reference_paths=tuple(reference_names),
                                      noise_snr_db=record.noise_snr_db))
    exported = DatasetManifest(records, out_dir)
    exported._cache = manifest._cache
    return exported
