#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
合成声源与混合模块

三类合成声源占据互不重叠的频带：
    low_band_tone_complex   200–850 Hz 谐波复合音
    high_band_tone_complex  900–1900 Hz 等间隔分音复合音
    am_noise_band           2–3 kHz 调幅带通噪声
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..audio.waveform import DEFAULT_SAMPLE_RATE, Waveform, SourceStack, mix, energy
from ..utils.errors import DataError
from ..utils.seeding import derive_seed
from .examples import MixExample, SYNTHETIC

LOW_BAND = "low_band_tone_complex"
HIGH_BAND = "high_band_tone_complex"
NOISE_BAND = "am_noise_band"
FAMILIES = (LOW_BAND, HIGH_BAND, NOISE_BAND)

TARGET_RMS = 0.1
LOW_BAND_EDGES = (200.0, 850.0)
HIGH_BAND_EDGES = (900.0, 1900.0)
NOISE_BAND_EDGES = (2000.0, 3000.0)


def _num_samples(duration_s: float, sample_rate: int) -> int:
    if not duration_s > 0:
        raise DataError(f"时长必须为正数: {duration_s}")
    return max(1, int(math.floor(duration_s * sample_rate + 1e-9)))


def _syllable_envelope(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    rate = rng.uniform(2.0, 5.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return 0.6 + 0.4 * np.sin(2.0 * np.pi * rate * t + phase)


def _low_band(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    f0 = rng.uniform(LOW_BAND_EDGES[0], 400.0)
    partials = [k * f0 for k in range(1, 16) if k * f0 <= LOW_BAND_EDGES[1]]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(partials))
    signal = sum(np.sin(2.0 * np.pi * f * t + p) / (k + 1)
                 for k, (f, p) in enumerate(zip(partials, phases)))
    return signal * _syllable_envelope(t, rng)


def _high_band(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    f0 = rng.uniform(HIGH_BAND_EDGES[0], 1500.0)
    spacing = rng.uniform(80.0, 130.0)
    partials = [f0 + k * spacing for k in range(4)]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(partials))
    signal = sum(np.sin(2.0 * np.pi * f * t + p) for f, p in zip(partials, phases))
    return signal * _syllable_envelope(t, rng)


def _noise_band(t: np.ndarray, rng: np.random.Generator, sample_rate: int) -> np.ndarray:
    n = t.size
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spectrum[(freqs < NOISE_BAND_EDGES[0]) | (freqs > NOISE_BAND_EDGES[1])] = 0.0
    band = np.fft.irfft(spectrum, n=n)
    rate = rng.uniform(2.0, 6.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return band * (1.0 + 0.8 * np.sin(2.0 * np.pi * rate * t + phase))


def gen_synthetic_source(family: str, duration_s: float, seed: int,
                         sample_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    """
    生成合成声源

    结果只由(family, seed, duration_s, sample_rate)决定，RMS归一化到0.1。

    Args:
        family: 声源类别
        duration_s: 时长（秒）
        seed: 随机种子
        sample_rate: 采样率

    Returns:
        Waveform: 合成声源

    Raises:
        DataError: 未知类别或时长无效
    """
    if family not in FAMILIES:
        raise DataError(f"未知的合成声源类别: {family}")
    n = _num_samples(duration_s, sample_rate)
    rng = np.random.default_rng([int(seed), FAMILIES.index(family)])
    t = np.arange(n) / sample_rate

    if family == LOW_BAND:
        signal = _low_band(t, rng)
    elif family == HIGH_BAND:
        signal = _high_band(t, rng)
    else:
        signal = _noise_band(t, rng, sample_rate)

    signal = np.asarray(signal, dtype=np.float64) * np.ones(n)
    rms = math.sqrt(float(np.dot(signal, signal)) / n)
    if rms > 0.0:
        signal = signal * (TARGET_RMS / rms)
    return Waveform(signal, sample_rate)


def make_mixture(sources: SourceStack, gains_db: Sequence[float], example_id: str = "",
                 provenance: str = SYNTHETIC, seed: Optional[int] = None) -> MixExample:
    """
    按增益加权求和得到混合

    参考源保存为施加增益之后的信号，因此mix(references) == mixture。

    Args:
        sources: 1或2个源
        gains_db: 每个源的增益（dB），必须为有限值
        example_id: 样本ID
        provenance: 样本来源
        seed: 生成种子

    Returns:
        MixExample: 带参考的混合样本
    """
    if not 1 <= sources.num_sources <= 2:
        raise DataError(f"混合只支持1或2个源，实际为{sources.num_sources}")
    if len(gains_db) != sources.num_sources:
        raise DataError(f"增益个数{len(gains_db)}与源个数{sources.num_sources}不一致")
    for index, gain in enumerate(gains_db):
        if not math.isfinite(gain):
            raise DataError(f"第{index}个增益不是有限值: {gain}", index=index)

    scaled = SourceStack(tuple(source.scaled(10.0 ** (gain / 20.0))
                               for source, gain in zip(sources, gains_db)))
    return MixExample(id=example_id, mixture=mix(scaled), references=scaled,
                      num_sources=scaled.num_sources, provenance=provenance, seed=seed)


def add_noise(example: MixExample, snr_db: float, seed: int) -> MixExample:
    """
    在混合中加入白噪声（含噪条件）

    参考源保持为纯净语音，噪声不属于任何参考。

    Args:
        example: 原始样本
        snr_db: 混合与噪声的能量比（dB）
        seed: 噪声种子

    Returns:
        MixExample: noisy=True的新样本
    """
    if not math.isfinite(snr_db):
        raise DataError(f"信噪比必须为有限值: {snr_db}")
    rng = np.random.default_rng(derive_seed(seed, example.id, "noise"))
    noise = rng.standard_normal(len(example.mixture))
    scale = math.sqrt(energy(example.mixture) / (float(np.dot(noise, noise)) * 10.0 ** (snr_db / 10.0)))
    noisy = Waveform(example.mixture.samples + scale * noise, example.mixture.sample_rate)
    return MixExample(id=example.id, mixture=noisy, references=example.references,
                      num_sources=example.num_sources, provenance=example.provenance,
                      seed=example.seed, noisy=True)


def draw_synthesis_spec(index_seed: int, duration_s: float, sample_rate: int,
                        gain_range_db: Tuple[float, float], num_sources: int = 2) -> dict:
    """
    为一条合成记录抽取合成参数（各源类别互不相同）

    Returns:
        dict: {"sources": [...], "gains_db": [...], "sample_rate": ...}
    """
    rng = np.random.default_rng(index_seed)
    families = rng.choice(len(FAMILIES), size=num_sources, replace=False)
    sources = [{"family": FAMILIES[int(f)], "seed": int(rng.integers(0, 2 ** 31 - 1)),
                "duration_s": float(duration_s)} for f in families]
    gains = [float(g) for g in rng.uniform(gain_range_db[0], gain_range_db[1], size=num_sources)]
    return {"sources": sources, "gains_db": gains, "sample_rate": int(sample_rate)}


def synthesize(spec: dict, example_id: str = "") -> MixExample:
    """按合成参数生成混合样本"""
    try:
        sample_rate = int(spec.get("sample_rate", DEFAULT_SAMPLE_RATE))
        sources = SourceStack(tuple(
            gen_synthetic_source(item["family"], float(item["duration_s"]), int(item["seed"]), sample_rate)
            for item in spec["sources"]))
        gains = [float(g) for g in spec["gains_db"]]
    except (KeyError, TypeError) as e:
        raise DataError(f"样本{example_id}的合成参数无效: {str(e)}") from e
    return make_mixture(sources, gains, example_id, SYNTHETIC,
                        seed=int(spec["sources"][0]["seed"]))
