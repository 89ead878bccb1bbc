#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np
import pytest
import soundfile as sf

from src.audio.waveform import Waveform
from src.audio.wav_io import read_wav, write_wav
from src.utils.errors import DataError


def test_round_trip_within_one_lsb(tmp_path, rng):
    w = Waveform(rng.uniform(-0.9, 0.9, size=800), sample_rate=8000)
    path = str(tmp_path / "x.wav")
    write_wav(path, w)
    back = read_wav(path)
    assert back.sample_rate == 8000
    assert len(back) == 800
    assert np.max(np.abs(back.samples - w.samples)) <= 1.0 / 32768


def test_out_of_range_samples_are_clipped(tmp_path):
    path = str(tmp_path / "clip.wav")
    write_wav(path, Waveform(np.array([1.5, -1.5, 1.0, 0.0])))
    back = read_wav(path).samples
    assert back[0] == 32767 / 32768
    assert back[1] == -1.0
    assert back[2] == 32767 / 32768
    assert back[3] == 0.0


def test_rejects_stereo(tmp_path):
    path = str(tmp_path / "stereo.wav")
    sf.write(path, np.zeros((100, 2), dtype=np.int16), 8000, subtype='PCM_16', format='WAV')
    with pytest.raises(DataError):
        read_wav(path)


def test_rejects_float_subtype(tmp_path):
    path = str(tmp_path / "float.wav")
    sf.write(path, np.zeros(100), 8000, subtype='FLOAT', format='WAV')
    with pytest.raises(DataError):
        read_wav(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_wav(str(tmp_path / "missing.wav"))


def test_extensible_header_reports_channel_count(tmp_path):
    path = str(tmp_path / "surround.wav")
    sf.write(path, np.zeros((100, 4), dtype=np.int16), 8000, subtype='PCM_16', format='WAVEX')
    with pytest.raises(DataError, match="4 个声道"):
        read_wav(path)


def test_mono_extensible_header_is_read(tmp_path):
    path = str(tmp_path / "mono.wav")
    pcm = np.array([0, 16384, -16384, 32767], dtype=np.int16)
    sf.write(path, pcm, 8000, subtype='PCM_16', format='WAVEX')
    back = read_wav(path)
    assert np.array_equal(back.samples, pcm / 32768.0)
