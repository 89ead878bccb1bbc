#!/usr/bin/env python
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from src.audio.waveform import SourceStack, mix, energy
from src.audio.wav_io import write_wav
from src.datagen import (FAMILIES, LOW_BAND, HIGH_BAND, NOISE_BAND, MixExample, MoMExample,
                         ManifestRecord, DatasetManifest, TWO_SRC, ONE_OR_TWO_SRC,
                         gen_synthetic_source, make_mixture, add_noise, simulate_corpus,
                         read_manifest, write_manifest, export_wavs, build_unsupervised_set,
                         dynamic_remix, supervised_subset, round_half_up)
from src.utils.errors import ConfigError, DataError


def band_fraction(w, low_hz, high_hz):
    spectrum = np.abs(np.fft.rfft(w.samples)) ** 2
    freqs = np.fft.rfftfreq(len(w), d=1.0 / w.sample_rate)
    inside = spectrum[(freqs >= low_hz) & (freqs <= high_hz)].sum()
    return inside / spectrum.sum()


def member_ids(moms):
    ids = []
    for mom in moms:
        for part in mom.id.split("+"):
            ids.append(part.split("#")[0])
    return ids


def test_synthetic_source_is_deterministic_and_normalized():
    first = gen_synthetic_source(LOW_BAND, 4.0, seed=11)
    assert len(first) == 32000
    assert np.array_equal(first.samples, gen_synthetic_source(LOW_BAND, 4.0, seed=11).samples)
    assert not np.array_equal(first.samples, gen_synthetic_source(LOW_BAND, 4.0, seed=12).samples)
    for family in FAMILIES:
        w = gen_synthetic_source(family, 0.5, seed=3)
        assert math.sqrt(energy(w) / len(w)) == pytest.approx(0.1, rel=1e-12)


def test_synthetic_source_errors():
    with pytest.raises(DataError):
        gen_synthetic_source("whistle", 1.0, seed=0)
    with pytest.raises(DataError):
        gen_synthetic_source(LOW_BAND, 0.0, seed=0)


def test_families_occupy_disjoint_bands():
    low = gen_synthetic_source(LOW_BAND, 1.0, seed=5)
    high = gen_synthetic_source(HIGH_BAND, 1.0, seed=5)
    noise = gen_synthetic_source(NOISE_BAND, 1.0, seed=5)
    assert band_fraction(low, 875.0, 4000.0) <= 0.05
    assert band_fraction(high, 0.0, 875.0) <= 0.05
    assert band_fraction(high, 1950.0, 4000.0) <= 0.05
    assert band_fraction(noise, 0.0, 1950.0) <= 0.05


def test_make_mixture_gains():
    a = gen_synthetic_source(LOW_BAND, 0.1, seed=1)
    b = gen_synthetic_source(HIGH_BAND, 0.1, seed=2)
    plain = make_mixture(SourceStack((a, b)), [0.0, 0.0])
    assert np.array_equal(plain.mixture.samples, mix([a, b]).samples)

    scaled = make_mixture(SourceStack((a, b)), [0.0, -6.02])
    assert np.allclose(scaled.references[1].samples, 0.5 * b.samples, rtol=1e-3)
    assert np.max(np.abs(mix(scaled.references).samples - scaled.mixture.samples)) <= 1e-9

    with pytest.raises(DataError):
        make_mixture(SourceStack((a, b)), [0.0, -math.inf])
    with pytest.raises(DataError):
        make_mixture(SourceStack((a, b)), [0.0])
    with pytest.raises(DataError):
        make_mixture(SourceStack((a, b, a)), [0.0, 0.0, 0.0])


def test_add_noise_keeps_speech_references():
    a = gen_synthetic_source(LOW_BAND, 0.2, seed=1)
    b = gen_synthetic_source(NOISE_BAND, 0.2, seed=2)
    clean = make_mixture(SourceStack((a, b)), [0.0, 0.0], "x")
    noisy = add_noise(clean, 10.0, seed=4)
    assert noisy.noisy
    assert noisy.references is clean.references
    noise = noisy.mixture.samples - clean.mixture.samples
    measured = 10.0 * math.log10(energy(clean.mixture) / float(np.dot(noise, noise)))
    assert measured == pytest.approx(10.0, abs=1e-9)


def test_mix_example_rejects_inconsistent_references():
    a = gen_synthetic_source(LOW_BAND, 0.1, seed=1)
    b = gen_synthetic_source(HIGH_BAND, 0.1, seed=2)
    with pytest.raises(DataError):
        MixExample(id="bad", mixture=a, references=SourceStack((a, b)), num_sources=2)
    with pytest.raises(DataError):
        MixExample(id="bad", mixture=a, num_sources=3)


def test_mom_example_enforces_sum():
    a = gen_synthetic_source(LOW_BAND, 0.1, seed=1)
    b = gen_synthetic_source(HIGH_BAND, 0.1, seed=2)
    mom = MoMExample.build("m", a, b, 2, 2)
    assert np.max(np.abs(mom.xbar.samples - (a.samples + b.samples))) <= 1e-12
    with pytest.raises(DataError):
        MoMExample("m", a, b, a, 2, 2)


def test_simulate_corpus_is_deterministic():
    first = simulate_corpus(num_train=6, num_test=3, duration_s=0.05, seed=9)
    second = simulate_corpus(num_train=6, num_test=3, duration_s=0.05, seed=9)
    assert [r.to_dict() for r in first.records] == [r.to_dict() for r in second.records]
    assert len(first.split("train")) == 6
    assert len(first.split("test")) == 3
    for record in first.records:
        families = [source["family"] for source in record.synth["sources"]]
        assert len(set(families)) == 2
        example = first.load_example(record)
        assert len(example.mixture) == 400
        assert example.references.num_sources == 2


def test_manifest_round_trip(tmp_path, tiny_manifest):
    path = str(tmp_path / "manifest.jsonl")
    write_manifest(path, tiny_manifest)
    loaded = read_manifest(path)
    assert [r.to_dict() for r in loaded.records] == [r.to_dict() for r in tiny_manifest.records]
    original = tiny_manifest.load_example(tiny_manifest.records[0])
    again = loaded.load_example(loaded.records[0])
    assert np.array_equal(original.mixture.samples, again.mixture.samples)


def test_noisy_corpus_survives_manifest_round_trip(tmp_path):
    noisy = simulate_corpus(num_train=2, num_test=1, duration_s=0.05, seed=3, noise_snr_db=5.0)
    path = str(tmp_path / "noisy.jsonl")
    write_manifest(path, noisy)
    loaded = read_manifest(path)
    assert [r.noise_snr_db for r in loaded.records] == [5.0, 5.0, 5.0]
    first, again = noisy.load_examples("train")[0], loaded.load_examples("train")[0]
    assert again.noisy
    assert np.array_equal(first.mixture.samples, again.mixture.samples)
    with pytest.raises(DataError):
        simulate_corpus(num_train=1, num_test=0, duration_s=0.05, noise_snr_db=float("nan"))


def test_manifest_rejects_duplicate_ids(tiny_manifest):
    with pytest.raises(DataError):
        DatasetManifest(tiny_manifest.records + tiny_manifest.records[:1])


def test_wav_backed_records_rebuild_mixture(tmp_path, tiny_manifest):
    exported = export_wavs(tiny_manifest, str(tmp_path))
    records = [ManifestRecord(id=r.id, num_sources=r.num_sources, split=r.split, path=r.path,
                              reference_paths=r.reference_paths) for r in exported.records]
    corpus = DatasetManifest(records, str(tmp_path))
    example = corpus.load_example(records[0])
    original = tiny_manifest.load_example(tiny_manifest.records[0])
    assert example.provenance == "corpus"
    assert np.array_equal(example.mixture.samples, mix(example.references).samples)
    unclipped = np.all(np.abs(original.references.as_array()) < 0.999, axis=0)
    deviation = np.abs(example.mixture.samples - original.mixture.samples)[unclipped]
    assert np.max(deviation) <= 2.0 / 32768


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(2.5) == 3
    assert round_half_up(0.1 * 50) == 5
    assert round_half_up(0.4) == 0


def test_two_src_pairs_everything():
    manifest = simulate_corpus(num_train=100, num_test=0, duration_s=0.01, seed=1)
    moms = build_unsupervised_set(manifest, TWO_SRC, seed=3)
    assert len(moms) == 50
    assert all(mom.total_sources == 4 for mom in moms)
    assert sorted(member_ids(moms)) == sorted(manifest.ids)
    for mom in moms:
        assert np.max(np.abs(mom.xbar.samples - (mom.x1.samples + mom.x2.samples))) <= 1e-12


def test_one_or_two_src_fraction_is_exact():
    manifest = simulate_corpus(num_train=100, num_test=0, duration_s=0.01, seed=1)
    moms = build_unsupervised_set(manifest, ONE_OR_TWO_SRC, single_fraction=0.10, seed=3)
    single = [mom for mom in moms if mom.total_sources == 3]
    assert len(moms) == 50
    assert len(single) == 5
    assert all(mom.sources_in_x2 == 1 and mom.sources_in_x1 == 2 for mom in single)
    assert {mom.total_sources for mom in moms} == {3, 4}


def test_pairing_is_deterministic_per_seed():
    manifest = simulate_corpus(num_train=10, num_test=0, duration_s=0.01, seed=1)
    first = [mom.id for mom in build_unsupervised_set(manifest, TWO_SRC, seed=8)]
    assert first == [mom.id for mom in build_unsupervised_set(manifest, TWO_SRC, seed=8)]


def test_odd_count_drops_one_mixture():
    manifest = simulate_corpus(num_train=5, num_test=0, duration_s=0.01, seed=1)
    moms = build_unsupervised_set(manifest, TWO_SRC, seed=0)
    assert len(moms) == 2
    assert len(set(member_ids(moms))) == 4


def test_invalid_strategy_and_fraction(tiny_manifest):
    with pytest.raises(ConfigError):
        build_unsupervised_set(tiny_manifest, "three_src")
    with pytest.raises(ConfigError):
        build_unsupervised_set(tiny_manifest, ONE_OR_TWO_SRC, single_fraction=1.5)
    too_small = simulate_corpus(num_train=1, num_test=0, duration_s=0.01, seed=1)
    with pytest.raises(DataError):
        build_unsupervised_set(too_small, TWO_SRC)


def test_dynamic_remix_changes_pairing_per_epoch():
    manifest = simulate_corpus(num_train=8, num_test=0, duration_s=0.01, seed=1)
    epoch0 = [mom.id for mom in dynamic_remix(manifest, 0, base_seed=42)]
    epoch1 = [mom.id for mom in dynamic_remix(manifest, 1, base_seed=42)]
    assert epoch0 != epoch1
    assert epoch0 == [mom.id for mom in dynamic_remix(manifest, 0, base_seed=42)]
    for epoch in range(3):
        moms = dynamic_remix(manifest, epoch, base_seed=42)
        assert sorted(member_ids(moms)) == sorted(manifest.ids)


def test_supervised_subset_takes_first_records():
    manifest = simulate_corpus(num_train=20, num_test=2, duration_s=0.01, seed=1)
    subset = supervised_subset(manifest, 0.10)
    assert [example.id for example in subset] == ["train_00000", "train_00001"]
    assert len(supervised_subset(manifest, 1.0)) == 20
    assert supervised_subset(manifest, 0.0) == []
    with pytest.raises(ConfigError):
        supervised_subset(manifest, 1.5)


def test_supervised_subset_requires_references(tmp_path, rng):
    from src.audio.waveform import Waveform
    write_wav(str(tmp_path / "m.wav"), Waveform(0.1 * rng.standard_normal(80)))
    manifest = DatasetManifest([ManifestRecord(id="m", num_sources=2, path="m.wav")], str(tmp_path))
    with pytest.raises(DataError):
        supervised_subset(manifest, 1.0)
