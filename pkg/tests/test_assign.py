#!/usr/bin/env python
# -*- coding: utf-8 -*-

import itertools

import numpy as np
import pytest

from src.assign import mixit
from src.assign import (MixingMatrix, enumerate_mixing_matrices, mixit_loss, oracle_remix_select,
                        remix, pit_loss, hungarian_pit_check, select_top_energy)
from src.audio.waveform import Waveform, SourceStack
from src.losses import LossSpec, neg_thresh_snr
from src.utils.errors import ConfigError, ShapeMismatchError
from tests.helpers import random_stack, random_waveform


def brute_force_mixit(x1, x2, ests, spec):
    """独立的穷举：字典序遍历，只在严格更小时更新"""
    best_total, best_assignment = None, None
    for assignment in itertools.product((0, 1), repeat=ests.num_sources):
        rows = [np.zeros(ests.length), np.zeros(ests.length)]
        for j, row in enumerate(assignment):
            rows[row] += ests[j].samples
        total = 0.0
        total += neg_thresh_snr(x1.samples, rows[0], spec)
        total += neg_thresh_snr(x2.samples, rows[1], spec)
        if best_total is None or total < best_total:
            best_total, best_assignment = total, assignment
    return best_total, best_assignment


def brute_force_pit(refs, ests, spec):
    best_total, best_perm = None, None
    for perm in itertools.permutations(range(refs.num_sources)):
        total = sum(neg_thresh_snr(refs[i].samples, ests[perm[i]].samples, spec)
                    for i in range(refs.num_sources))
        if best_total is None or total < best_total:
            best_total, best_perm = total, perm
    return best_total, best_perm


def test_enumeration_is_lexicographic():
    matrices = enumerate_mixing_matrices(3)
    assert len(matrices) == 8
    assert matrices[0].assignment == (0, 0, 0)
    assert matrices[1].assignment == (0, 0, 1)
    assert matrices[-1].assignment == (1, 1, 1)
    for matrix in matrices:
        assert np.all(matrix.as_matrix().sum(axis=0) == 1.0)


def test_remix_empty_row_is_zero(rng):
    ests = random_stack(rng, 3, 20)
    remixed = remix(ests, MixingMatrix((1, 1, 1)))
    assert np.all(remixed[0].samples == 0.0)
    assert np.allclose(remixed[1].samples, ests.as_array().sum(axis=0))


@pytest.mark.parametrize("M", [2, 3, 4, 6, 8])
def test_mixit_matches_exhaustive_oracle(rng, M):
    spec = LossSpec()
    for _ in range(10):
        x1 = random_waveform(rng, 48)
        x2 = random_waveform(rng, 48)
        ests = random_stack(rng, M, 48)
        result = mixit_loss(x1, x2, ests, spec)
        total, assignment = brute_force_mixit(x1, x2, ests, spec)
        assert result.total_loss == pytest.approx(total, rel=1e-12)
        assert result.assignment.assignment == assignment


def test_mixit_recovers_true_grouping(rng):
    a, b, c, d = (random_waveform(rng, 64) for _ in range(4))
    x1, x2 = a + b, c + d
    result = mixit_loss(x1, x2, SourceStack((a, c, b, d)))
    assert result.assignment.assignment == (0, 1, 0, 1)
    assert result.total_loss == pytest.approx(-60.0, abs=1e-6)


def test_mixit_tie_takes_lexicographically_first(rng):
    a, b = random_waveform(rng, 32), random_waveform(rng, 32)
    ests = SourceStack((a, b, Waveform.zeros(32)))
    result = mixit_loss(a, b, ests)
    assert result.assignment.assignment == (0, 1, 0)


def test_mixit_swapping_mixtures_flips_rows(rng):
    spec = LossSpec()
    for _ in range(10):
        x1, x2 = random_waveform(rng, 48), random_waveform(rng, 48)
        ests = random_stack(rng, 5, 48)
        forward_result = mixit_loss(x1, x2, ests, spec)
        swapped = mixit_loss(x2, x1, ests, spec)
        assert swapped.total_loss == pytest.approx(forward_result.total_loss, rel=1e-12)
        assert swapped.assignment == forward_result.assignment.flipped()


@pytest.mark.parametrize("length", [1, 48, 32000, 10 ** 8])
def test_chunk_fits_element_budget(length):
    step = mixit.chunk_size(length)
    assert 1 <= step <= mixit.CHUNK_SIZE
    assert step * length <= max(length, mixit.CHUNK_ELEMENTS)
    assert mixit.chunk_size(48) == mixit.CHUNK_SIZE
    assert mixit.chunk_size(10 ** 8) == 1


def test_small_chunks_give_the_same_winner(rng, monkeypatch):
    monkeypatch.setattr(mixit, "CHUNK_ELEMENTS", 48 * 3)
    assert mixit.chunk_size(48) == 3
    spec = LossSpec()
    for _ in range(5):
        x1, x2 = random_waveform(rng, 48), random_waveform(rng, 48)
        ests = random_stack(rng, 5, 48)
        result = mixit_loss(x1, x2, ests, spec)
        total, assignment = brute_force_mixit(x1, x2, ests, spec)
        assert result.total_loss == pytest.approx(total, rel=1e-12)
        assert result.assignment.assignment == assignment


def test_mixit_requires_two_estimates(rng):
    with pytest.raises(ConfigError):
        mixit_loss(random_waveform(rng, 8), random_waveform(rng, 8), random_stack(rng, 1, 8))
    with pytest.raises(ShapeMismatchError):
        mixit_loss(random_waveform(rng, 8), random_waveform(rng, 9), random_stack(rng, 2, 8))


@pytest.mark.parametrize("C", [2, 3, 4, 5, 6])
def test_pit_matches_exhaustive_and_hungarian(rng, C):
    spec = LossSpec()
    for _ in range(10):
        refs = random_stack(rng, C, 40)
        ests = random_stack(rng, C, 40)
        result = pit_loss(refs, ests, spec)
        total, perm = brute_force_pit(refs, ests, spec)
        assert result.total_loss == pytest.approx(total, rel=1e-12)
        assert result.assignment.perm == perm
        hungarian_total, hungarian_perm = hungarian_pit_check(refs, ests, spec)
        assert hungarian_total == pytest.approx(total, rel=1e-9)
        assert hungarian_perm.perm == perm
        for i in range(C):
            assert np.array_equal(result.remixed[i].samples, ests[perm[i]].samples)


def test_pit_shape_and_size_errors(rng):
    with pytest.raises(ShapeMismatchError):
        pit_loss(random_stack(rng, 2, 8), random_stack(rng, 3, 8))
    with pytest.raises(ConfigError):
        pit_loss(random_stack(rng, 9, 8), random_stack(rng, 9, 8))


def test_select_top_energy_orders_and_breaks_ties():
    ests = SourceStack.from_array(np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 2.0], [0.5, 0.5]]))
    selected, indices = select_top_energy(ests, 2)
    assert indices == (1, 2)
    assert selected.num_sources == 2
    assert select_top_energy(ests, 4)[1] == (1, 2, 0, 3)
    with pytest.raises(ConfigError):
        select_top_energy(ests, 5)


def test_oracle_remix_aligns_rows_with_references(rng):
    a, b, c = (random_waveform(rng, 32) for _ in range(3))
    refs = SourceStack((a + c, b))
    result = oracle_remix_select(refs, SourceStack((b, a, c)))
    assert result.assignment.assignment == (1, 0, 0)
    with pytest.raises(ShapeMismatchError):
        oracle_remix_select(random_stack(rng, 3, 32), random_stack(rng, 4, 32))


@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_select_top_energy_ignores_common_gain(rng, scale):
    for _ in range(10):
        ests = random_stack(rng, 4, 32)
        scaled = SourceStack.from_array(ests.as_array() * scale)
        assert select_top_energy(scaled, 2)[1] == select_top_energy(ests, 2)[1]
