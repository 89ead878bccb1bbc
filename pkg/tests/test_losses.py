#!/usr/bin/env python
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from src.losses import (LossSpec, loss_factory, neg_thresh_snr, neg_thresh_snr_grad, si_snr,
                        neg_si_snr_grad, si_snr_improvement, loss_matrix)
from src.losses.loss_base import THRESHOLDED_SNR, SI_SNR_NEGATIVE
from src.utils.errors import ConfigError, InvalidSignalError, ShapeMismatchError
from tests.helpers import random_stack


def numeric_grad(func, x, h=1e-6, coords=None):
    coords = range(x.size) if coords is None else coords
    grad = {}
    for i in coords:
        plus, minus = x.copy(), x.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (func(plus) - func(minus)) / (2.0 * h)
    return grad


def test_perfect_reconstruction_hits_threshold(rng):
    y = rng.standard_normal(256)
    assert abs(neg_thresh_snr(y, y, LossSpec(snr_max_db=30.0)) - (-30.0)) <= 1e-6


def test_zero_estimate_value(rng):
    y = rng.standard_normal(256)
    expected = 10.0 * math.log10(1.001)
    assert abs(neg_thresh_snr(y, np.zeros_like(y)) - expected) <= 1e-6


def test_loss_spec_validation_and_tau():
    assert LossSpec(snr_max_db=20.0).tau == pytest.approx(0.01)
    with pytest.raises(ConfigError):
        LossSpec(kind="l1")
    with pytest.raises(ConfigError):
        LossSpec(snr_max_db=math.inf)


def test_length_mismatch():
    with pytest.raises(ShapeMismatchError):
        neg_thresh_snr(np.ones(4), np.ones(5))


def test_thresholded_snr_gradient_matches_finite_difference(rng):
    y = rng.standard_normal(64)
    yhat = y + 0.3 * rng.standard_normal(64)
    analytic = neg_thresh_snr_grad(y, yhat)
    numeric = numeric_grad(lambda e: neg_thresh_snr(y, e), yhat, coords=range(0, 64, 5))
    for i, value in numeric.items():
        assert analytic[i] == pytest.approx(value, rel=1e-4, abs=1e-6)


@pytest.mark.parametrize("zero_mean", [False, True])
def test_si_snr_gradient_matches_finite_difference(rng, zero_mean):
    y = rng.standard_normal(64) + 0.2
    yhat = 0.7 * y + 0.4 * rng.standard_normal(64)
    analytic = neg_si_snr_grad(y, yhat, zero_mean=zero_mean)
    numeric = numeric_grad(lambda e: -si_snr(y, e, zero_mean=zero_mean), yhat,
                           coords=range(0, 64, 5))
    for i, value in numeric.items():
        assert analytic[i] == pytest.approx(value, rel=1e-4, abs=1e-6)


def test_si_snr_is_scale_invariant(rng):
    y = rng.standard_normal(128)
    yhat = y + 0.5 * rng.standard_normal(128)
    assert si_snr(y, 3.0 * yhat) == pytest.approx(si_snr(y, yhat), abs=1e-8)


def test_si_snr_zero_reference_raises():
    with pytest.raises(InvalidSignalError):
        si_snr(np.zeros(8), np.ones(8))


def test_si_snr_improvement_of_mixture_is_zero(rng):
    reference = rng.standard_normal(100)
    mixture = reference + rng.standard_normal(100)
    assert si_snr_improvement(mixture, mixture, reference) == 0.0
    assert si_snr_improvement(mixture, reference, reference) > 100.0


def test_factory_registers_both_losses():
    assert set(loss_factory.get_all_losses()) == {THRESHOLDED_SNR, SI_SNR_NEGATIVE}
    loss = loss_factory.create_loss(LossSpec(kind=SI_SNR_NEGATIVE))
    y = np.array([1.0, 2.0, 3.0])
    assert loss.value(y, y) < -100.0


def test_vectorized_batch_matches_scalar_loop(rng):
    loss = loss_factory.create_loss(LossSpec())
    y = rng.standard_normal(40)
    yhats = rng.standard_normal((6, 40))
    batch = loss.batch_value(y, yhats)
    for k in range(6):
        assert batch[k] == pytest.approx(loss.value(y, yhats[k]), abs=1e-9)


def test_loss_matrix_entries(rng):
    refs = random_stack(rng, 2, 30)
    ests = random_stack(rng, 3, 30)
    matrix = loss_matrix(refs, ests)
    assert matrix.shape == (2, 3)
    assert matrix[1, 2] == neg_thresh_snr(refs[1], ests[2])


def test_si_snr_reference_values():
    assert si_snr([1.0, 0.0], [1.0, 1.0]) == pytest.approx(0.0, abs=1e-9)
    assert si_snr([1.0, 0.0], [0.0, 1.0]) < -100.0


def test_si_snr_improvement_matches_scalar_oracle():
    s1 = np.array([1.0, 0.0, 0.0, 0.0])
    s2 = np.array([0.0, 1.0, 0.0, 0.0])
    estimate = s1 + s2 / math.sqrt(2.0)
    # 估计中残留的干扰能量为0.5，混合中为1
    oracle = 10.0 * math.log10(1.0 / 0.5) - 10.0 * math.log10(1.0 / 1.0)
    value = si_snr_improvement(s1 + s2, estimate, s1)
    assert value == pytest.approx(oracle, abs=1e-9)
    assert value == pytest.approx(3.0103, abs=1e-4)


def test_thresholded_snr_of_noisy_estimate():
    y = np.array([1.0, 0.0])
    yhat = np.array([1.0, 0.1])
    expected = 10.0 * math.log10(0.01 + 0.001)
    assert neg_thresh_snr(y, yhat, LossSpec(snr_max_db=30.0)) == pytest.approx(expected, abs=1e-6)
    assert expected == pytest.approx(-19.586, abs=1e-3)


def test_thresholded_snr_never_below_floor(rng):
    spec = LossSpec(snr_max_db=30.0)
    for _ in range(200):
        y = rng.standard_normal(64)
        yhat = y + rng.standard_normal(64) * 10.0 ** rng.uniform(-8, 1)
        assert neg_thresh_snr(y, yhat, spec) >= -30.0 - 1e-9
        assert neg_thresh_snr(y, y, spec) >= -30.0 - 1e-9


def test_thresholded_snr_ignores_common_sign_flip(rng):
    for _ in range(20):
        y, yhat = rng.standard_normal(64), rng.standard_normal(64)
        assert neg_thresh_snr(-y, -yhat) == neg_thresh_snr(y, yhat)
