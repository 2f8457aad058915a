"""
Tests for adversary classification and the regression predictors.
"""
import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.adversary import (
    AdversaryClass,
    InfoMode,
    RegressionCoeffs,
    classify,
    predict,
    predict_linear,
    predict_poly,
)
from core.errors import InvalidInputError

QUIET = RegressionCoeffs(noise_std=0.0)


def test_classify_examples():
    assert classify(5, 5, 0, 0) == AdversaryClass.NOT_ADVERSARY
    assert classify(5, 3, 2, 2) == AdversaryClass.UNINTENTIONAL
    assert classify(5, 3, 4, 2) == AdversaryClass.INTENTIONAL


def test_classify_tolerance():
    assert classify(5, 3, 2.0 + 1e-12, 2.0) == AdversaryClass.UNINTENTIONAL
    assert classify(5, 3, 2.5, 2.0, eq_tol=1.0) == AdversaryClass.UNINTENTIONAL
    with pytest.raises(InvalidInputError):
        classify(5, 3, 2, 2, eq_tol=-1.0)


def test_classify_is_total():
    rng = np.random.default_rng(9)
    for values in rng.uniform(-10, 10, size=(200, 4)):
        assert classify(*values) in set(AdversaryClass)


def test_predict_linear_examples():
    assert predict_linear(1.0, 0.0, QUIET).e_uc == pytest.approx(0.08)
    assert predict_linear(0.0, 0.0, QUIET).e_el == 100.0
    assert predict_linear(0.0, 10.0, QUIET).e_el == pytest.approx(99.7)


def test_predict_poly_examples():
    assert predict_poly(1.0, 0.0, QUIET).e_uc == pytest.approx(0.0301)
    assert predict_poly(0.0, 0.0, QUIET).e_uc == 0.0
    assert predict_poly(0.0, 10.0, QUIET).e_el == pytest.approx(99.996)


def test_energy_level_is_clamped():
    assert predict_linear(0.0, 10_000.0, QUIET).e_el == 0.0
    rng = np.random.default_rng(0)
    for _ in range(100):
        state = predict_poly(5.0, 1.0, RegressionCoeffs(noise_std=50.0), rng)
        assert 0.0 <= state.e_el <= 100.0


def test_predictors_monotone_without_noise():
    hps = np.linspace(0, 500, 26)
    for predictor in (predict_linear, predict_poly):
        uc = [predictor(h, 0.0, QUIET).e_uc for h in hps]
        el = [predictor(0.0, h, QUIET).e_el for h in hps]
        assert all(a <= b for a, b in zip(uc, uc[1:]))
        assert all(a >= b for a, b in zip(el, el[1:]))


def test_same_seed_same_sequence():
    def run(seed):
        rng = np.random.default_rng(seed)
        return [predict_linear(3.0, 40.0, RegressionCoeffs(), rng) for _ in range(5)]

    assert run(17) == run(17)
    assert run(17) != run(18)


def test_noise_requires_generator():
    with pytest.raises(InvalidInputError):
        predict_linear(1.0, 1.0, RegressionCoeffs(noise_std=1.0))
    with pytest.raises(InvalidInputError):
        RegressionCoeffs(noise_std=-0.1)
    with pytest.raises(InvalidInputError):
        predict_poly(-1.0, 0.0, QUIET)


def test_predict_dispatch():
    assert predict(InfoMode.COMPLETE, 1.0, 1.0, QUIET) is None
    assert predict(InfoMode.LINEAR, 1.0, 0.0, QUIET).e_uc == pytest.approx(0.08)
    assert predict(InfoMode.POLY, 1.0, 0.0, QUIET).e_uc == pytest.approx(0.0301)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
