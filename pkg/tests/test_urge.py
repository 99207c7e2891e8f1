"""Health score: weight rule, logistic factors, monotonicity, bounds."""

import itertools
import math

import numpy as np
import pytest

from oclbudget import (
    InvalidPreferenceError,
    MetricSnapshot,
    NumericDomainError,
    Thresholds,
    UrgeScore,
    Weights,
    compute_urge,
    weights_from_preference,
)
from oclbudget.urge import METRIC_NAMES

TH = Thresholds(plasticity=0.8, stability=0.9, latency_s=100.0, memory_mb=4000.0)
W = weights_from_preference(["memory", "plasticity", "stability", "latency"])


def snap(p=0.8, s=0.9, lat=100.0, mem=4000.0, th=TH):
    return MetricSnapshot(p, s, lat, mem, th)


class TestWeightRule:
    def test_documented_example(self):
        w = weights_from_preference(["memory", "plasticity", "stability", "latency"])
        assert (w.k_m, w.k_p, w.k_s, w.k_l) == (0.4, 0.3, 0.2, 0.1)

    def test_same_rule_other_ordering(self):
        w = weights_from_preference(["latency", "stability", "plasticity", "memory"])
        assert (w.k_l, w.k_s, w.k_p, w.k_m) == (0.4, 0.3, 0.2, 0.1)

    def test_duplicate_rejected(self):
        with pytest.raises(InvalidPreferenceError):
            weights_from_preference(["plasticity", "plasticity", "stability", "latency"])

    def test_missing_metric_rejected(self):
        with pytest.raises(InvalidPreferenceError):
            weights_from_preference(["plasticity", "stability", "latency"])

    def test_all_permutations_normalized(self):
        for order in itertools.permutations(METRIC_NAMES):
            w = weights_from_preference(order)
            assert abs(w.total() - 1.0) <= 1e-9
            w.validate_normalized()
            assert sorted(w.as_dict().values()) == [0.1, 0.2, 0.3, 0.4]

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            Weights(-0.1, 0.5, 0.3, 0.3)


class TestScoreValues:
    def test_all_deviations_zero_gives_sixteenth(self):
        score = compute_urge(snap(), W)
        assert score.value == pytest.approx(0.0625, abs=1e-12)
        for f in score.components():
            assert f == 0.5

    def test_weightless_score_is_exactly_sixteenth(self):
        zero = Weights(0.0, 0.0, 0.0, 0.0)
        rng = np.random.default_rng(3)
        for _ in range(100):
            s = snap(
                p=float(rng.uniform(0, 1)),
                s=float(rng.uniform(0, 1)),
                lat=float(rng.uniform(0, 500)),
                mem=float(rng.uniform(0, 8000)),
            )
            assert compute_urge(s, zero).value == 0.0625

    def test_value_is_product_of_components(self):
        score = compute_urge(snap(p=0.3, s=0.95, lat=220.0, mem=3500.0), W)
        assert score.value == pytest.approx(math.prod(score.components()), abs=1e-15)

    def test_raw_deviation_mode_matches_direct_formula(self):
        # normalize off: the raw differences go straight into the logistics.
        s = snap(p=0.7, s=0.95, lat=140.0, mem=3900.0)
        score = compute_urge(s, W, normalize_deviations=False)
        f_p = 1.0 / (1.0 + math.exp(W.k_p * (0.7 - 0.8)))
        f_s = 1.0 / (1.0 + math.exp(W.k_s * (0.95 - 0.9)))
        f_l = 1.0 / (1.0 + math.exp(-W.k_l * (140.0 - 100.0)))
        f_m = 1.0 / (1.0 + math.exp(W.k_m * (3900.0 - 4000.0)))
        assert score.value == pytest.approx(f_p * f_s * f_l * f_m, rel=1e-12)

    def test_nonfinite_inputs_rejected(self):
        bad = MetricSnapshot(0.5, 0.5, float("inf"), 100.0, TH)
        with pytest.raises(NumericDomainError):
            compute_urge(bad, W)

    def test_score_invariant_validation(self):
        with pytest.raises(ValueError):
            UrgeScore(0.9, 0.5, 0.5, 0.5, 0.5)  # product mismatch
        with pytest.raises(ValueError):
            UrgeScore(0.0, 0.0, 0.5, 0.5, 0.5)  # factor at the boundary


class TestScoreBoundsAndMonotonicity:
    def test_strictly_inside_unit_interval_for_extreme_inputs(self):
        extreme = [
            snap(p=0.0, s=0.0, lat=1e9, mem=0.0),
            snap(p=1.0, s=1.0, lat=0.0, mem=1e9),
            snap(lat=1e12),
            snap(mem=1e12),
        ]
        for s in extreme:
            score = compute_urge(s, W)
            assert 0.0 < score.value < 1.0
            for f in score.components():
                assert 0.0 < f < 1.0

    def test_monotone_in_each_metric(self):
        rng = np.random.default_rng(99)
        for _ in range(500):
            p = float(rng.uniform(0.05, 0.95))
            s = float(rng.uniform(0.05, 0.95))
            lat = float(rng.uniform(1.0, 400.0))
            mem = float(rng.uniform(100.0, 7000.0))
            base = compute_urge(snap(p, s, lat, mem), W).value
            # Higher plasticity, stability, memory lower the score; higher
            # latency raises it.
            assert compute_urge(snap(p + 0.02, s, lat, mem), W).value < base
            assert compute_urge(snap(p, min(1.0, s + 0.02), lat, mem), W).value < base
            assert compute_urge(snap(p, s, lat + 5.0, mem), W).value > base
            assert compute_urge(snap(p, s, lat, mem + 50.0), W).value < base

    def test_weight_scaling_changes_steepness_not_direction(self):
        # Scaling one sensitivity never flips the sign of the response.
        small = Weights(k_p=0.1, k_s=0.2, k_l=0.3, k_m=0.4)
        big = Weights(k_p=0.8, k_s=0.2, k_l=0.3, k_m=0.4)
        lo, hi = snap(p=0.6), snap(p=0.7)
        d_small = compute_urge(hi, small).value - compute_urge(lo, small).value
        d_big = compute_urge(hi, big).value - compute_urge(lo, big).value
        assert d_small < 0 and d_big < 0
        assert abs(d_big) > abs(d_small)
        # Only the plasticity factor moved.
        a, b = compute_urge(lo, small), compute_urge(lo, big)
        assert a.stability_factor == b.stability_factor
        assert a.latency_factor == b.latency_factor
        assert a.memory_factor == b.memory_factor
