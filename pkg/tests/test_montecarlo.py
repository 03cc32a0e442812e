import math

import numpy as np
import pytest

from conftest import disk_set, interval_set
from sosvol import montecarlo
from sosvol.poly import Polynomial
from sosvol.semialg import Ball, Box, SemialgebraicSet


def test_box_sample_mean_clt():
    pts = montecarlo.sample(Box([1.0]), 100_000, seed=1)
    assert pts.shape == (100_000, 1)
    assert abs(pts.mean()) <= 4 / math.sqrt(100_000)
    assert pts.min() >= -1 and pts.max() <= 1


def test_ball_sample_radius_fraction():
    pts = montecarlo.sample(Ball(2), 100_000, seed=2)
    inside = np.mean(np.sum(pts**2, axis=1) <= 0.25)
    se = math.sqrt(0.25 * 0.75 / 100_000)
    assert abs(inside - 0.25) <= 4 * se
    assert np.all(np.sum(pts**2, axis=1) <= 1.0)


def test_ball_sample_radius_distribution():
    # P(|x| <= s) = s^n for the uniform law on B_n
    pts = montecarlo.sample(Ball(3, 0.8), 200_000, seed=3)
    r = np.linalg.norm(pts, axis=1) / 0.8
    for s in (0.3, 0.6, 0.9):
        assert abs(np.mean(r <= s) - s**3) <= 4 * math.sqrt(s**3 * (1 - s**3) / len(r))


def test_same_seed_identical_output():
    a = montecarlo.sample(Ball(2), 70_000, seed=9)
    b = montecarlo.sample(Ball(2), 70_000, seed=9)
    assert np.array_equal(a, b)
    c = montecarlo.sample(Ball(2), 70_000, seed=10)
    assert not np.array_equal(a, c)


def test_streams_are_independent_of_count():
    # a fixed partition into chunks: the first chunk does not depend on the total
    a = montecarlo.sample(Box([0.5, 0.5]), montecarlo.CHUNK, seed=4)
    b = montecarlo.sample(Box([0.5, 0.5]), 3 * montecarlo.CHUNK + 17, seed=4)
    assert np.array_equal(a, b[: montecarlo.CHUNK])


def test_purposes_give_distinct_streams():
    a = montecarlo.sample(Box([1.0]), 1000, seed=0, purpose=0)
    b = montecarlo.sample(Box([1.0]), 1000, seed=0, purpose=1)
    assert not np.array_equal(a, b)


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        montecarlo.sample(Box([1.0]), 0, seed=0)


def test_volume_K_equals_X():
    X = Ball(2)
    est = montecarlo.volume(X.as_set, X, 10_000, seed=0)
    assert est.value == X.volume
    assert est.std_error == 0.0


def test_volume_disk():
    est = montecarlo.volume(disk_set(), Ball(2), 1_000_000, seed=0)
    assert abs(est.value - math.pi / 4) <= 4 * est.std_error
    lo, hi = est.interval(4)
    assert lo <= math.pi / 4 <= hi


def test_volume_interval():
    est = montecarlo.volume(interval_set(), Box([1.0]), 200_000, seed=0)
    assert abs(est.value - 1.0) <= 4 * est.std_error


def test_std_error_formula():
    est = montecarlo.volume(disk_set(), Ball(2), 100_000, seed=7)
    p = est.hits / est.samples
    assert est.std_error == pytest.approx(math.pi * math.sqrt(p * (1 - p) / est.samples), rel=1e-15)
    assert 0 <= est.value <= math.pi


def test_volume_deterministic():
    a = montecarlo.volume(disk_set(), Ball(2), 150_000, seed=3)
    b = montecarlo.volume(disk_set(), Ball(2), 150_000, seed=3)
    assert a == b


def test_low_discrepancy_has_no_error_model():
    est = montecarlo.volume(disk_set(), Ball(2), 1 << 14, seed=0, low_discrepancy=True)
    assert est.std_error is None and est.low_discrepancy
    assert abs(est.value - math.pi / 4) < 0.01


def _fixtures():
    """50 sets with analytic volumes: balls, boxes and slabs inside boxes or balls."""
    out = []
    for k in range(50):
        kind = k % 3
        if kind == 0:
            rho = 0.2 + 0.015 * k
            out.append((disk_set(rho), Ball(2), math.pi * rho**2))
        elif kind == 1:
            a = 0.2 + 0.012 * k
            x = Polynomial.variable(1, 0)
            K = SemialgebraicSet(1, [Polynomial.constant(1, a * a) - x * x])
            out.append((K, Box([1.0]), 2 * a))
        else:
            a, b = 0.2 + 0.006 * k, 0.3 + 0.004 * k
            x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
            K = SemialgebraicSet(2, [Polynomial.constant(2, a * a) - x * x, Polynomial.constant(2, b * b) - y * y])
            out.append((K, Box([0.7, 0.7]), 4 * a * b))
    return out


def test_coverage_over_fifty_fixtures():
    misses = 0
    for i, (K, X, vol) in enumerate(_fixtures()):
        est = montecarlo.volume(K, X, 20_000, seed=100 + i)
        misses += abs(est.value - vol) > 3 * est.std_error
    assert misses <= 2
