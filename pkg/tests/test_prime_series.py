import numpy as np
import pytest

from omegasieve.errors import DomainError
from omegasieve.prime_series import (
    evaluate,
    f1_like_series,
    integral_tail,
    partial_power_sum,
    prime_count_tail,
    prime_zeta_full,
    prime_zeta_series,
    tail_enclosures,
    zeta_minus_one,
    zeta_tail,
)
from omegasieve.primes import primes_up_to

P2 = 0.45224742004106549850
P3 = 0.17476263929944353642


def test_zeta_minus_one():
    assert zeta_minus_one(2.0).contains(np.pi ** 2 / 6 - 1)
    assert zeta_minus_one(2.0).width < 1e-14
    with pytest.raises(DomainError):
        zeta_minus_one(1.0)


def test_prime_zeta_full():
    assert abs(prime_zeta_full(2.0).mid - P2) < 1e-14
    assert abs(prime_zeta_full(3.0).mid - P3) < 1e-14
    with pytest.raises(DomainError):
        prime_zeta_full(0.5)


def test_tails_contain_each_other():
    n = 10**4
    exact = zeta_tail(2.0, n)
    assert integral_tail(2.0, n).intersects(exact)
    assert prime_count_tail(2.0, n).intersects(exact)
    assert exact.width < integral_tail(2.0, n).width


def test_prime_count_tail_needs_large_cutoff():
    assert prime_count_tail(2.0, 100) is None


def test_partial_power_sum_matches_numpy():
    primes = primes_up_to(1000).primes.astype(float)
    assert abs(partial_power_sum(2.0, 1000).mid - float(np.sum(primes ** -2.0))) < 1e-15


def test_evaluate_contains_value():
    b = evaluate(prime_zeta_series(2.0), 10**4)
    assert b.lo <= P2 <= b.hi
    assert b.width < 1e-12


def test_elementary_and_accelerated_tails_agree():
    series = f1_like_series("F8(h=2)", 2, 2)
    elementary, accelerated = tail_enclosures(series, 10**4)
    assert elementary.intersects(accelerated)
    assert accelerated.width < elementary.width
