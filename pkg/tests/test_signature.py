import math

import numpy as np
import pytest

from omegasieve.errors import DomainError, InsufficientPrimesError
from omegasieve.primes import primes_up_to
from omegasieve.selftest import oracle_mismatches
from omegasieve.signature import (
    FactorSignature,
    NumberSet,
    enumerate_h_full,
    factor_signature_oracle,
    integer_root,
    is_h_free,
    is_h_full,
    omega_k,
    segment_bounds,
    sieve_segment,
)


def _segment(lo, hi, h=2):
    return sieve_segment(lo, hi, primes_up_to(math.isqrt(hi)), h=h)


# ─── Oracle ────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("n, counts", [
    (1, {}),
    (12, {1: 1, 2: 1}),
    (360, {1: 1, 2: 1, 3: 1}),
    (97, {1: 1}),
    (2**10 * 3**10, {10: 2}),
])
def test_oracle_signatures(n, counts):
    assert factor_signature_oracle(n).counts == counts


def test_oracle_rejects_zero():
    with pytest.raises(DomainError):
        factor_signature_oracle(0)


def test_omega_k_lookup():
    assert omega_k(FactorSignature({1: 1, 2: 1}), 1) == 1
    assert omega_k(FactorSignature({}), 5) == 0
    assert omega_k(FactorSignature({3: 2}), 3) == 2
    with pytest.raises(DomainError):
        omega_k(FactorSignature({1: 1}), 0)


def test_signature_totals():
    sig = factor_signature_oracle(360)
    assert sig.omega == 3
    assert sig.big_omega == 6
    assert sig.max_multiplicity == 3
    assert sig.min_multiplicity == 1
    assert sig.big_omega_k(3) == 3


def test_classification():
    assert is_h_free(factor_signature_oracle(12), 3)
    assert not is_h_full(factor_signature_oracle(12), 3)
    assert not is_h_free(factor_signature_oracle(8), 2)
    assert is_h_full(factor_signature_oracle(8), 2)
    one = factor_signature_oracle(1)
    assert is_h_free(one, 5) and is_h_full(one, 5)
    with pytest.raises(DomainError):
        is_h_free(one, 1)


# ─── Segments ──────────────────────────────────────────────────────────────────

def test_segment_matches_oracle():
    assert oracle_mismatches(_segment(1, 100)) == []
    assert oracle_mismatches(_segment(1, 5000)) == []


@pytest.mark.slow
def test_far_window_matches_oracle():
    assert oracle_mismatches(_segment(10**6 + 1, 10**6 + 10**4)) == []


def test_single_number_segment():
    seg = _segment(8, 8)
    assert seg.signature(8).counts == {3: 1}
    assert seg.h_full.tolist() == [True]
    assert seg.h_free.tolist() == [False]


def test_high_multiplicities_kept():
    seg = _segment(1, 300)
    assert seg.signature(128).counts == {7: 1}
    assert seg.signature(256).counts == {8: 1}
    assert int(seg.omega_k(7)[127]) == 1
    assert int(seg.omega_k(7).sum()) == 1
    assert int(seg.omega_k(8).sum()) == 1


def test_statistic_zero_is_omega():
    seg = _segment(1, 30)
    assert np.array_equal(seg.statistic(0), seg.omega.astype(np.int64))


def test_membership_masks():
    seg = _segment(1, 10, h=3)
    free = seg.numbers[seg.membership(NumberSet.H_FREE, 3)].tolist()
    assert free == [1, 2, 3, 4, 5, 6, 7, 9, 10]
    full = seg.numbers[seg.membership(NumberSet.H_FULL, 2)].tolist()
    assert full == [1, 4, 8, 9]
    assert seg.membership(NumberSet.ALL, 2).all()


def test_select_keeps_overflow():
    seg = _segment(1, 300)
    picked = seg.select(seg.numbers >= 128)
    assert picked.signature(128).counts == {7: 1}
    assert int(picked.omega_k(7)[0]) == 1


def test_too_few_primes():
    with pytest.raises(InsufficientPrimesError):
        sieve_segment(1, 10**4, primes_up_to(50))


def test_bad_range():
    with pytest.raises(DomainError):
        sieve_segment(0, 10, primes_up_to(10))
    with pytest.raises(DomainError):
        sieve_segment(10, 9, primes_up_to(10))


def test_segment_bounds_cut_at_breaks():
    assert segment_bounds(1, 10, span=4, breaks=[5]) == [(1, 4), (5, 5), (6, 9), (10, 10)]
    assert segment_bounds(1, 3, span=100) == [(1, 3)]


# ─── h-full enumeration ────────────────────────────────────────────────────────

def test_integer_root():
    assert integer_root(10**12, 3) == 10**4
    assert integer_root(26, 3) == 2
    assert integer_root(27, 3) == 3
    assert integer_root(0, 2) == 0


def test_powerful_numbers():
    members = enumerate_h_full(50, 2)
    assert members.numbers.tolist() == [1, 4, 8, 9, 16, 25, 27, 32, 36, 49]
    assert members.omega_k(2).tolist() == [0, 1, 0, 1, 0, 1, 0, 0, 2, 1]


@pytest.mark.parametrize("h", [2, 3, 4])
def test_enumeration_matches_sieve(h):
    x = 20000
    seg = _segment(1, x, h=h)
    sieved = seg.select(seg.h_full)
    walked = enumerate_h_full(x, h)
    assert walked.numbers.tolist() == sieved.numbers.tolist()
    for k in range(1, 9):
        assert np.array_equal(walked.omega_k(k), sieved.omega_k(k))
    assert np.array_equal(walked.big_omega, sieved.big_omega)
