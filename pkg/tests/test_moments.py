import math

import pytest

from omegasieve import constants as const
from omegasieve import moments
from omegasieve.errors import CapacityError, DomainError, UncoveredCombinationError
from omegasieve.moments import MomentAccumulator, Strategy, accumulate, accumulate_grid, predict, residual_scan
from omegasieve.signature import NumberSet, factor_signature_oracle, is_h_free


def _brute(kind, h, k, x):
    """(count, sum f, sum f^2) by trial division."""
    count = s1 = s2 = 0
    for n in range(1, x + 1):
        sig = factor_signature_oracle(n)
        if kind is NumberSet.H_FREE and not is_h_free(sig, h):
            continue
        f = sig.omega if k == 0 else sig.omega_k(k)
        count, s1, s2 = count + 1, s1 + f, s2 + f * f
    return count, s1, s2


# ─── Accumulation ──────────────────────────────────────────────────────────────

def test_squarefree_small():
    acc = accumulate(NumberSet.H_FREE, 2, 1, 20)
    assert (acc.count, acc.sum_f) == (13, 16)


def test_powerful_small():
    acc = accumulate(NumberSet.H_FULL, 2, 2, 50)
    assert (acc.count, acc.sum_f) == (10, 6)
    assert acc.sum_f2 == 1 + 1 + 1 + 4 + 1
    assert acc.sum_big == 2 * acc.sum_f


def test_powerful_strategies_agree():
    walked = accumulate(NumberSet.H_FULL, 2, 2, 5000, strategy=Strategy.ENUMERATE)
    sieved = accumulate(NumberSet.H_FULL, 2, 2, 5000, strategy=Strategy.SIEVE)
    assert walked == sieved


def test_enumerate_only_for_h_full():
    with pytest.raises(DomainError):
        accumulate(NumberSet.H_FREE, 2, 1, 100, strategy=Strategy.ENUMERATE)


def test_vanishing_statistic():
    acc = accumulate(NumberSet.H_FREE, 3, 5, 10**4)
    assert acc.sum_f == 0 and acc.sum_f2 == 0


def test_all_naturals_omega():
    acc = accumulate(NumberSet.ALL, 2, 0, 10)
    assert acc.count == 10
    assert acc.sum_f == 11
    assert acc.sum_big == 15


@pytest.mark.parametrize("kind, h, k", [
    (NumberSet.H_FREE, 2, 1),
    (NumberSet.H_FREE, 3, 2),
    (NumberSet.H_FREE, 3, 0),
    (NumberSet.ALL, 2, 3),
])
def test_matches_trial_division(kind, h, k):
    acc = accumulate(kind, h, k, 3000)
    assert (acc.count, acc.sum_f, acc.sum_f2) == _brute(kind, h, k, 3000)


def test_grid_prefixes_match_single_runs():
    grid = [1000, 2500, 7000]
    rows = accumulate_grid(NumberSet.H_FREE, 2, 1, grid, threads=3)
    for g, acc in zip(grid, rows):
        single = accumulate(NumberSet.H_FREE, 2, 1, g, threads=1)
        assert acc == single
        assert acc.x == g


def test_merge_requires_same_statistic():
    a = MomentAccumulator(NumberSet.H_FREE, 2, 1, count=3, sum_f=2, x=10)
    b = MomentAccumulator(NumberSet.H_FREE, 2, 1, count=4, sum_f=5, x=20)
    merged = a.merge(b)
    assert (merged.count, merged.sum_f, merged.x) == (7, 7, 20)
    with pytest.raises(DomainError):
        a.merge(MomentAccumulator(NumberSet.H_FULL, 2, 1))


def test_request_limits():
    with pytest.raises(CapacityError):
        accumulate(NumberSet.H_FREE, 2, 1, moments.MAX_X + 1)
    with pytest.raises(DomainError):
        accumulate(NumberSet.H_FREE, 2, 1, 100, order=3)
    with pytest.raises(DomainError):
        accumulate(NumberSet.H_FREE, 1, 1, 100)


# ─── Predictions ───────────────────────────────────────────────────────────────

def test_squarefree_first_moment_formula():
    x = 1e6
    got = predict(NumberSet.H_FREE, 2, 1, 1, x)
    expected = x / const.zeta(2).mid * (math.log(math.log(x)) + const.c1(2).mid)
    assert got.value == pytest.approx(expected, rel=1e-12)
    assert got.error_scale == pytest.approx(x / math.log(x))
    assert "C1(h=2)" in got.constants


def test_vanishing_predictions():
    assert predict(NumberSet.H_FREE, 3, 7, 1, 1e6).value == 0.0
    assert predict(NumberSet.H_FULL, 3, 2, 2, 1e6).value == 0.0


def test_powerful_k3_formula():
    x = 1e8
    got = predict(NumberSet.H_FULL, 2, 3, 1, x)
    delta = const.l_h_r(2, 3).mid - const.l_h_r(2, 4).mid
    assert got.value == pytest.approx(delta * const.gamma_0h(2).mid * 1e4, rel=1e-12)


def test_uncovered_combinations():
    with pytest.raises(UncoveredCombinationError):
        predict(NumberSet.ALL, 2, 1, 2, 1e6)
    with pytest.raises(UncoveredCombinationError):
        predict(NumberSet.H_FREE, 2, 0, 2, 1e6)
    with pytest.raises(DomainError):
        predict(NumberSet.H_FREE, 2, 1, 1, 2)


# ─── Residual scans ────────────────────────────────────────────────────────────

def test_squarefree_residuals_bounded():
    scan = residual_scan(NumberSet.H_FREE, 2, 1, 1, [10**4, 10**5, 10**6])
    assert len(scan.rows) == 3
    assert all(math.isfinite(r.normalized_residual) for r in scan.rows)
    assert scan.max_abs_normalized < 10
    assert scan.slope is not None


def test_single_point_has_no_trend():
    scan = residual_scan(NumberSet.H_FREE, 2, 1, 1, [10**4])
    assert len(scan.rows) == 1
    assert scan.slope is None


def test_vanishing_residuals_are_zero():
    scan = residual_scan(NumberSet.H_FREE, 3, 5, 1, [10**3, 10**4])
    assert all(r.residual == 0 for r in scan.rows)
    assert scan.slope is None


def test_powerful_second_moment_rows():
    scan = residual_scan(NumberSet.H_FULL, 2, 2, 2, [10**4, 10**6])
    assert [r.x for r in scan.rows] == [10**4, 10**6]
    assert all(r.empirical > 0 for r in scan.rows)
    assert "D2(h=2)" in scan.constants


def test_row_columns():
    row = residual_scan(NumberSet.H_FREE, 2, 1, 2, [10**3]).rows[0]
    assert tuple(row.to_dict()) == moments.CSV_COLUMNS
    assert row.to_dict()["set"] == "hfree"


def test_grid_validation():
    with pytest.raises(DomainError):
        residual_scan(NumberSet.H_FREE, 2, 1, 1, [10**4, 10**3])
    with pytest.raises(DomainError):
        residual_scan(NumberSet.H_FREE, 2, 1, 1, [100])
    with pytest.raises(UncoveredCombinationError):
        residual_scan(NumberSet.ALL, 2, 1, 2, [10**3])


@pytest.mark.slow
def test_squarefree_residuals_to_1e7():
    scan = residual_scan(NumberSet.H_FREE, 2, 1, 1, [10**4, 10**5, 10**6, 10**7])
    assert scan.max_abs_normalized < 10


def _row(x, normalized):
    return moments.VerificationRow(x, NumberSet.H_FULL, 2, 2, 1, 0, 0.0, normalized, 1.0, normalized)


def test_scan_summary_offset_and_inversions():
    scan = moments.ScanResult(rows=[_row(10**6, -10.82), _row(10**7, -11.71), _row(10**8, -12.29)],
                              max_abs_normalized=12.29, slope=None)
    assert scan.offset == pytest.approx(-34.82 / 3)
    assert scan.inversions == 2
    assert not scan.within_bound
    assert scan.summary()["bound"] == moments.NORMALIZED_BOUND


def test_shrinking_scan_has_no_inversions():
    scan = moments.ScanResult(rows=[_row(10**4, 3.0), _row(10**5, -2.0), _row(10**6, 1.0)],
                              max_abs_normalized=3.0, slope=None)
    assert scan.inversions == 0
    assert scan.within_bound
    assert scan.offset == pytest.approx(2 / 3)


# ─── Desk-scale behaviour ──────────────────────────────────────────────────────

@pytest.mark.slow
def test_squarefree_second_moment_drifts_toward_a_constant():
    scan = residual_scan(NumberSet.H_FREE, 2, 1, 2, [10**4, 10**5, 10**6, 10**7])
    sizes = [abs(r.normalized_residual) for r in scan.rows]
    # 5.12, 5.28, 5.41, 5.52: bounded, but creeping up instead of shrinking
    assert scan.within_bound
    assert all(5.0 < s < 5.7 for s in sizes)
    assert scan.inversions == 3


@pytest.mark.slow
def test_cubefree_omega2_moments_at_1e7():
    x = 10**7
    acc = accumulate(NumberSet.H_FREE, 3, 2, x)
    first = acc.moment(1) / predict(NumberSet.H_FREE, 3, 2, 1, x).value
    second = acc.moment(2) / predict(NumberSet.H_FREE, 3, 2, 2, x).value
    assert abs(first - 1) < 0.01
    assert abs(second - 1) < 0.03


@pytest.mark.slow
def test_powerful_count_carries_cube_root_term():
    x = 10**8
    count = accumulate(NumberSet.H_FULL, 2, 2, x).count
    assert count == 21044
    main_term = const.gamma_0h(2).mid * math.sqrt(x)
    zeta_two_thirds = -2.4475807362
    secondary = zeta_two_thirds / const.zeta(2).mid * x ** (1 / 3)
    assert count - main_term < -600
    assert abs(count - (main_term + secondary)) < 50


@pytest.mark.slow
def test_powerful_first_moment_offset_past_bound():
    scan = residual_scan(NumberSet.H_FULL, 2, 2, 1, [10**6, 10**7, 10**8])
    # -10.82, -11.71, -12.29
    assert all(-13.0 < r.normalized_residual < -10.0 for r in scan.rows)
    assert not scan.within_bound
    assert scan.inversions == 2
    assert -13.0 < scan.offset < -10.0


@pytest.mark.slow
def test_powerful_omega3_first_moment_short_of_main_term():
    x = 10**8
    ratio = accumulate(NumberSet.H_FULL, 2, 3, x).moment(1) / predict(NumberSet.H_FULL, 2, 3, 1, x).value
    assert 0.87 < ratio < 0.92


@pytest.mark.slow
def test_powerful_second_moment_within_bound_at_1e8():
    scan = residual_scan(NumberSet.H_FULL, 2, 2, 2, [10**8])
    assert scan.within_bound
