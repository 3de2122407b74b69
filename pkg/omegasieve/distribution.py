"""
omegasieve/distribution.py
Erdos-Kac samples and Kolmogorov-Smirnov distances, zero/one density counts
behind the no-normal-order results, and the coprime counting lemmas.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import erfc

from omegasieve import constants as const
from omegasieve.errors import DomainError, EmptySampleError
from omegasieve.primes import primes_up_to
from omegasieve.run_log import log_event
from omegasieve.segment_pool import DEFAULT_THREADS, run_segments
from omegasieve.signature import (
    ClassifiedSegment,
    NumberSet,
    SignatureArrays,
    enumerate_h_full,
    factor_signature_oracle,
)

# ─── Config ────────────────────────────────────────────────────────────────────
SLACK = 0.9                      # finite-x factor on the >>-type density floors
HISTOGRAM_BINS = 50
HISTOGRAM_RANGE = (-4.0, 4.0)
N_MIN = 3                        # log log n <= 0 below this


class Statistic(str, Enum):
    OMEGA1 = "omega1"
    OMEGAH = "omegah"
    OMEGA = "omega"

    def multiplicity(self, h: int) -> int:
        """The k with omega_k = this statistic (0 for omega itself)."""
        return {Statistic.OMEGA1: 1, Statistic.OMEGAH: h, Statistic.OMEGA: 0}[self]


def phi(a: float) -> float:
    """Standard normal CDF."""
    return 0.5 * float(erfc(-a / math.sqrt(2.0)))


# ─── Empirical CDF ─────────────────────────────────────────────────────────────

@dataclass
class EmpiricalCDF:
    """
    Sorted ratios r_f(n) = (f(n) - log log n)/sqrt(log log n) over the set members
    N_MIN <= n <= x. `raw` keeps f(n) itself, in n order, for the moment checks.
    """

    samples: np.ndarray
    n_min: int = N_MIN
    raw: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.samples.size)

    def evaluate(self, a: float) -> float:
        """Fraction of samples <= a; the density D(f, S, x, a)."""
        if not len(self):
            raise EmptySampleError("empirical CDF of an empty sample")
        return int(np.searchsorted(self.samples, a, side="right")) / len(self)

    @property
    def mean(self) -> float:
        if not self.raw.size:
            raise EmptySampleError("no raw values recorded")
        return float(self.raw.mean())

    @property
    def variance(self) -> float:
        if not self.raw.size:
            raise EmptySampleError("no raw values recorded")
        return float(self.raw.var())

    def histogram(self, bins: int = HISTOGRAM_BINS, value_range=HISTOGRAM_RANGE):
        """(counts, edges); samples outside the range are not counted."""
        return np.histogram(self.samples, bins=bins, range=value_range)


def ratios(values: np.ndarray, numbers: np.ndarray) -> np.ndarray:
    ll = np.log(np.log(numbers.astype(np.float64)))
    return (values - ll) / np.sqrt(ll)


def _check_set(kind: NumberSet, h: int):
    if NumberSet(kind) is NumberSet.ALL:
        raise DomainError("expected an h-free or h-full set")
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")


def _members_and_values(kind: NumberSet, h: int, k: int, x: int, threads: int,
                        n_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(n, omega_k(n)) for the members n_min <= n <= x of the set, in n order."""
    kind = NumberSet(kind)
    if kind is NumberSet.H_FULL:
        members = enumerate_h_full(x, h)
        keep = members.numbers >= n_min
        return members.numbers[keep], members.statistic(k)[keep]

    def work(seg: ClassifiedSegment):
        mask = seg.membership(kind, h) & (seg.numbers >= n_min)
        return seg.numbers[mask], seg.statistic(k)[mask]

    parts = run_segments(1, x, work, primes_up_to(math.isqrt(x)), h=h, threads=threads)
    numbers = np.concatenate([p[0] for p in parts])
    values = np.concatenate([p[1] for p in parts])
    return numbers, values


def ekac_sample(kind: NumberSet, h: int, f: Statistic, x: int,
                threads: int = DEFAULT_THREADS) -> EmpiricalCDF:
    _check_set(kind, h)
    x = int(x)
    if x < N_MIN:
        raise DomainError(f"x must be >= {N_MIN}, got {x}")
    f = Statistic(f)
    numbers, values = _members_and_values(kind, h, f.multiplicity(h), x, threads, n_min=N_MIN)
    ecdf = EmpiricalCDF(samples=ratios(values, numbers), n_min=N_MIN, raw=values)
    log_event("EKAC_SAMPLED", f"set={NumberSet(kind).value} h={h} f={f.value} x={x} samples={len(ecdf)}")
    return ecdf


def ks_distance(ecdf: EmpiricalCDF) -> float:
    """sup_a |F(a) - Phi(a)|, taken exactly at the jumps (both one-sided gaps)."""
    n = len(ecdf)
    if not n:
        raise EmptySampleError("KS distance of an empty sample")
    values, counts = np.unique(ecdf.samples, return_counts=True)
    above = np.cumsum(counts) / n
    below = above - counts / n
    reference = 0.5 * erfc(-values / math.sqrt(2.0))
    return float(max(np.max(np.abs(above - reference)), np.max(np.abs(below - reference))))


# ─── Counting lemmas ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class LemmaCount:
    count: int
    predicted: float

    @property
    def ratio(self) -> float:
        return self.count / self.predicted if self.predicted else math.nan


@dataclass(frozen=True)
class CoprimeRatio:
    coprime: int
    total: int
    predicted_ratio: float

    @property
    def ratio(self) -> float:
        return self.coprime / self.total


def _check_primes(qs) -> list[int]:
    qs = [int(q) for q in qs]
    if len(set(qs)) != len(qs):
        raise DomainError(f"primes must be distinct, got {qs}")
    for q in qs:
        if q < 2 or factor_signature_oracle(q).counts != {1: 1}:
            raise DomainError(f"{q} is not prime")
    return qs


def _coprime(numbers: np.ndarray, qs) -> np.ndarray:
    keep = np.ones(numbers.size, dtype=bool)
    for q in qs:
        keep &= numbers % q != 0
    return keep


def _hfree_coprime(x: int, h: int, qs, threads: int) -> int:
    if x < 1:
        return 0
    parts = run_segments(
        1, x,
        lambda seg: int((seg.h_free & _coprime(seg.numbers, qs)).sum()),
        primes_up_to(math.isqrt(x)), h=h, threads=threads,
    )
    return sum(parts)


def count_hfree_coprime(x: int, h: int, q_list=(), threads: int = DEFAULT_THREADS) -> LemmaCount:
    """h-free n <= x prime to every q, against prod (q^h - q^(h-1))/(q^h - 1) * x/zeta(h)."""
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")
    x = int(x)
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    qs = _check_primes(q_list)
    factor = math.prod((q**h - q ** (h - 1)) / (q**h - 1) for q in qs)
    predicted = factor * x / const.zeta(h).mid
    return LemmaCount(_hfree_coprime(x, h, qs, threads), predicted)


def count_hfull_coprime_ratio(x: int, h: int, q: int) -> CoprimeRatio:
    """A_{q,h}(x)/A_h(x) against the leading-term ratio 1/(1 + q^-1/(1 - q^(-1/h)))."""
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")
    (q,) = _check_primes([q])
    members = enumerate_h_full(int(x), h)
    coprime = int(_coprime(members.numbers, [q]).sum())
    predicted = 1.0 / (1.0 + (1.0 / q) / (1.0 - q ** (-1.0 / h)))
    return CoprimeRatio(coprime=coprime, total=len(members), predicted_ratio=predicted)


def kfree_coefficient(h: int, k: int, q: int) -> float:
    """(1 - q^(-1/h))/(1 - q^(-1/h) + q^-1 - q^(-k/h))."""
    a = 1.0 - q ** (-1.0 / h)
    return a / (a + 1.0 / q - q ** (-k / h))


def _hfull_kfree(members: SignatureArrays, k: int) -> np.ndarray:
    return members.max_mult <= k - 1


def count_hfull_kfree_coprime(x: int, h: int, k: int, q: int) -> LemmaCount:
    """h-full, k-free n <= x prime to q, against kfree_coefficient * eta_{h,k} x^(1/h)."""
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")
    if not k > h:
        raise DomainError(f"need k > h, got h={h} k={k}")
    (q,) = _check_primes([q])
    x = int(x)
    predicted = kfree_coefficient(h, k, q) * const.eta_hk(h, k).mid * x ** (1.0 / h)
    if x < 1:
        return LemmaCount(0, predicted)
    members = enumerate_h_full(x, h)
    count = int((_hfull_kfree(members, k) & _coprime(members.numbers, [q])).sum())
    return LemmaCount(count, predicted)


# ─── No normal order ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DensityReport:
    """
    count_zero / count_one: members n <= x with omega_k(n) = 0 / = 1.
    subset_zero, subset_one: exact counts of the explicit subsets each one contains.
    lower_bound, lower_bound_one: SLACK times the guaranteed floors.
    """

    set: NumberSet
    x: int
    h: int
    k: int
    members: int
    count_zero: int
    count_one: int
    subset_zero: int
    subset_one: int
    lower_bound: float
    lower_bound_one: float

    def to_dict(self) -> dict:
        return {
            "set": self.set.value, "x": self.x, "h": self.h, "k": self.k,
            "members": self.members, "count_zero": self.count_zero, "count_one": self.count_one,
            "subset_zero": self.subset_zero, "subset_one": self.subset_one,
            "lower_bound": self.lower_bound, "lower_bound_one": self.lower_bound_one,
        }


def density_counts(kind: NumberSet, h: int, k: int, x: int,
                   threads: int = DEFAULT_THREADS) -> DensityReport:
    _check_set(kind, h)
    kind = NumberSet(kind)
    x = int(x)
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")

    if kind is NumberSet.H_FREE:
        if not 1 < k < h:
            raise DomainError(f"h-free density counts need 1 < k < h, got h={h} k={k}")

        def work(seg: ClassifiedSegment):
            member = seg.h_free
            f = seg.omega_k(k)
            return (int(member.sum()), int((member & (f == 0)).sum()),
                    int((member & (f == 1)).sum()), int(seg.h_free_mask(k).sum()))

        parts = run_segments(1, x, work, primes_up_to(math.isqrt(x)), h=h, threads=threads)
        members, zero, one, subset_zero = (sum(col) for col in zip(*parts))
        subset_one = _hfree_coprime(x >> k, k, [2], threads)
        report = DensityReport(
            set=kind, x=x, h=h, k=k, members=members, count_zero=zero, count_one=one,
            subset_zero=subset_zero, subset_one=subset_one,
            lower_bound=SLACK * x / const.zeta(k).mid,
            lower_bound_one=SLACK * (2**k - 2 ** (k - 1)) / (2**k * (2**k - 1)) * x / const.zeta(k).mid,
        )
    else:
        if not k > h:
            raise DomainError(f"h-full density counts need k > h, got h={h} k={k}")
        all_members = enumerate_h_full(x, h)
        f = all_members.omega_k(k)
        floor = kfree_coefficient(h, k, 2) * const.eta_hk(h, k).mid * x ** (1.0 / h)
        report = DensityReport(
            set=kind, x=x, h=h, k=k, members=len(all_members),
            count_zero=int((f == 0).sum()), count_one=int((f == 1).sum()),
            subset_zero=int(_hfull_kfree(all_members, k).sum()),
            subset_one=count_hfull_kfree_coprime(x >> k, h, k, 2).count,
            lower_bound=SLACK * floor,
            lower_bound_one=SLACK * floor / 2.0 ** (k / h),
        )

    log_event("DENSITY_COUNTED",
              f"set={kind.value} h={h} k={k} x={x} zero={report.count_zero} one={report.count_one} "
              f"floor={report.lower_bound:.6g}")
    return report


@dataclass(frozen=True)
class ExceptionReport:
    x: int
    eps: float
    members: int
    exceptions: int

    @property
    def fraction(self) -> float:
        return self.exceptions / self.members if self.members else 0.0


def normal_order_exceptions(kind: NumberSet, h: int, x: int, eps: float,
                            threads: int = DEFAULT_THREADS) -> ExceptionReport:
    """
    Members N_MIN <= n <= x with |f(n) - log log n| > eps log log n, where f is
    omega_1 over h-free numbers and omega_h over h-full numbers.
    """
    _check_set(kind, h)
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    x = int(x)
    if x < N_MIN:
        raise DomainError(f"x must be >= {N_MIN}, got {x}")
    k = 1 if NumberSet(kind) is NumberSet.H_FREE else h
    numbers, values = _members_and_values(kind, h, k, x, threads, n_min=N_MIN)
    ll = np.log(np.log(numbers.astype(np.float64)))
    exceptions = int((np.abs(values - ll) > eps * ll).sum())
    return ExceptionReport(x=x, eps=eps, members=int(numbers.size), exceptions=exceptions)
