"""
omegasieve/selftest.py
The `selftest` and `lemmas` commands: module invariants checked end to end,
and the three counting lemmas evaluated against their main terms.
"""

import math
from dataclasses import dataclass

import numpy as np

from omegasieve import constants as const
from omegasieve import distribution as dist
from omegasieve.errors import OmegaSieveError
from omegasieve.primes import mertens_check, primes_up_to, sieve_segmented, sieve_unsegmented
from omegasieve.run_log import log_event, log_failure
from omegasieve.segment_pool import DEFAULT_THREADS, run_segments
from omegasieve.signature import PACKED_MULTIPLICITIES, ClassifiedSegment, factor_signature_oracle

# ─── Config ────────────────────────────────────────────────────────────────────
ORACLE_LIMIT = 10**5
REFINEMENT_CUTOFFS = (10**4, 10**5, 10**6)
REFINEMENT_TARGETS = (
    ("B1", {}),
    ("Pk", {"k": 2}),
    ("gamma0h", {"h": 2}),
    ("Lhr", {"h": 2, "r": 3}),
    ("C1", {"h": 2}),
    ("D1", {"h": 2}),
    ("eta", {"h": 2, "k": 3}),
)

LEMMA_COLUMNS = ("lemma", "x", "h", "k", "q", "empirical", "predicted", "ratio")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def oracle_mismatches(seg: ClassifiedSegment) -> list[int]:
    """The n of a segment whose sieved summary differs from trial division."""
    bad = []
    packed_top = PACKED_MULTIPLICITIES
    for i, n in enumerate(seg.numbers.tolist()):
        sig = factor_signature_oracle(n)
        expected = [sig.counts.get(k, 0) for k in range(1, packed_top + 1)]
        if (
            int(seg.omega[i]) != sig.omega
            or int(seg.big_omega[i]) != sig.big_omega
            or int(seg.max_mult[i]) != sig.max_multiplicity
            or int(seg.min_mult[i]) != sig.min_multiplicity
            or seg.packed[:, i].tolist() != expected
        ):
            bad.append(n)
    return bad


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    (log_event if passed else log_failure)("SELFTEST_CHECK", f"name={name} passed={passed} {detail}")
    return CheckResult(name, bool(passed), detail)


def _refinement_check(name: str, params: dict) -> CheckResult:
    try:
        chain = const.refinement_chain(name, REFINEMENT_CUTOFFS, **params)
    except (OmegaSieveError, ValueError) as e:
        return _check(f"refinement-{name}", False, f"params={params} error={e}")
    brackets = [f"[{b.lo!r}, {b.hi!r}]" for b in chain]
    return _check(f"refinement-{name}", const.chain_is_nested(chain),
                  f"params={params} brackets={brackets}")


def run_selftest(limit: int = ORACLE_LIMIT, threads: int = DEFAULT_THREADS) -> list[CheckResult]:
    results = []

    table = primes_up_to(10**4)
    results.append(_check("prime-count-1e4", len(table) == 1229, f"count={len(table)}"))
    same = np.array_equal(sieve_segmented(limit, segment_bytes=1 << 12), sieve_unsegmented(limit))
    results.append(_check("segmented-sieve", same, f"limit={limit}"))

    parts = run_segments(1, limit, oracle_mismatches, primes_up_to(math.isqrt(limit)),
                         threads=threads, span=1 << 14)
    bad = [n for part in parts for n in part]
    results.append(_check("oracle-equivalence", not bad, f"limit={limit} mismatches={bad[:10]}"))

    drift = mertens_check(10**6)
    results.append(_check("mertens-1e6", abs(drift) < 0.01, f"drift={drift:.3e}"))

    for name, params in REFINEMENT_TARGETS:
        results.append(_refinement_check(name, params))

    g = const.gamma_0h(2)
    ratio = const.zeta(1.5) / const.zeta(3.0)
    gap = abs(g.mid - ratio.mid)
    results.append(_check("gamma0-zeta-identity", gap <= g.width + ratio.width + 1e-15,
                          f"gap={gap:.3e}"))
    return results


def run_lemmas(x: int, h: int = 2, k: int = 3, qs=(2, 3), threads: int = DEFAULT_THREADS) -> list[dict]:
    """One row per (lemma, q): empirical count or ratio next to its main term."""
    rows = []
    restricted = dist.count_hfree_coprime(x, h, qs, threads=threads)
    rows.append({"lemma": "hfree-coprime", "x": x, "h": h, "k": "", "q": "+".join(map(str, qs)),
                 "empirical": restricted.count, "predicted": restricted.predicted,
                 "ratio": restricted.ratio})
    for q in qs:
        r = dist.count_hfull_coprime_ratio(x, h, q)
        rows.append({"lemma": "hfull-coprime-ratio", "x": x, "h": h, "k": "", "q": q,
                     "empirical": r.ratio, "predicted": r.predicted_ratio,
                     "ratio": r.ratio / r.predicted_ratio})
    for q in qs:
        c = dist.count_hfull_kfree_coprime(x, h, k, q)
        rows.append({"lemma": "hfull-kfree-coprime", "x": x, "h": h, "k": k, "q": q,
                     "empirical": c.count, "predicted": c.predicted, "ratio": c.ratio})
    for row in rows:
        log_event("LEMMA_ROW", " ".join(f"{c}={row[c]}" for c in LEMMA_COLUMNS))
    return rows
