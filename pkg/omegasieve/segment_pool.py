"""
omegasieve/segment_pool.py
Worker threads that stream sieve segments through a per-segment function.
Results come back in range order whatever the thread count, so every merge
downstream is deterministic.
"""

import os
import queue
import threading
import time
from typing import Callable, TypeVar

from omegasieve.primes import PrimeTable
from omegasieve.run_log import log_event, log_failure
from omegasieve.signature import SEGMENT_SPAN, ClassifiedSegment, segment_bounds, sieve_segment

T = TypeVar("T")

# ─── Config ────────────────────────────────────────────────────────────────────
DEFAULT_THREADS = os.cpu_count() or 1
PROGRESS_EVERY = 64              # log a progress line every this many segments


class SegmentWorker(threading.Thread):
    """
    Pulls (index, lo, hi) jobs until the queue is empty or stop() is called.
    The first exception stops every worker of the pool and is re-raised by run_segments.
    """

    def __init__(
        self,
        jobs: "queue.Queue[tuple[int, int, int]]",
        work: Callable[[ClassifiedSegment], T],
        primes: PrimeTable,
        h: int,
        results: dict[int, T],
        stop_event: threading.Event,
        errors: list[BaseException],
        name: str,
    ):
        super().__init__(daemon=True, name=name)
        self._jobs = jobs
        self._work = work
        self._primes = primes
        self._h = h
        self._results = results
        self._stop_event = stop_event
        self._errors = errors

    def run(self):
        while not self._stop_event.is_set():
            try:
                index, lo, hi = self._jobs.get_nowait()
            except queue.Empty:
                return
            try:
                result = self._work(sieve_segment(lo, hi, self._primes, self._h))
            except BaseException as exc:       # noqa: BLE001 - handed back to the caller
                self._errors.append(exc)
                self._stop_event.set()
                return
            self._results[index] = result

    def stop(self):
        self._stop_event.set()


def run_segments(
    lo: int,
    hi: int,
    work: Callable[[ClassifiedSegment], T],
    primes: PrimeTable,
    h: int = 2,
    threads: int = DEFAULT_THREADS,
    span: int = SEGMENT_SPAN,
    breaks=(),
) -> list[T]:
    """Apply `work` to every classified segment of [lo, hi]; results in range order."""
    bounds = segment_bounds(lo, hi, span, breaks)
    jobs: "queue.Queue[tuple[int, int, int]]" = queue.Queue()
    for index, (a, b) in enumerate(bounds):
        jobs.put((index, a, b))

    results: dict[int, T] = {}
    errors: list[BaseException] = []
    stop_event = threading.Event()
    started = time.monotonic()

    if threads <= 1 or len(bounds) == 1:
        for index, (a, b) in enumerate(bounds):
            results[index] = work(sieve_segment(a, b, primes, h))
            if (index + 1) % PROGRESS_EVERY == 0:
                log_event("SIEVE_PROGRESS", f"segments={index + 1}/{len(bounds)} upto={b}")
    else:
        workers = [
            SegmentWorker(jobs, work, primes, h, results, stop_event, errors, f"SegmentWorker-{i}")
            for i in range(min(threads, len(bounds)))
        ]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
        if errors:
            log_failure("SIEVE_FAILED", f"range=[{lo},{hi}] error={errors[0]!r}")
            raise errors[0]

    log_event("SIEVE_DONE",
              f"range=[{lo},{hi}] segments={len(bounds)} threads={threads} "
              f"seconds={time.monotonic() - started:.2f}")
    return [results[i] for i in range(len(bounds))]
