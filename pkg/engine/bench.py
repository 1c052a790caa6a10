"""
Scaling benchmarks for PyQuadMat
Times one operation over a series of worker counts and reports the
efficiency factor of every count against the smallest one
"""

import csv
import logging
import operator
import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from core.errors import InvalidSpecError, ResultMismatchError
from engine.scheduler import DEFAULT_GRANULARITY, MULTIDISPATCH, TaskEngine, WorkerTopology

logger = logging.getLogger(__name__)

MIN_REPETITIONS = 3


@dataclass(frozen=True)
class BenchRecord:
    op: str
    order: int
    density: float
    domain: str
    workers: int
    seconds: float
    efficiency_pct: float


CSV_HEADER = tuple(f.name for f in fields(BenchRecord))


def efficiency_factor(t_n, n, t_k, k):
    """(t_k * k) / (t_n * n) * 100 for baseline (k, t_k); 100 means perfect scaling"""
    if min(t_n, n, t_k, k) <= 0:
        raise InvalidSpecError("times and worker counts must be positive")
    return (t_k * k) / (t_n * n) * 100


def scaling_series(op, run, worker_counts, order, density, domain, repetitions=MIN_REPETITIONS,
                   mode=MULTIDISPATCH, granularity=DEFAULT_GRANULARITY, same_result=operator.eq,
                   fault_injector=None):
    """Median wall time of ``run(engine)`` per worker count.

    Every count must reproduce the baseline output exactly; the first
    count is the baseline and gets factor 100.
    """
    counts = list(worker_counts)
    if not counts or counts != sorted(set(counts)):
        raise InvalidSpecError(f"worker counts must be distinct and ascending, got {counts}")
    if repetitions < MIN_REPETITIONS:
        raise InvalidSpecError(f"need at least {MIN_REPETITIONS} repetitions, got {repetitions}")
    records = []
    baseline_output = None
    baseline_seconds = None
    for count in counts:
        topology = WorkerTopology(count, mode, granularity)
        timings = []
        with TaskEngine(topology, fault_injector=fault_injector) as engine:
            for _ in range(repetitions):
                start = time.perf_counter()
                output = run(engine)
                timings.append(time.perf_counter() - start)
                if baseline_output is None:
                    baseline_output = output
                elif not same_result(output, baseline_output):
                    raise ResultMismatchError(f"{op} with {count} workers differs from the {counts[0]}-worker result")
        seconds = float(np.median(timings))
        if baseline_seconds is None:
            baseline_seconds = seconds
        factor = efficiency_factor(seconds, count, baseline_seconds, counts[0])
        record = BenchRecord(op, order, float(density), domain, count, seconds, factor)
        logger.info("%s order=%d workers=%d: %.4fs (%.1f%%)", op, order, count, seconds, factor)
        records.append(record)
    return records


def write_csv(records, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        op, order, density, domain, workers, seconds, factor = astuple(record)
        writer.writerow([op, order, f"{density:.6g}", domain, workers, f"{seconds:.6f}", f"{factor:.2f}"])
