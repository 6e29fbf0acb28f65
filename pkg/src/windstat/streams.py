"""Reproducible counter-based random streams and worker fan-out.

Each logical stream is a Philox generator keyed by (seed, stream_id).
Philox is counter-based, so distinct keys give statistically independent
streams and a stream's draw sequence depends only on its key, never on
what other streams did. Partitioned Monte Carlo runs assign one stream
per partition and merge results in stream-id order; the merged estimate
is therefore a pure function of (seed, number of streams), independent of
worker scheduling.

The stream count defaults to a fixed constant rather than the machine
width, so default results are identical across machines too. The
environment variable WINDSTAT_THREADS caps the worker pool; it affects
scheduling only, never values.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["substream", "partition_trials", "max_workers",
           "run_partitioned", "DEFAULT_STREAMS"]

#: logical streams used when the caller does not pick a count; fixed so
#: that seed-identical runs agree across machines with different core
#: counts (the thread pool is still sized to the machine)
DEFAULT_STREAMS = 8


def substream(seed, stream_id=0):
    """A numpy Generator on the Philox stream keyed by (seed, stream_id)."""
    if seed < 0 or stream_id < 0:
        raise ValueError("seed and stream_id must be nonnegative")
    key = np.array([seed, stream_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def partition_trials(trials, streams):
    """Split a trial count into per-stream counts (sizes differ by <= 1)."""
    if streams < 1:
        raise ValueError("need at least one stream")
    base, extra = divmod(trials, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def max_workers(default=None):
    """Worker cap: WINDSTAT_THREADS if set, else cpu count (or default)."""
    env = os.environ.get("WINDSTAT_THREADS")
    if env:
        return max(1, int(env))
    if default is not None:
        return default
    return os.cpu_count() or 1


def run_partitioned(worker, trials, seed, streams=None, merge=None):
    """Run worker(rng, n_trials, stream_id) once per stream and merge.

    worker must be a pure function of its generator; results are merged in
    stream-id order with merge(acc, result) (or result.merge if omitted),
    so the outcome does not depend on how many threads actually ran.
    """
    if streams is None:
        streams = DEFAULT_STREAMS
    counts = partition_trials(trials, streams)
    jobs = [(i, substream(seed, i), n) for i, n in enumerate(counts) if n > 0]
    pool_size = min(max_workers(), len(jobs)) or 1
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        futures = [pool.submit(worker, rng, n, i) for i, rng, n in jobs]
        results = [f.result() for f in futures]
    if not results:
        raise ValueError("no trials to run")
    acc = results[0]
    for r in results[1:]:
        if merge is not None:
            acc = merge(acc, r)
        else:
            acc.merge(r)
    return acc
