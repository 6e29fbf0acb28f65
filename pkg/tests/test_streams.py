import numpy as np
import pytest

from windstat import streams
from windstat.stats import EstimatorAccumulator


def test_substream_is_deterministic():
    a = streams.substream(42, 3).standard_normal(8)
    b = streams.substream(42, 3).standard_normal(8)
    np.testing.assert_array_equal(a, b)


def test_substreams_differ_by_id_and_seed():
    base = streams.substream(42, 0).standard_normal(8)
    other_id = streams.substream(42, 1).standard_normal(8)
    other_seed = streams.substream(43, 0).standard_normal(8)
    assert not np.array_equal(base, other_id)
    assert not np.array_equal(base, other_seed)


def test_substream_rejects_negative_keys():
    with pytest.raises(ValueError):
        streams.substream(-1, 0)
    with pytest.raises(ValueError):
        streams.substream(0, -2)


def test_partition_trials():
    assert streams.partition_trials(10, 3) == [4, 3, 3]
    assert streams.partition_trials(2, 5) == [1, 1, 0, 0, 0]
    assert sum(streams.partition_trials(1_000_003, 7)) == 1_000_003
    with pytest.raises(ValueError):
        streams.partition_trials(5, 0)


def test_max_workers_env_cap(monkeypatch):
    monkeypatch.setenv("WINDSTAT_THREADS", "2")
    assert streams.max_workers() == 2
    monkeypatch.delenv("WINDSTAT_THREADS")
    assert streams.max_workers(default=5) == 5


def _mean_worker(rng, n, stream_id):
    acc = EstimatorAccumulator()
    acc.add_batch(rng.standard_normal(n))
    return acc


def test_run_partitioned_reproducible(monkeypatch):
    first = streams.run_partitioned(_mean_worker, 5000, seed=7, streams=4)
    second = streams.run_partitioned(_mean_worker, 5000, seed=7, streams=4)
    assert first.count == second.count == 5000
    assert first.mean == second.mean
    assert first.variance() == second.variance()


def test_run_partitioned_independent_of_thread_count(monkeypatch):
    monkeypatch.setenv("WINDSTAT_THREADS", "1")
    serial = streams.run_partitioned(_mean_worker, 3000, seed=1, streams=6)
    monkeypatch.setenv("WINDSTAT_THREADS", "3")
    threaded = streams.run_partitioned(_mean_worker, 3000, seed=1, streams=6)
    assert serial.mean == threaded.mean
    assert serial.variance() == threaded.variance()


def test_run_partitioned_custom_merge_in_stream_order():
    order = streams.run_partitioned(
        lambda rng, n, i: [i], 10, seed=0, streams=5,
        merge=lambda a, b: a + b)
    assert order == [0, 1, 2, 3, 4]


def test_default_stream_count_is_fixed_not_machine_width(monkeypatch):
    monkeypatch.setenv("WINDSTAT_THREADS", "3")
    implicit = streams.run_partitioned(_mean_worker, 4000, seed=9)
    monkeypatch.setenv("WINDSTAT_THREADS", "1")
    explicit = streams.run_partitioned(_mean_worker, 4000, seed=9,
                                       streams=streams.DEFAULT_STREAMS)
    assert implicit.mean == explicit.mean
    assert implicit.variance() == explicit.variance()
