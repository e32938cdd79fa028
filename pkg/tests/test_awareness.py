import pytest
from hypothesis import given, strategies as st

from wansync.awareness import (ClockModel, LinkEstimate, LinkStateStore, ProbeSample,
                               ProbeWindow, correct_clock, estimate_roundtrip,
                               estimate_throughput, ntp_offset, report, split_samples)
from wansync.overlay import graph_from_weights


def s(size, delay, t0=0.0):
    return ProbeSample(0, 1, t0, t0 + delay, size)


def test_mean_rate_examples():
    assert estimate_throughput([s(10, 2)], 0, 1).throughput == 5
    assert estimate_throughput([s(10, 2), s(20, 4)], 0, 2).throughput == 5
    est = estimate_throughput([s(10, 1), s(10, 4)], 0, 2)
    assert est.throughput == 6.25 and est.throughput != 20 / 5


def test_filtering_and_window():
    samples = [s(10, 1), s(1, 100), s(10, 2)]
    assert estimate_throughput(samples, 5, 3) is None
    est = estimate_throughput(samples, 5, 2)
    assert est.throughput == (10 + 5) / 2 and est.sample_count == 2
    # only the newest `window` samples count
    assert estimate_throughput([s(10, 10), s(10, 1)], 0, 1).throughput == 10


def test_bad_delay_is_anomaly():
    kept, bad = split_samples([s(10, 0), s(10, -1), s(10, 2)], 0)
    assert len(kept) == 1 and bad == 2


def test_clock_correction():
    c = ClockModel({0: 0.0, 1: 0.5})
    assert correct_clock(3.0, 0, c) == 3.0
    raw = ProbeSample(0, 1, 10.0, 12.5, 1)
    assert correct_clock(raw.recv_ts, 1, c) - correct_clock(raw.send_ts, 0, c) == 2.0
    same = ClockModel({0: 0.3, 1: 0.3})
    assert correct_clock(12.0, 1, same) - correct_clock(10.0, 0, same) == pytest.approx(2.0)
    with pytest.raises(KeyError):
        correct_clock(1.0, 7, c)
    with pytest.raises(ValueError):
        ClockModel({0: 0.1}, reference=0)
    assert correct_clock(10.0, 1, ClockModel({1: 0.0}, {1: 0.01})) == pytest.approx(9.9)


def test_ntp_offset_symmetric_delay():
    # node clock is 0.7 ahead; one-way delay 0.2 each direction
    t1 = 5.0 + 0.7
    t2 = 5.2
    t3 = 5.3
    t4 = 5.5 + 0.7
    assert ntp_offset(t1, t2, t3, t4) == pytest.approx(0.7)


def test_roundtrip_examples():
    # data takes t_true each way, the ack adds t_prop of pure propagation
    assert estimate_roundtrip(10, 0, 2 * 2 + 1) == 4
    assert estimate_roundtrip(10, 0, 4) == 10 / 2
    taus = [estimate_roundtrip(10, 0, 4 + p) for p in (0.0, 0.5, 1.0, 2.0)]
    assert taus == sorted(taus, reverse=True) and len(set(taus)) == 4
    with pytest.raises(ValueError):
        estimate_roundtrip(10, 3, 3)


def test_probe_window_publishes_when_full():
    w = ProbeWindow(0, 1, min_size=5, window=2)
    assert w.add(s(10, 2)) is None
    assert w.add(s(1, 2)) is None and w.filtered == 1
    est = w.add(s(10, 1, 3.0))
    assert est.throughput == 7.5 and est.updated_at == 4.0
    assert w.add(s(10, 0)) is None and w.anomalies == 1


def test_store_merge():
    store = LinkStateStore()
    assert store.merge(report(3, [])) == 0
    store.merge(report(1, [LinkEstimate(0, 1, 5.0, 4, 10.0)]))
    store.merge(report(1, [LinkEstimate(0, 1, 9.0, 4, 8.0)]))
    assert store.rate(0, 1) == 5.0
    store.merge(report(1, [LinkEstimate(0, 1, 7.0, 4, 12.0)]))
    assert store.rate(0, 1) == 7.0
    g = graph_from_weights(3, [(0, 1, 1), (1, 2, 1)])
    rates = store.planning_rates(g, lambda e: 1.5)
    assert rates == {(0, 1): 7.0, (1, 2): 1.5}
    store.merge(report(2, [LinkEstimate(2, 1, 3.0, 4, 1.0), LinkEstimate(1, 2, 4.0, 4, 1.0)]))
    assert store.planning_rates(g, lambda e: 1.5)[1, 2] == 3.0


@given(st.floats(1, 1e6), st.floats(1e-3, 100), st.floats(1e-6, 100))
def test_one_way_error_below_round_trip_error(size, t_true, t_prop):
    truth = size / t_true
    one_way = size / t_true
    rt = estimate_roundtrip(size, 0.0, 2 * t_true + t_prop)
    assert abs(one_way - truth) < abs(rt - truth)


@given(st.lists(st.tuples(st.floats(1, 1e4), st.floats(1e-3, 10)), min_size=1, max_size=12),
       st.floats(1, 5000), st.integers(1, 5))
def test_no_small_sample_contributes(pairs, min_size, window):
    samples = [s(size, delay, i) for i, (size, delay) in enumerate(pairs)]
    est = estimate_throughput(samples, min_size, window)
    big = [x for x in samples if x.size >= min_size]
    if len(big) < window:
        assert est is None
    else:
        expected = sum(x.size / x.delay for x in big[-window:]) / window
        assert est.throughput == pytest.approx(expected)


@given(st.floats(-5, 5), st.floats(0.01, 10), st.floats(0, 100))
def test_common_mode_offset_cancels(offset, delay, t0):
    c = ClockModel({0: offset, 1: offset})
    d = correct_clock(t0 + delay + offset, 1, c) - correct_clock(t0 + offset, 0, c)
    assert d == pytest.approx(delay, abs=1e-9)
