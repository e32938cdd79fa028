from hypothesis import given, strategies as st

from wansync.transport import (PRIMARY, Chunk, PathQueue, SendQueues, TensorSpec, apportion,
                               assign_roots, chunk_model, pick_path, pick_queue, split_tensor)
import pytest


def test_split_tensor():
    assert split_tensor(TensorSpec("w", 2_500_000), 1_000_000) == [1_000_000, 1_000_000, 500_000]
    assert split_tensor(TensorSpec("w", 300), 1000) == [300]
    assert split_tensor(TensorSpec("w", 1000), 1000) == [1000]
    with pytest.raises(ValueError):
        TensorSpec("w", 0)


def test_apportion_examples():
    assert apportion(8, {0: 0.5, 1: 0.25, 2: 0.25}) == {0: 4, 1: 2, 2: 2}
    assert apportion(3, {0: 0.5, 1: 0.5}) == {0: 2, 1: 1}
    assert apportion(5, {7: 1.0}) == {7: 5}
    with pytest.raises(ValueError):
        apportion(3, {})


def test_assign_roots_interleaves():
    chunks = chunk_model([TensorSpec("w", 8)], 1)
    owners = [c.owner_root for c in assign_roots(chunks, {0: 0.5, 1: 0.25, 2: 0.25})]
    assert owners.count(0) == 4 and owners.count(1) == 2 and owners.count(2) == 2
    assert owners[:2] != [0, 0]


def test_pick_path_examples():
    assert pick_path(1, [], 2, 1) == PRIMARY
    assert pick_path(2, [1, 5], 2, 5) == 0
    assert pick_path(3, [5, 5], 2, 5) == PRIMARY
    assert pick_path(2, [1], 2, 5, mode="strict") == PRIMARY
    assert pick_path(3, [1], 2, 5, mode="strict") == 0


def test_pick_queue():
    q = SendQueues(PathQueue((0, 1)), [PathQueue((0, 2, 1)), PathQueue((0, 3, 1))])
    q.primary.occupancy = 2
    q.aux[0].occupancy = 1
    assert pick_queue(q, 2, 1) == 1
    assert q.queue(1) is q.aux[1] and q.queue(PRIMARY) is q.primary


@given(st.lists(st.integers(1, 5000), min_size=1, max_size=6), st.integers(1, 1500))
def test_partition(sizes, chunk):
    tensors = [TensorSpec(f"t{i}", s) for i, s in enumerate(sizes)]
    chunks = chunk_model(tensors, chunk)
    for ti, t in enumerate(tensors):
        parts = [c.size for c in chunks if c.tensor_index == ti]
        assert sum(parts) == t.size and all(0 < p <= chunk for p in parts)


@given(st.integers(0, 300),
       st.lists(st.floats(0.01, 10), min_size=1, max_size=9))
def test_apportion_properties(total, raw):
    shares = {i: x / sum(raw) for i, x in enumerate(raw)}
    counts = apportion(total, shares)
    assert sum(counts.values()) == total
    for r, c in counts.items():
        assert abs(c - shares[r] * total) < 1 + 1e-9


@given(st.integers(1, 200), st.lists(st.floats(0.01, 10), min_size=1, max_size=9))
def test_every_chunk_gets_one_root(n, raw):
    shares = {i: x / sum(raw) for i, x in enumerate(raw)}
    chunks = [Chunk(0, i, 1) for i in range(n)]
    out = assign_roots(chunks, shares)
    assert [c.key for c in out] == [c.key for c in chunks]
    counts = apportion(n, shares)
    for r in shares:
        assert sum(c.owner_root == r for c in out) == counts[r]


@given(st.integers(0, 10), st.lists(st.integers(0, 8), max_size=5), st.integers(1, 5),
       st.integers(0, 5))
def test_pick_path_rules(primary, aux, bound, cap):
    choice = pick_path(primary, aux, bound, cap)
    if primary < bound:
        assert choice == PRIMARY
    elif choice != PRIMARY:
        assert aux[choice] < cap
        assert all(a >= cap for a in aux[:choice])
    else:
        assert all(a >= cap for a in aux)
