import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from fpsl_lab.core import Event, InvalidInput
from fpsl_lab.decode import (DecodeParams, binarize, decode, decode_batch, median_filter,
                             segments_to_events)


def brute_median(row, size):
    half = size // 2
    padded = [0] * half + list(row) + [0] * half
    return [int(np.median(padded[t:t + size])) for t in range(len(row))]


class TestBinarize:
    def test_inclusive(self):
        assert binarize([0.4, 0.5, 0.6], 0.5).tolist() == [0, 1, 1]

    def test_zeros(self):
        assert not binarize(np.zeros((2, 5)), 0.5).any()

    def test_tiny_threshold(self):
        assert binarize(np.array([0.01, 0.3, 1.0]), 1e-9).all()


class TestMedianFilter:
    def test_alternating(self):
        assert median_filter([0, 1, 0, 1, 0], 3).tolist() == [0, 0, 1, 0, 0]

    def test_plateau(self):
        assert median_filter([0, 0, 1, 1, 1, 0, 0], 3).tolist() == [0, 0, 1, 1, 1, 0, 0]

    def test_size_one_identity(self):
        row = [1, 0, 0, 1, 1, 0]
        assert median_filter(row, 1).tolist() == row

    def test_even_size_rejected(self):
        with pytest.raises(InvalidInput):
            median_filter([0, 1], 4)

    def test_spike_removed_at_seven(self):
        row = np.zeros(30, dtype=int)
        row[14] = 1
        assert not median_filter(row, 7).any()

    @settings(max_examples=200, deadline=None)
    @given(hnp.arrays(np.int8, st.integers(1, 40), elements=st.integers(0, 1)),
           st.sampled_from([1, 3, 5, 7, 9]))
    def test_matches_brute_force(self, row, size):
        assert median_filter(row, size).tolist() == brute_median(row, size)

    def test_size_three_not_idempotent_on_alternation(self):
        once = median_filter([0, 1, 0, 1, 0], 3)
        assert median_filter(once, 3).tolist() == [0, 0, 0, 0, 0]

    @settings(max_examples=200, deadline=None)
    @given(hnp.arrays(np.int8, st.integers(1, 40), elements=st.integers(0, 1)),
           st.sampled_from([3, 5, 7, 9, 11]))
    def test_reaches_fixed_point(self, row, size):
        cur = np.asarray(row)
        for _ in range(len(row) + 1):
            nxt = median_filter(cur, size)
            if np.array_equal(nxt, cur):
                break
            cur = nxt
        np.testing.assert_array_equal(median_filter(cur, size), cur)


class TestSegments:
    def test_hand_traced(self):
        (ev,) = segments_to_events([0, 0, 1, 1, 1, 0], 3, 25.0)
        assert ev.class_id == 3
        assert ev.onset_s == pytest.approx(0.08) and ev.offset_s == pytest.approx(0.20)

    def test_empty(self):
        assert segments_to_events([0, 0, 0], 0, 25.0) == []

    def test_full(self):
        assert segments_to_events([1] * 5, 0, 25.0) == [Event(0, 0.0, 0.2)]

    @settings(max_examples=200, deadline=None)
    @given(hnp.arrays(np.int8, st.integers(1, 60), elements=st.integers(0, 1)))
    def test_disjoint_sorted_positive(self, row):
        events = segments_to_events(row, 0, 10.0)
        for a, b in zip(events, events[1:]):
            assert a.offset_s < b.onset_s
        assert all(e.offset_s > e.onset_s for e in events)
        assert sum(round(e.duration * 10) for e in events) == int(np.sum(row))


class TestDecode:
    def test_identity_composition(self):
        grid = np.array([[0.9, 0.9, 0.0, 0.0, 0.8], [0.0, 0.7, 0.7, 0.7, 0.0]])
        events = decode(grid, DecodeParams(0.5, 1, 10.0))
        assert events == [Event(0, 0.0, 0.2), Event(0, 0.4, 0.5), Event(1, 0.1, 0.4)]

    def test_spike_removed(self):
        grid = np.full((2, 40), 0.1)
        grid[1, 20] = 0.99
        assert decode(grid, DecodeParams(0.5, 7, 25.0)) == []

    def test_toy_grid_size_three(self):
        # hand trace: binarised row0 [0,1,1,0,0] -> median3 [0,1,1,0,0]; row1 [0,0,0,1,0] -> all 0
        grid = np.array([[0.1, 0.7, 0.9, 0.4, 0.2], [0.5, 0.3, 0.2, 0.8, 0.1]])
        assert decode(grid, DecodeParams(0.6, 3, 5.0)) == [Event(0, 0.2, 0.6)]

    def test_batch_matches_single(self):
        rng = np.random.default_rng(0)
        grids = rng.random((4, 3, 50))
        for th_events, th in zip(decode_batch(grids, [0.3, 0.7], 5, 25.0), [0.3, 0.7]):
            for g, events in zip(grids, th_events):
                assert events == decode(g, DecodeParams(th, 5, 25.0))

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, (3, 30), elements=st.floats(0, 1)), st.floats(0.05, 0.5),
           st.floats(0, 0.4))
    def test_threshold_monotone_before_filtering(self, grid, lo, bump):
        assert np.all(binarize(grid, lo + bump) <= binarize(grid, lo))

    def test_even_median_rejected(self):
        with pytest.raises(InvalidInput):
            DecodeParams(median_size=6)
