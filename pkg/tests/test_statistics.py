import math

import pytest
from hypothesis import given, strategies as st
from statsmodels.stats.proportion import proportion_confint

from pursuitsim.errors import DegenerateInput
from pursuitsim.statistics import Z95, summarize_sample, wilson_interval


def wilson_direct(s, n, z=Z95):
    p = s / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = (z / (1 + z * z / n)) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half, centre + half


class TestSummarize:
    def test_single(self):
        s = summarize_sample([3])
        assert (s.mean, s.median, s.std) == (3, 3, 0)

    def test_lower_middle_median(self):
        assert summarize_sample([1, 2, 3, 4]).median == 2

    def test_empty(self):
        s = summarize_sample([])
        assert s.n == 0 and s.mean is None and s.median is None and s.std is None

    def test_population_std(self):
        assert summarize_sample([2, 4, 4, 4, 5, 5, 7, 9]).std == 2.0

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.randoms())
    def test_permutation_invariance(self, values, rnd):
        shuffled = list(values)
        rnd.shuffle(shuffled)
        a, b = summarize_sample(values), summarize_sample(shuffled)
        assert (a.median, a.min, a.max) == (b.median, b.min, b.max)
        assert a.mean == pytest.approx(b.mean, rel=1e-12, abs=1e-6)
        assert a.min <= a.median <= a.max and a.std >= 0


class TestWilson:
    def test_zero_successes(self):
        assert wilson_interval(0, 10)[0] == 0.0

    def test_all_successes(self):
        assert wilson_interval(10, 10)[1] == 1.0

    def test_half(self):
        low, high = wilson_interval(5, 10)
        ref = wilson_direct(5, 10)
        assert low == pytest.approx(ref[0], abs=1e-12) and high == pytest.approx(ref[1], abs=1e-12)

    def test_no_trials(self):
        with pytest.raises(DegenerateInput):
            wilson_interval(0, 0)

    def test_brute_force_small_n(self):
        for n in range(1, 31):
            for s in range(n + 1):
                low, high = wilson_interval(s, n)
                ref_low, ref_high = wilson_direct(s, n)
                assert low == pytest.approx(max(0.0, ref_low), abs=1e-12)
                assert high == pytest.approx(min(1.0, ref_high), abs=1e-12)
                assert 0 <= low <= s / n <= high <= 1

    def test_against_statsmodels(self):
        for n in (1, 7, 30, 100, 500):
            for s in range(0, n + 1, max(1, n // 10)):
                low, high = wilson_interval(s, n)
                ref = proportion_confint(s, n, alpha=0.05, method="wilson")
                assert low == pytest.approx(ref[0], abs=1e-6) and high == pytest.approx(ref[1], abs=1e-6)

    @given(st.integers(1, 300))
    def test_monotone_in_successes(self, n):
        bounds = [wilson_interval(s, n) for s in range(n + 1)]
        for (l1, h1), (l2, h2) in zip(bounds, bounds[1:]):
            assert l1 <= l2 and h1 <= h2
