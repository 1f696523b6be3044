from hypothesis import given
from hypothesis import strategies as st

from pedcross import curves


def test_peak_with_drop():
    y = [62.3, 65.9, 64.0, 63.0, 58.0, 52.6, 54.0]
    j = curves.peak_then_drop(y, 0.05)
    assert j == 1
    assert curves.descent_after(y, 1) == 1 - 52.6 / 65.9


def test_descent_stops_at_the_next_rise():
    # 100 -> 97 then up again: only 3% before the rise
    assert curves.peak_then_drop([90, 100, 97, 99, 80], 0.05) == 3


def test_monotone_curves_have_no_peak():
    assert curves.peak_then_drop([5, 4, 3, 2], 0.05) is None
    assert curves.peak_then_drop([1, 2, 3, 4], 0.05) is None
    assert not curves.has_peak([1, 2, 3, 4])


def test_noise_band():
    assert not curves.has_peak([20.0, 20.3, 20.1, 20.2], 0.02)
    assert curves.has_peak([20.0, 21.0, 20.0, 20.2], 0.02)


def test_plateau_counts_as_one_peak():
    assert curves.has_peak([100, 110, 110, 90], 0.02)


def test_threshold():
    table = {0: [1, 1, 1], 400: [1, 1.01, 1], 800: [1, 2, 1], 1200: [1, 3, 1]}
    assert curves.peak_threshold(table) == 800
    table[1200] = [1, 2, 3]
    assert curves.peak_threshold(table) is None


def test_nearly_monotone():
    assert curves.nearly_monotone([1, 3, 2.5, 6], 1.0)
    assert not curves.nearly_monotone([1, 3, 1.5, 6], 1.0)


@given(st.lists(st.floats(0.1, 100), min_size=3, max_size=12))
def test_sorted_curves_never_peak(y):
    y = sorted(y)
    assert curves.peak_then_drop(y) is None and not curves.has_peak(y)
    assert curves.peak_then_drop(y[::-1]) is None and not curves.has_peak(y[::-1])


@given(st.lists(st.floats(0.1, 100), min_size=3, max_size=12))
def test_peak_then_drop_implies_a_peak(y):
    j = curves.peak_then_drop(y, 0.05)
    if j is not None:
        assert 0 < j < len(y) - 1 and y[j] > y[j - 1] and y[j] >= y[j + 1]
