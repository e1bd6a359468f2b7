import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runlength_lab import orbit_array, preimage_sequence
from runlength_lab.runlength import (
    RunLengthState,
    cylinder_interval,
    feed,
    feed_all,
    longest_run,
    max_window_birkhoff,
    run_length_window,
)

bits = st.lists(st.integers(0, 1), min_size=1, max_size=200)


def brute_run(d, digit, m=1, n=None):
    # double loop over 1-based starts i+1 and lengths k
    n = len(d) if n is None else n
    best = 0
    for i in range(m - 1, n):
        k = 0
        while i + k < n and d[i + k] == digit:
            k += 1
        best = max(best, k)
    return best


def brute_window(d, K, digit):
    return max(sum(1 for j in range(i, i + K) if d[j] == digit) for i in range(len(d) - K + 1))


def test_examples():
    d = [1, 1, 0, 0, 0, 1, 0]
    st_ = feed_all(d)
    assert (st_.max_run_0, st_.max_run_1, st_.n) == (3, 2, 7)
    assert (st_.current_run_0, st_.current_run_1) == (1, 0)
    assert longest_run(d, 0) == 3 and longest_run(d, 1) == 2
    assert longest_run([], 1) == 0
    assert longest_run([0, 0], 1) == 0
    assert run_length_window(d, 4, 7, 0) == 2
    assert run_length_window(d, 1, 7, 0) == 3
    assert max_window_birkhoff(d, 3, 0).max_sum == 3
    assert max_window_birkhoff(d, 1, 1).average == 1.0


def test_feed_rejects_other_digits():
    with pytest.raises(ValueError):
        feed(RunLengthState(), 2)


def test_window_bounds():
    with pytest.raises(ValueError):
        run_length_window([0, 1], 2, 1, 0)
    with pytest.raises(ValueError):
        run_length_window([0, 1], 0, 1, 0)
    with pytest.raises(ValueError):
        run_length_window([0, 1], 1, 3, 0)
    with pytest.raises(ValueError):
        max_window_birkhoff([0, 1], 0, 0)
    with pytest.raises(ValueError):
        max_window_birkhoff([0, 1], 3, 0)


@given(bits)
def test_streaming_matches_brute_force(d):
    s = feed_all(d)
    assert s.max_run(0) == brute_run(d, 0)
    assert s.max_run(1) == brute_run(d, 1)
    assert longest_run(d, 0) == s.max_run_0
    assert s.max_run_0 + s.max_run_1 <= len(d)


@given(bits, st.data())
def test_windowed_run_matches_brute_force(d, data):
    n = data.draw(st.integers(1, len(d)))
    m = data.draw(st.integers(1, n))
    for digit in (0, 1):
        assert run_length_window(d, m, n, digit) == brute_run(d, digit, m, n)


@given(bits, st.data())
def test_window_birkhoff_matches_brute_force(d, data):
    K = data.draw(st.integers(1, len(d)))
    for digit in (0, 1):
        assert max_window_birkhoff(d, K, digit).max_sum == brute_window(d, K, digit)


@given(bits, bits)
def test_streaming_is_resumable(a, b):
    assert feed_all(b, feed_all(a)) == feed_all(a + b)


@given(bits, st.data())
def test_window_run_monotone_in_range(d, data):
    n = data.draw(st.integers(1, len(d)))
    m = data.draw(st.integers(1, n))
    r = run_length_window(d, m, n, 0)
    assert r <= run_length_window(d, 1, len(d), 0)
    if n < len(d):
        assert r <= run_length_window(d, m, n + 1, 0)


def test_run_at_most_window_run():
    # a run of K ones means a window average of 1
    rng = np.random.default_rng(3)
    d = rng.integers(0, 2, 5000)
    R = longest_run(d, 1)
    assert max_window_birkhoff(d, R, 1).average == 1.0
    assert max_window_birkhoff(d, R + 1, 1).average < 1.0


@pytest.mark.parametrize("k", range(1, 21))
def test_one_cylinder_exact(k):
    cyl = cylinder_interval(0.5, k, 1)
    assert cyl.lo == 1 - 2.0**-k and cyl.hi == 1.0
    inside = [cyl.lo, np.nextafter(cyl.lo, 1), cyl.lo + cyl.width / 2, np.nextafter(1.0, 0)]
    for x in inside:
        assert x in cyl
        assert orbit_array(0.5, x, k)[1].sum() == k
    below = np.nextafter(cyl.lo, 0)
    assert below not in cyl
    assert longest_run(orbit_array(0.5, below, k)[1], 1) < k or orbit_array(0.5, below, k)[1][:k].sum() < k


def test_zero_cylinder_membership():
    lad = preimage_sequence(0.5, 12).values
    for k in range(1, 12):
        cyl = cylinder_interval(0.5, k, 0)
        assert cyl.lo == 0.0 and cyl.hi == lad[k - 1]
        # the ladder values are rounded, so probe a hair off the edge
        inside = cyl.hi * (1 - 1e-12)
        outside = cyl.hi * (1 + 1e-12)
        assert orbit_array(0.5, inside, k)[1].sum() == 0
        assert orbit_array(0.5, outside, k)[1].sum() > 0


def test_zero_cylinder_two_is_first_preimage():
    assert cylinder_interval(0.5, 2, 0).hi == pytest.approx(0.2849201454990266, abs=1e-15)
    assert cylinder_interval(0.5, 1, 0).hi == 0.5


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 0.9), st.integers(1, 30), st.floats(0.0, 1.0, exclude_max=True))
def test_cylinder_iff(alpha, k, x):
    for digit in (0, 1):
        cyl = cylinder_interval(alpha, k, digit)
        lead = orbit_array(alpha, x, k)[1]
        assert (x in cyl) == bool(np.all(lead == digit))


def test_cylinder_rejects_k0():
    with pytest.raises(ValueError):
        cylinder_interval(0.5, 0, 1)
