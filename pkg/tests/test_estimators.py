import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trimhill.estimators import (
    NonPositiveDataError,
    SortedSample,
    averaged_trimmed,
    batch_trajectories,
    exact_variance,
    expected_lth_variance_pareto,
    hill,
    log_excesses,
    lth_trajectory,
    omega_bar,
    sort_rows_desc,
    tbk_weights,
    theta_asymptotic,
    theta_weights,
    trajectory_values,
    trimmed_hill,
    upper_trimmed_hill,
    variance_bound,
    weighted_hill,
)
from trimhill.samplers import Pareto, draw, sample
from trimhill.special import harmonic_tail

S421 = SortedSample([1.0, 4.0, 2.0])

positive_samples = arrays(
    np.float64,
    st.integers(min_value=3, max_value=80),
    elements=st.floats(min_value=1e-3, max_value=1e6, allow_nan=False),
)


def test_sorted_sample_orders_and_freezes():
    assert S421.values.tolist() == [4.0, 2.0, 1.0]
    assert S421.n == 3 and len(S421) == 3
    with pytest.raises(ValueError):
        S421.values[0] = 5.0
    np.testing.assert_array_equal(S421.logs, np.log([4.0, 2.0, 1.0]))


def test_sorted_sample_rejects_nonpositive():
    with pytest.raises(NonPositiveDataError) as info:
        SortedSample([1.0, 0.0, -2.0, 3.0])
    assert info.value.count == 2
    with pytest.raises(ValueError):
        SortedSample([])
    with pytest.raises(ValueError):
        SortedSample([1.0, np.nan])


def test_log_excesses_hand_example():
    z = log_excesses(S421, 2)
    np.testing.assert_allclose(z.z, [math.log(4), math.log(2)], rtol=1e-15)
    assert z.k == 2


def test_log_excesses_constant_sample():
    s = SortedSample(np.full(10, 3.7))
    assert np.all(log_excesses(s, 6).z == 0.0)
    # ties: zero excesses are legal and give zero statistics
    assert hill(log_excesses(s, 6)) == 0.0
    assert np.all(trajectory_values(log_excesses(s, 6)) == 0.0)


def test_log_excesses_range():
    with pytest.raises(IndexError):
        log_excesses(S421, 3)
    with pytest.raises(IndexError):
        log_excesses(S421, 0)


def test_log_excesses_square_doubles():
    s = sample(Pareto(1.0), 200, 4)
    z1 = log_excesses(s, 50).z
    z2 = log_excesses(s.transform(np.square), 50).z
    np.testing.assert_allclose(z2, 2 * z1, rtol=1e-12)


def test_omega_bar_examples():
    for k in (1, 5, 40):
        assert omega_bar(1, k) == pytest.approx(k, rel=1e-14)
    assert omega_bar(2, 2) == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(IndexError):
        omega_bar(3, 2)


def test_omega_bar_identity_grid():
    for k in range(1, 201, 7):
        h = harmonic_tail(k)
        for b in range(1, k + 1):
            assert omega_bar(k - b + 1, k) == pytest.approx(b * (1 + h[b - 1]), rel=1e-10)


def test_trimmed_hill_hand_examples():
    z = log_excesses(S421, 2)
    assert trimmed_hill(z, 1) == pytest.approx(math.log(4) / 1.5, rel=1e-14)
    assert trimmed_hill(z, 1) == pytest.approx(0.92420, abs=1e-5)
    assert hill(z) == pytest.approx(1.5 * math.log(2), rel=1e-14)
    assert hill(z) == pytest.approx(1.03972, abs=1e-5)
    with pytest.raises(IndexError):
        trimmed_hill(z, 3)
    with pytest.raises(IndexError):
        trimmed_hill(z, 0)


def test_trimmed_hill_at_k_is_hill_bitwise():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = SortedSample(rng.pareto(1.3, 300) + 1)
        for k in (1, 2, 17, 299):
            z = log_excesses(s, k)
            assert trimmed_hill(z, k) == hill(z)
            assert lth_trajectory(s, k).t[-1] == hill(z)


def test_trajectory_matches_pointwise():
    s = sample(Pareto(0.7), 150, 9)
    for k in (1, 3, 60, 149):
        z = log_excesses(s, k)
        t = lth_trajectory(s, k)
        np.testing.assert_allclose(t.t, [trimmed_hill(z, b) for b in range(1, k + 1)], rtol=1e-13)
        assert t.emp_var == pytest.approx(np.mean((t.t - t.t.mean()) ** 2), rel=1e-12)
        assert t.emp_var >= 0


def test_trajectory_slope():
    s = sample(Pareto(1.0), 100, 2)
    t = lth_trajectory(s, 40)
    fit = np.polyfit(np.arange(1, 41), t.t, 1)[0]
    assert t.slope == pytest.approx(abs(fit), rel=1e-9)
    assert math.isnan(lth_trajectory(s, 1).slope)


def test_slope_shrinks_for_pareto():
    # flat trajectories under an exact Pareto tail: mean |slope| drops as k grows
    x = sort_rows_desc(draw(Pareto(1.0), (400, 2001), 3))
    slopes = {}
    for k in (50, 2000):
        t = batch_trajectories(x, k)
        b = np.arange(1, k + 1) - (k + 1) / 2
        slopes[k] = np.mean(np.abs(t @ b / np.dot(b, b)))
    assert slopes[2000] < slopes[50] / 10


def test_averaged_trimmed_k1_and_theta_identity():
    s = sample(Pareto(0.5), 50, 3)
    assert averaged_trimmed(s, 1) == hill(log_excesses(s, 1))
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(10, 501))
        s = SortedSample(rng.pareto(rng.uniform(0.5, 3), n) + 1)
        k = int(rng.integers(1, n))
        assert averaged_trimmed(s, k) == pytest.approx(weighted_hill(log_excesses(s, k)), rel=1e-12)


def test_theta_weights_examples():
    assert theta_weights(1).tolist() == [1.0]
    th = theta_weights(100)
    assert 1.8 < th[0] < 2.0
    below = np.flatnonzero(th < 1)[0] + 1
    assert 18 <= below <= 22
    assert theta_weights(10_000)[0] < 2.4
    assert np.all(np.diff(th) < 0)


def test_theta_unbiasedness_shadow():
    for k in list(range(1, 60)) + [100, 257, 500]:
        a = np.cumsum((1.0 / np.arange(1, k + 1))[::-1])[::-1]
        assert np.dot(theta_weights(k), a) / k == pytest.approx(1.0, rel=1e-10)


def test_theta_asymptotic():
    k = 100
    th = theta_weights(k)
    gap = np.abs(th - theta_asymptotic(np.arange(1, k + 1), k))
    # the continuous approximation misses the discrete sum most at the top order statistics
    assert gap.max() < 0.15
    assert gap[4:].max() < 0.05
    assert theta_asymptotic(k, k) == pytest.approx(math.log(1 / (1 - math.log1p(-1 / k))), rel=1e-14)
    with pytest.raises(IndexError):
        theta_asymptotic(0, k)


def test_theta_asymptotic_relative_accuracy_improves():
    rel = []
    for k in (100, 1000, 10_000):
        i = np.unique(np.geomspace(1, k / 2, 30).astype(int))
        rel.append(np.max(np.abs(theta_weights(k)[i - 1] / theta_asymptotic(i, k) - 1)))
    assert rel[0] > rel[1] > rel[2]


def test_theta_one_series():
    # the closed-form series expands the asymptotic approximation at i = 1
    for k in (100, 1000, 10_000):
        series = math.log(math.log(k) + 1) - 1 / k
        assert abs(theta_asymptotic(1, k) - series) < 1.0 / k**3
    gaps = [abs(theta_weights(k)[0] - (math.log(math.log(k) + 1) - 1 / k)) for k in (100, 1000, 10_000)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_upper_trimmed_hill():
    s = SortedSample([8.0, 4.0, 2.0, 1.0, 0.5])
    assert upper_trimmed_hill(s, 1, 3) == pytest.approx(math.log(4) + 0.5 * math.log(2), rel=1e-14)
    assert upper_trimmed_hill(s, 1, 3) == pytest.approx(1.73287, abs=1e-5)
    t = sample(Pareto(1.0), 100, 5)
    assert upper_trimmed_hill(t, 0, 40) == pytest.approx(hill(log_excesses(t, 40)), rel=1e-13)
    with pytest.raises(IndexError):
        upper_trimmed_hill(s, 3, 3)


def test_upper_trimmed_hill_unbiased():
    x = sort_rows_desc(draw(Pareto(2.0), (20_000, 60), 12))
    logs = np.log(x)
    k, k0 = 50, 5
    z = logs[:, :k] - logs[:, [k]]
    est = (k0 + 1) / (k - k0) * z[:, k0] + z[:, k0 + 1 :].sum(axis=1) / (k - k0)
    se = est.std() / math.sqrt(est.size)
    assert abs(est.mean() - 2.0) < 4 * se


def test_variance_formulas():
    for k in (1, 5, 80):
        assert variance_bound(k, k, 2.0) == pytest.approx(4.0 / k, rel=1e-13)
        assert exact_variance(k, k, 2.0) == pytest.approx(4.0 / k, rel=1e-13)
    for k in (10, 80):
        for b in range(1, k + 1):
            assert exact_variance(b, k) <= variance_bound(b, k) * (1 + 1e-12)
            assert exact_variance(b, k) >= 1.0 / k * (1 - 1e-12)
    assert tbk_weights(3, 9).sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        variance_bound(2, 5, 0.0)
    with pytest.raises(IndexError):
        variance_bound(6, 5)


def test_expected_lth_variance_formula_by_brute_force():
    k = 12
    w = np.array([tbk_weights(b, k) for b in range(1, k + 1)])  # row b: weights of T_{b,k}
    dev = w - w.mean(axis=0)
    brute = np.sum(dev**2) / k
    assert expected_lth_variance_pareto(k, 1.0) == pytest.approx(brute, rel=1e-12)
    assert expected_lth_variance_pareto(k, 3.0) == pytest.approx(9 * brute, rel=1e-12)


def test_batch_trajectories_match_single():
    x = sort_rows_desc(draw(Pareto(1.0), (5, 40), 1))
    bt = batch_trajectories(x, 30)
    for row, t in zip(x, bt):
        np.testing.assert_allclose(t, lth_trajectory(SortedSample(row), 30).t, rtol=1e-13)


@settings(max_examples=50, deadline=None)
@given(positive_samples, st.sampled_from([0.5, 2.0, 4.0, 1 / 1024]))
def test_scale_invariance_exact(values, c):
    s = SortedSample(values)
    k = s.n - 1
    a = lth_trajectory(s, k)
    b = lth_trajectory(s.transform(lambda x: c * x), k)
    np.testing.assert_array_equal(a.t, b.t)


@settings(max_examples=50, deadline=None)
@given(positive_samples, st.floats(min_value=0.01, max_value=100.0))
def test_scale_invariance_general(values, c):
    s = SortedSample(values)
    k = s.n - 1
    a = lth_trajectory(s, k).t
    b = lth_trajectory(s.transform(lambda x: c * x), k).t
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(positive_samples, st.floats(min_value=0.1, max_value=10.0))
def test_power_equivariance(values, c):
    s = SortedSample(values)
    sc = s.transform(lambda x: x**c)
    for k in (1, s.n // 2, s.n - 1):
        np.testing.assert_allclose(lth_trajectory(sc, k).t, c * lth_trajectory(s, k).t, rtol=1e-9, atol=1e-12)
        assert averaged_trimmed(sc, k) == pytest.approx(c * averaged_trimmed(s, k), rel=1e-9, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(positive_samples)
def test_log_excess_invariants(values):
    s = SortedSample(values)
    z = log_excesses(s, s.n - 1).z
    assert np.all(z >= 0)
    assert np.all(np.diff(z) <= 0)
    assert np.all(np.diff(s.values) <= 0)
