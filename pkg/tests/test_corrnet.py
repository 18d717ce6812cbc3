import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crashnet import corrnet
from crashnet.errors import InsufficientData, InvalidParameter, LengthMismatch

from conftest import make_returns


def test_two_point_weights_closed_form():
    w = corrnet.make_weights(2, 1.0, literal=True).weights
    e = math.exp(-1.0)
    assert w == pytest.approx([e / (1 + e), 1 / (1 + e)], abs=1e-15)
    assert w == pytest.approx([0.26894, 0.73106], abs=5e-6)
    # fraction mode reaches the same decay with theta = 1 / window
    assert corrnet.make_weights(2, 0.5).weights == pytest.approx(w, abs=1e-15)


def test_flat_limit():
    assert corrnet.make_weights(24, 1e13).weights == pytest.approx(np.full(24, 1 / 24), abs=1e-12)


def test_default_decay_is_fraction_of_window():
    s = corrnet.make_weights(24, 0.3)
    assert s.decay == pytest.approx(7.2)
    assert np.all(np.diff(s.weights) > 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 200), st.floats(1e-3, 1e3), st.booleans())
def test_weights_normalised(window, theta, literal):
    w = corrnet.make_weights(window, theta, literal).weights
    assert abs(w.sum() - 1.0) <= 1e-12 and np.all(w >= 0)


@pytest.mark.parametrize("window,theta", [(1, 0.3), (24, 0.0), (24, -1.0)])
def test_weight_parameter_errors(window, theta):
    with pytest.raises(InvalidParameter):
        corrnet.make_weights(window, theta)


def test_self_and_anti_correlation():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(24)
    w = corrnet.make_weights(24, 0.3)
    assert corrnet.weighted_corr(x, x, w)[0] == pytest.approx(1.0, abs=1e-15)
    assert corrnet.weighted_corr(x, -x, w)[0] == pytest.approx(-1.0, abs=1e-15)


def test_degenerate_pair_is_zero_and_flagged():
    w = corrnet.make_weights(24, 0.3)
    rho, deg = corrnet.weighted_corr(np.full(24, 0.01), np.arange(24.0), w)
    assert (rho, deg) == (0.0, True)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        corrnet.weighted_corr(np.ones(3), np.ones(4), np.full(3, 1 / 3))


def test_uniform_weights_match_pearson():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 50))
    rho, _ = corrnet.weighted_corr(x, y, np.full(50, 1 / 50))
    assert rho == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10), st.floats(-5, 5))
def test_positive_affine_invariance(seed, a, b, c, d):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 24))
    w = corrnet.make_weights(24, 0.3)
    r0, _ = corrnet.weighted_corr(x, y, w)
    r1, _ = corrnet.weighted_corr(a * x + b, c * y + d, w)
    assert r1 == pytest.approx(r0, abs=1e-10)
    assert corrnet.weighted_corr(y, x, w)[0] == r0


def test_matrix_agrees_with_pairwise():
    rng = np.random.default_rng(2)
    block = rng.standard_normal((6, 24))
    block[3] = 0.5  # one flat asset
    w = corrnet.make_weights(24, 0.3)
    rho, deg = corrnet.weighted_corr_matrix(block, w)
    for i in range(6):
        for j in range(6):
            if i == j:
                assert rho[i, j] == 1.0
                continue
            r, d = corrnet.weighted_corr(block[i], block[j], w)
            assert rho[i, j] == pytest.approx(r, abs=1e-12)
            assert deg[i, j] == d


def test_window_count():
    rp = make_returns(np.random.default_rng(3).standard_normal((3, 25)))
    assert len(corrnet.rolling_corr(rp, 24, 1)) == 2
    assert list(corrnet.rolling_corr(rp, 24, 1).window_ends) == list(rp.timestamps[23:])
    with pytest.raises(InsufficientData):
        corrnet.rolling_corr(make_returns(np.ones((2, 10))), 24)


def test_sixteen_day_window_count():
    rp = make_returns(np.random.default_rng(4).standard_normal((2, 383)))
    assert len(corrnet.rolling_corr(rp)) == 360


def test_identical_assets_fully_correlated():
    x = np.random.default_rng(5).standard_normal(60)
    s = corrnet.rolling_corr(make_returns(np.vstack([x, x, x])))
    assert np.allclose(s.matrices, 1.0, atol=1e-12)
    assert np.allclose(corrnet.average_corr(s), 1.0, atol=1e-12)


def test_random_panel_matrices_are_psd():
    rp = make_returns(np.random.default_rng(6).standard_normal((5, 200)))
    s = corrnet.rolling_corr(rp)
    for m in s.matrices:
        assert np.array_equal(m, m.T)
        assert np.linalg.eigvalsh(m).min() >= -1e-8


def test_average_corr_two_assets():
    rp = make_returns(np.random.default_rng(7).standard_normal((2, 40)))
    s = corrnet.rolling_corr(rp)
    assert np.array_equal(corrnet.average_corr(s, "A0"), s.matrices[:, 0, 1])
    assert np.allclose(corrnet.average_corr(s), s.matrices[:, 0, 1])


def test_average_corr_brute_force():
    rp = make_returns(np.random.default_rng(8).standard_normal((7, 60)))
    s = corrnet.rolling_corr(rp)
    n = 7
    for k in range(len(s)):
        total = math.fsum(s.matrices[k, i, j] for i in range(n) for j in range(n) if i != j)
        assert corrnet.average_corr(s)[k] == pytest.approx(total / (n * (n - 1)), abs=1e-12)
        own = math.fsum(s.matrices[k, 2, j] for j in range(n) if j != 2) / (n - 1)
        assert corrnet.average_corr(s, "A2")[k] == pytest.approx(own, abs=1e-12)


def test_average_corr_unknown_asset():
    s = corrnet.rolling_corr(make_returns(np.random.default_rng(9).standard_normal((3, 30))))
    with pytest.raises(KeyError):
        corrnet.average_corr(s, "ZZZ")


def test_ema_examples():
    assert corrnet.ema([0.0, 1.0], 0.3).tolist() == [0.0, 0.3]
    x = np.random.default_rng(10).standard_normal(20)
    assert np.array_equal(corrnet.ema(x, 1.0), x)
    assert np.allclose(corrnet.ema(np.full(15, 0.42), 0.3), 0.42)
    with pytest.raises(InvalidParameter):
        corrnet.ema(x, 0.0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(-1, 1)), st.floats(0.01, 1.0))
def test_ema_stays_in_input_range(x, alpha):
    s = corrnet.ema(x, alpha)
    assert s.min() >= x.min() - 1e-12 and s.max() <= x.max() + 1e-12


def test_avg_corr_csv_layout():
    s = corrnet.rolling_corr(make_returns(np.random.default_rng(12).standard_normal((3, 26))))
    lines = corrnet.avg_corr_csv(s, ["MARKET", "A1"]).splitlines()
    assert lines[0] == "window_end,asset,avg_corr"
    assert len(lines) == 1 + 3 * 2
