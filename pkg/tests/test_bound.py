import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klbound import (
    IDENTITY,
    SQUARE,
    Bernoulli,
    DiscreteFinite,
    KLBoundError,
    MomentSummary,
    Normal,
    Regime,
    chi_sq,
    equality_condition_check,
    hcrb_chi2_lower_bound,
    hellinger_lower_bound,
    hellinger_sq,
    kl_exact,
    kl_lower_bound,
    kl_lower_bound_batch,
    kl_lower_bound_integral,
)
from klbound.bound import SERIES_THRESHOLD, _atanh_over_d
from klbound.checks import random_pairs

GOLDEN = MomentSummary(2.5, 3.0, 1.25, 1.0)


def mp_bound(e_p, e_q, v_p, v_q):
    """The closed form with plain atanh, at 50 digits."""
    mpmath.mp.dps = 50
    e_p, e_q, v_p, v_q = (mpmath.mpf(x) for x in (e_p, e_q, v_p, v_q))
    a = (e_q - e_p) ** 2
    big_a = a + v_p + v_q
    d = mpmath.sqrt(big_a ** 2 - 4 * v_p * v_q)
    return float((big_a - 2 * v_p) / d * mpmath.atanh(d / big_a) + mpmath.log(v_p / v_q) / 2)


def test_golden_value():
    res = kl_lower_bound(GOLDEN)
    assert res.value == pytest.approx(0.111571775657, abs=1e-12)
    assert res.a_term == 2.5
    assert res.d_term == pytest.approx(math.sqrt(2.5 ** 2 - 5.0))
    assert res.regime is Regime.CLOSED_FORM


def test_degenerate_equal_moments_is_zero():
    res = kl_lower_bound(MomentSummary(1, 1, 2, 2))
    assert res.value == 0.0
    assert res.regime is Regime.SERIES_SMALL_D
    assert res.a_term == 4.0 and res.d_term == 0.0


def test_unit_mean_shift_value():
    # frozen from the 50-digit evaluation; quadrature gives the same digits
    assert kl_lower_bound(MomentSummary(0, 1, 1, 1)).value == pytest.approx(0.43040894096400404, abs=1e-15)
    assert mp_bound(0, 1, 1, 1) == pytest.approx(0.43040894096400404, abs=1e-15)


@pytest.mark.parametrize("m", [
    GOLDEN,
    MomentSummary(0, 1, 1, 1),
    MomentSummary(1, 2, 2, 6),
    MomentSummary(0, 10, 1e-3, 1e-3),
    MomentSummary(0, 1e-3, 1e3, 1e-3),
])
def test_closed_form_matches_high_precision(m):
    assert kl_lower_bound(m).value == pytest.approx(mp_bound(m.e_p, m.e_q, m.v_p, m.v_q), rel=1e-12, abs=1e-15)


def test_integral_oracle_examples():
    assert kl_lower_bound_integral(GOLDEN) == pytest.approx(0.111571775657, abs=1e-9)
    assert kl_lower_bound_integral(MomentSummary(4, 4, 1, 3)) == 0.0
    m = MomentSummary(0, 1, 1, 1)
    assert kl_lower_bound_integral(m) == pytest.approx(kl_lower_bound(m).value, abs=1e-9)


summaries = st.builds(
    lambda e, gap, lvp, lvq: MomentSummary(e, e + gap, 10 ** lvp, 10 ** lvq),
    st.floats(-5, 5), st.floats(0, 10), st.floats(-3, 3), st.floats(-3, 3),
)


@settings(max_examples=300, deadline=None)
@given(summaries)
def test_closed_form_agrees_with_integral(m):
    value = kl_lower_bound(m).value
    assert abs(value - kl_lower_bound_integral(m)) <= 1e-8 * max(1.0, value)


@settings(max_examples=300, deadline=None)
@given(summaries)
def test_bound_invariants(m):
    res = kl_lower_bound(m)
    assert res.value >= -1e-12
    assert res.a_term >= m.v_p + m.v_q
    assert 0.0 <= res.ratio < 1.0


@settings(max_examples=200, deadline=None)
@given(summaries)
def test_batch_matches_scalar(m):
    batch = kl_lower_bound_batch([m.e_p], [m.e_q], [m.v_p], [m.v_q])[0]
    assert batch == pytest.approx(kl_lower_bound(m).value, rel=1e-13, abs=1e-15)


def test_regime_switch_is_continuous():
    """Both regimes agree near the threshold, relative to the terms' scale."""
    for v in (1e-2, 1.0, 37.0):
        for frac in (0.5, 0.999, 1.001, 2.0):
            # pure variance mismatch: D/A = |vp - vq| / (vp + vq)
            x = frac * SERIES_THRESHOLD
            v_q = v * (1 - x) / (1 + x)
            m = MomentSummary(0.0, 0.0, v, v_q)
            closed = kl_lower_bound(m, Regime.CLOSED_FORM)
            series = kl_lower_bound(m, Regime.SERIES_SMALL_D)
            f_closed = _atanh_over_d(0.0, v, v_q, closed.d_term, closed.a_term, Regime.CLOSED_FORM)
            f_series = _atanh_over_d(0.0, v, v_q, closed.d_term, closed.a_term, Regime.SERIES_SMALL_D)
            assert f_closed == pytest.approx(f_series, rel=1e-12)
            scale = abs(closed.log_term)
            assert abs(closed.value - series.value) <= 1e-12 * scale


def test_closed_form_refuses_zero_d():
    with pytest.raises(KLBoundError):
        kl_lower_bound(MomentSummary(0, 0, 1, 1), Regime.CLOSED_FORM)


def test_hcrb_examples():
    assert hcrb_chi2_lower_bound(GOLDEN) == pytest.approx(0.25)
    assert hcrb_chi2_lower_bound(MomentSummary(1, 1, 2, 3)) == 0.0
    p, q = Bernoulli(0.2), Bernoulli(0.65)
    m = MomentSummary.from_distributions(p, q)
    assert hcrb_chi2_lower_bound(m) == pytest.approx(chi_sq(p, q), abs=1e-12)
    assert chi_sq(p, q) == pytest.approx(0.45 ** 2 / (0.65 * 0.35), abs=1e-14)


def test_hellinger_bound_examples():
    assert hellinger_lower_bound(MomentSummary(2, 2, 1, 1)) == 0.0
    assert hellinger_lower_bound(GOLDEN) == pytest.approx(0.25 / (2 * (2.25 + 0.125)), abs=1e-15)
    assert hellinger_lower_bound(MomentSummary(0, 2, 1, 1)) == pytest.approx(0.5)


@pytest.fixture(scope="module")
def pair_grid():
    return random_pairs(150, seed=7)


def test_soundness_on_grid(pair_grid):
    for p, q in pair_grid:
        kl, chi, hel = kl_exact(p, q), chi_sq(p, q), hellinger_sq(p, q)
        for f in (IDENTITY, SQUARE):
            m = MomentSummary.from_distributions(p, q, f)
            assert kl_lower_bound(m).value <= kl + 1e-10
            assert hcrb_chi2_lower_bound(m) <= chi + 1e-10
            assert hellinger_lower_bound(m) <= hel + 1e-10


@pytest.mark.parametrize("a", np.linspace(0.01, 0.99, 9))
@pytest.mark.parametrize("b", np.linspace(0.02, 0.98, 7))
def test_bernoulli_tightness(a, b):
    p, q = Bernoulli(a), Bernoulli(b)
    m = MomentSummary.from_distributions(p, q)
    assert kl_lower_bound(m).value == pytest.approx(kl_exact(p, q), abs=1e-10)


def test_equality_condition_bernoulli():
    report = equality_condition_check(Bernoulli(0.3), Bernoulli(0.7), IDENTITY, [0, 0.25, 0.5, 0.75, 1])
    assert report.holds
    assert max(report.spreads) < 1e-12
    # C(t) = (q - p) / (r_t (1 - r_t)) with r_t = 0.3 + 0.4 t
    expected = [0.4 / (r * (1 - r)) for r in (0.3, 0.4, 0.5, 0.6, 0.7)]
    np.testing.assert_allclose(report.constants, expected, rtol=1e-12)


def test_equality_condition_trivial_and_failing(golden_pair):
    p, q = golden_pair
    same = equality_condition_check(p, p, IDENTITY, [0.0, 0.5, 1.0])
    assert same.holds and all(c == 0.0 for c in same.constants)
    assert not equality_condition_check(p, q, IDENTITY, [0.0, 0.25, 0.5, 0.75, 1.0]).holds


def test_equality_condition_errors(golden_pair):
    p, q = golden_pair
    with pytest.raises(KLBoundError):
        equality_condition_check(p, q, IDENTITY, [])
    with pytest.raises(KLBoundError):
        equality_condition_check(p, q, IDENTITY, [1.5])
    with pytest.raises(KLBoundError):
        equality_condition_check(Normal(0, 1), Normal(1, 1), IDENTITY, [0.5])
    with pytest.raises(KLBoundError):
        equality_condition_check(p, DiscreteFinite((1, 2), (0.5, 0.5)), IDENTITY, [0.5])
