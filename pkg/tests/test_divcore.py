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
    Exponential,
    FoI,
    GenericDensity,
    KLBoundError,
    MomentSummary,
    Normal,
    QuadratureSpec,
    SupportMismatchError,
    alpha_divergence,
    chi_sq,
    hellinger_sq,
    kl_exact,
    moments,
)
from klbound.divcore import kl_closed_form, quadrature_moments

ALPHAS = (-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)


def brute_alpha(alpha, p, q):
    """Textbook three-branch definition on explicit atoms, in mpmath."""
    mpmath.mp.dps = 40
    p = [mpmath.mpf(x) for x in p]
    q = [mpmath.mpf(x) for x in q]
    if alpha == 1:
        return float(sum(a * mpmath.log(a / b) for a, b in zip(p, q)))
    if alpha == 0:
        return float(sum(b * mpmath.log(b / a) for a, b in zip(p, q)))
    al = mpmath.mpf(alpha)
    return float((sum(a ** al * b ** (1 - al) for a, b in zip(p, q)) - 1) / (al * (al - 1)))


def mp_continuous(integrand, lo, hi):
    mpmath.mp.dps = 30
    return float(mpmath.quad(integrand, [lo, -10, 0, 10, hi] if lo == -mpmath.inf else [lo, 1, 10, hi]))


# --- construction ------------------------------------------------------------


def test_discrete_rejects_zero_atom():
    with pytest.raises(KLBoundError):
        DiscreteFinite((1, 2), (1.0, 0.0))


def test_discrete_rejects_bad_sum_and_duplicates():
    with pytest.raises(KLBoundError):
        DiscreteFinite((1, 2), (0.5, 0.6))
    with pytest.raises(KLBoundError):
        DiscreteFinite((1, 1), (0.5, 0.5))


@pytest.mark.parametrize("bad", [
    lambda: Bernoulli(0.0),
    lambda: Bernoulli(1.0),
    lambda: Normal(0, 0),
    lambda: Normal(0, -1),
    lambda: Exponential(0),
    lambda: Normal(math.nan, 1),
])
def test_parameter_validation(bad):
    with pytest.raises(KLBoundError):
        bad()


def test_generic_density_checks_normalisation():
    GenericDensity(lambda x: math.exp(-x), 0.0, math.inf)
    with pytest.raises(KLBoundError):
        GenericDensity(lambda x: 2 * math.exp(-x), 0.0, math.inf)


def test_constant_foi_rejected():
    with pytest.raises(KLBoundError):
        FoI.polynomial([3.0])
    with pytest.raises(KLBoundError):
        FoI.polynomial([0.0, 0.0, 0.0])


def test_foi_parse_and_eval():
    assert FoI.parse("identity") is IDENTITY
    assert FoI.parse("square") is SQUARE
    f = FoI.parse("poly:1,0,2")
    assert f(3.0) == 19.0
    np.testing.assert_array_equal(f(np.array([0.0, 1.0])), [1.0, 3.0])


def test_quadrature_spec_validation():
    with pytest.raises(KLBoundError):
        QuadratureSpec(rtol=0)
    with pytest.raises(KLBoundError):
        QuadratureSpec(limit=0)


def test_moment_summary_requires_positive_variances():
    with pytest.raises(KLBoundError) as info:
        MomentSummary(0, 0, 0.0, 1.0)
    assert info.value.field == "v_p"
    with pytest.raises(KLBoundError):
        MomentSummary(0, math.inf, 1.0, 1.0)


# --- moments -----------------------------------------------------------------


def test_moments_examples(golden_pair):
    assert moments(Normal(0, 1), IDENTITY) == (0.0, 1.0)
    assert moments(golden_pair[0], IDENTITY) == (2.5, 1.25)
    mean, var = moments(Exponential(2.0), IDENTITY)
    assert (mean, var) == (2.0, 4.0)
    qm, qv = quadrature_moments(Exponential(2.0), IDENTITY)
    assert qm == pytest.approx(2.0, rel=1e-9) and qv == pytest.approx(4.0, rel=1e-9)


@pytest.mark.parametrize("dist", [Normal(0.7, 1.3), Normal(-2, 0.4), Exponential(0.5), Exponential(3.0)])
@pytest.mark.parametrize("f", [IDENTITY, SQUARE])
def test_closed_form_moments_match_quadrature(dist, f):
    closed = moments(dist, f)
    numeric = quadrature_moments(dist, f)
    np.testing.assert_allclose(numeric, closed, rtol=1e-9)


def test_polynomial_moments_by_quadrature():
    # E[x^3] under N(1, 2^2) is mu^3 + 3 mu sigma^2 = 13
    mean, _ = moments(Normal(1.0, 2.0), FoI.polynomial([0, 0, 0, 1]))
    assert mean == pytest.approx(13.0, rel=1e-9)


def test_bernoulli_moments():
    assert moments(Bernoulli(0.7)) == pytest.approx((0.7, 0.21), abs=1e-15)


# --- divergences -------------------------------------------------------------


def test_golden_kl(golden_pair):
    p, q = golden_pair
    assert kl_exact(p, q) == pytest.approx(0.121777274287, abs=1e-12)
    assert alpha_divergence(1, p, q) == pytest.approx(brute_alpha(1, p.probs, q.probs), abs=1e-15)


def test_golden_chi_square(golden_pair):
    p, q = golden_pair
    expected = 0.0225 / 0.1 + 0.0025 / 0.2 + 0.0025 / 0.3 + 0.0225 / 0.4
    assert chi_sq(p, q) == pytest.approx(expected, abs=1e-15)
    assert alpha_divergence(2, p, q) == pytest.approx(expected / 2, abs=1e-15)


def test_golden_hellinger(golden_pair):
    p, q = golden_pair
    expected = sum((math.sqrt(b) - math.sqrt(a)) ** 2 for a, b in zip(p.probs, q.probs))
    assert hellinger_sq(p, q) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_alpha_divergence_matches_brute_force(golden_pair, alpha):
    p, q = golden_pair
    assert alpha_divergence(alpha, p, q) == pytest.approx(brute_alpha(alpha, p.probs, q.probs), abs=1e-14)


def test_bernoulli_closed_forms():
    p, q = Bernoulli(0.3), Bernoulli(0.7)
    assert kl_exact(p, q) == pytest.approx(0.4 * math.log(7 / 3), abs=1e-15)
    assert kl_exact(p, q) == pytest.approx(alpha_divergence(1, p, q), abs=1e-15)
    assert chi_sq(p, q) == pytest.approx(0.16 / 0.21, abs=1e-14)
    assert hellinger_sq(Bernoulli(0.5), Bernoulli(0.5)) == 0.0


def test_normal_mean_shift_kl():
    for beta in (0.5, 1.0, 3.0):
        assert kl_exact(Normal(0, 2), Normal(2 * beta, 2)) == pytest.approx(beta ** 2 / 2, rel=1e-14)
    assert kl_exact(Exponential(1.7), Exponential(1.7)) == 0.0


def test_exponential_kl_formula():
    assert kl_exact(Exponential(1), Exponential(2)) == pytest.approx(0.5 - 1 + math.log(2), rel=1e-15)


def test_support_mismatch():
    with pytest.raises(SupportMismatchError):
        kl_exact(DiscreteFinite((1, 2), (0.5, 0.5)), DiscreteFinite((1, 3), (0.5, 0.5)))
    with pytest.raises(SupportMismatchError):
        kl_exact(Normal(0, 1), Exponential(1))
    with pytest.raises(SupportMismatchError):
        chi_sq(Bernoulli(0.5), Normal(0, 1))


def test_bernoulli_and_discrete_share_support():
    d = DiscreteFinite((1.0, 0.0), (0.4, 0.6))
    assert kl_exact(Bernoulli(0.4), d) == pytest.approx(0.0, abs=1e-15)


PAIRS = [
    (Normal(0, 1), Normal(1, 2)),
    (Normal(-1, 0.5), Normal(1.5, 0.7)),
    (Normal(0, 2), Normal(0, 1.8)),
    (Exponential(1), Exponential(3)),
    (Exponential(2), Exponential(0.7)),
    (Exponential(0.3), Exponential(0.31)),
]


@pytest.mark.parametrize("p,q", PAIRS)
def test_closed_form_kl_matches_quadrature(p, q):
    closed = kl_closed_form(p, q)
    assert alpha_divergence(1.0, p, q) == pytest.approx(closed, rel=1e-8)


def _mp_logpdf(d):
    if isinstance(d, Normal):
        return lambda x: -((x - d.mu) / d.sigma) ** 2 / 2 - mpmath.log(d.sigma) - mpmath.log(2 * mpmath.pi) / 2
    return lambda x: -x / d.nu - mpmath.log(d.nu)


@pytest.mark.parametrize("p,q", PAIRS[:2] + PAIRS[3:5])
def test_continuous_hellinger_and_chi_against_mpmath(p, q):
    lp, lq = _mp_logpdf(p), _mp_logpdf(q)
    lo = -mpmath.inf if isinstance(p, Normal) else 0
    hel = mp_continuous(lambda x: (mpmath.exp(lq(x) / 2) - mpmath.exp(lp(x) / 2)) ** 2, lo, mpmath.inf)
    assert hellinger_sq(p, q) == pytest.approx(hel, rel=1e-8)
    chi = chi_sq(p, q)
    if math.isfinite(chi):
        ref = mp_continuous(lambda x: mpmath.exp(2 * lp(x) - lq(x)), lo, mpmath.inf) - 1
        assert chi == pytest.approx(ref, rel=1e-8)


def test_divergent_chi_square_is_infinite():
    # 2/sigma_p^2 - 1/sigma_q^2 < 0
    assert chi_sq(Normal(0, 2), Normal(0, 1)) == math.inf
    assert chi_sq(Exponential(3), Exponential(1)) == math.inf
    assert alpha_divergence(-1.0, Exponential(1), Exponential(3)) == math.inf


def test_generic_density_kl_against_closed_form():
    p = GenericDensity(lambda x: math.exp(-x / 2) / 2, 0.0, math.inf, bulk=(2.0, 20.0))
    q = Exponential(1.0)
    assert kl_exact(p, q) == pytest.approx(kl_exact(Exponential(2.0), q), rel=1e-8)


@pytest.mark.parametrize("p,q", PAIRS[:2] + PAIRS[3:5])
def test_consistency_routes(p, q):
    assert hellinger_sq(p, q) == pytest.approx(0.5 * alpha_divergence(0.5, p, q), abs=1e-10)
    chi = chi_sq(p, q)
    if math.isfinite(chi):
        assert chi == pytest.approx(2 * alpha_divergence(2.0, p, q), abs=1e-10)


# --- properties ----------------------------------------------------------------

probs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8)


@st.composite
def discrete_pairs(draw):
    w1 = draw(probs)
    w2 = draw(st.lists(st.floats(0.01, 1.0), min_size=len(w1), max_size=len(w1)))
    support = tuple(float(k) for k in range(len(w1)))
    p = np.array(w1) / sum(w1)
    q = np.array(w2) / sum(w2)
    return DiscreteFinite(support, tuple(p)), DiscreteFinite(support, tuple(q))


@settings(max_examples=200, deadline=None)
@given(discrete_pairs(), st.sampled_from(ALPHAS))
def test_alpha_nonnegative_and_zero_on_diagonal(pair, alpha):
    p, q = pair
    assert alpha_divergence(alpha, p, q) >= -1e-12
    assert abs(alpha_divergence(alpha, p, p)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(discrete_pairs())
def test_discrete_route_consistency(pair):
    p, q = pair
    assert hellinger_sq(p, q) == pytest.approx(0.5 * alpha_divergence(0.5, p, q), abs=1e-10)
    assert chi_sq(p, q) == pytest.approx(2 * alpha_divergence(2.0, p, q), abs=1e-10)


@pytest.mark.parametrize("dist", [Normal(0.3, 1.2), Exponential(1.4)])
@pytest.mark.parametrize("alpha", ALPHAS)
def test_continuous_diagonal_is_zero(dist, alpha):
    assert abs(alpha_divergence(alpha, dist, dist)) <= 1e-12
