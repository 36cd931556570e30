"""Moment-based lower bounds on KL, chi-square and squared Hellinger.

All three bounds take a ``MomentSummary``: the mean and variance of one
function of interest f under P and under Q.

The KL bound is

    (A - 2 V_P) / D * atanh(D / A) + 1/2 log(V_P / V_Q),
    A = (E_Q - E_P)^2 + V_P + V_Q,   D = sqrt(A^2 - 4 V_P V_Q),

and equals the integral over t in [0, 1] of

    t a / (t (1 - t) a + (1 - t) V_P + t V_Q),   a = (E_Q - E_P)^2,

which ``kl_lower_bound_integral`` evaluates numerically as an oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels
from .divcore import (
    DEFAULT_QUAD,
    FoI,
    MomentSummary,
    QuadratureSpec,
    aligned_pmfs,
    is_discrete,
)
from .errors import KLBoundError, QuadratureError

SERIES_THRESHOLD = _kernels.SERIES_THRESHOLD


class Regime(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    SERIES_SMALL_D = "SeriesSmallD"


@dataclass(frozen=True)
class BoundResult:
    value: float
    a_term: float
    d_term: float
    ratio: float
    regime: Regime
    log_term: float

    def as_dict(self):
        return {
            "value": self.value,
            "A": self.a_term,
            "D": self.d_term,
            "D_over_A": self.ratio,
            "regime": self.regime.value,
            "log_term": self.log_term,
        }


def _atanh_over_d(a, v_p, v_q, d, big_a, regime):
    """atanh(D/A) / D for either regime.

    atanh(D/A) is rewritten as log1p((a + (sqrt V_P - sqrt V_Q)^2 + D) / (2 sqrt(V_P V_Q))),
    which has no cancellation as D/A -> 1 or D/A -> 0.
    """
    if regime is Regime.SERIES_SMALL_D:
        x2 = (d / big_a) ** 2
        return (1.0 + x2 / 3.0 + x2 * x2 / 5.0) / big_a
    sp, sq = math.sqrt(v_p), math.sqrt(v_q)
    return math.log1p((a + (sp - sq) ** 2 + d) / (2.0 * sp * sq)) / d


def _half_log_ratio(v_p, v_q):
    # log1p only near V_P = V_Q; near -1 it would amplify round-off
    if abs(v_p - v_q) <= 0.5 * min(v_p, v_q):
        return 0.5 * math.log1p((v_p - v_q) / v_q)
    return 0.5 * math.log(v_p / v_q)


def kl_lower_bound(m: MomentSummary, regime: Regime | None = None) -> BoundResult:
    """Lower bound on KL(P || Q) in nats from the four moments in ``m``.

    The regime is picked automatically (series when D/A < 1e-6); passing
    ``regime`` forces one, which is only meant for continuity checks.
    """
    a = (m.e_q - m.e_p) ** 2
    v_p, v_q = m.v_p, m.v_q
    big_a = a + v_p + v_q
    # A^2 - 4 V_P V_Q expanded into a sum of nonnegative terms
    d = math.sqrt(a * a + 2.0 * a * (v_p + v_q) + (v_p - v_q) ** 2)
    ratio = d / big_a
    if regime is None:
        regime = Regime.SERIES_SMALL_D if ratio < SERIES_THRESHOLD else Regime.CLOSED_FORM
    if regime is Regime.CLOSED_FORM and d == 0.0:
        raise KLBoundError("closed form is 0/0 at D = 0; use the series regime")
    factor = _atanh_over_d(a, v_p, v_q, d, big_a, regime)
    log_term = _half_log_ratio(v_p, v_q)
    value = (a + v_q - v_p) * factor + log_term
    return BoundResult(value, big_a, d, ratio, regime, log_term)


def kl_lower_bound_batch(e_p, e_q, v_p, v_q):
    """Vectorised ``kl_lower_bound(...).value`` over broadcastable arrays.

    Inputs are not validated; callers must supply positive finite variances.
    """
    return _kernels.kl_bound_batch(e_p, e_q, v_p, v_q)


def bound_integrand(t, m: MomentSummary):
    a = (m.e_q - m.e_p) ** 2
    return t * a / (t * (1.0 - t) * a + (1.0 - t) * m.v_p + t * m.v_q)


def kl_lower_bound_integral(m: MomentSummary, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Numerically integrate the bound's integrand over t in [0, 1]."""
    a = (m.e_q - m.e_p) ** 2
    if a == 0.0:
        return 0.0
    # the integrand rises over a width ~V_P/(a+V_Q) near t=0 and falls
    # over ~V_Q/(a+V_P) near t=1
    points = [w for w in (m.v_p / (a + m.v_q), 1.0 - m.v_q / (a + m.v_p)) if 0.0 < w < 1.0]
    out = integrate.quad(bound_integrand, 0.0, 1.0, args=(m,), epsabs=quad.atol,
                         epsrel=quad.rtol, limit=quad.limit, points=points or None,
                         full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and not err <= max(quad.atol, quad.rtol * abs(value)):
        raise QuadratureError(f"bound integral did not converge: {out[3]}")
    return value


def hcrb_chi2_lower_bound(m: MomentSummary) -> float:
    """Chi-square lower bound (E_Q - E_P)^2 / V_Q."""
    return (m.e_q - m.e_p) ** 2 / m.v_q


def hellinger_lower_bound(m: MomentSummary) -> float:
    """Squared-Hellinger lower bound a / (2 (V_P + V_Q + a/2)), a = (E_Q - E_P)^2."""
    a = (m.e_q - m.e_p) ** 2
    return a / (2.0 * (m.v_p + m.v_q) + a)


@dataclass(frozen=True)
class EqualityReport:
    holds: bool
    t_grid: tuple
    spreads: tuple   # max - min of the per-atom ratio at each t
    constants: tuple  # the common ratio C(t) (midrange) at each t
    tol: float

    def __bool__(self):
        return self.holds


def equality_condition_check(p, q, f: FoI, t_grid, tol: float = 1e-9) -> EqualityReport:
    """Test whether the KL bound is attained for discrete P, Q and FoI f.

    At each t the ratio (q - p) / r_t divided by f - E_P - t (E_Q - E_P)
    must be the same for every atom. Atoms where the FoI factor vanishes
    (|.| <= 1e-12) instead need a vanishing numerator.
    """
    if not (is_discrete(p) and is_discrete(q)):
        raise KLBoundError("equality check is only defined for discrete distributions")
    t_grid = tuple(float(t) for t in t_grid)
    if not t_grid:
        raise KLBoundError("t_grid is empty", field="t_grid")
    if any(not 0.0 <= t <= 1.0 for t in t_grid):
        raise KLBoundError("t_grid values must lie in [0, 1]", field="t_grid")
    support, pp, qq = aligned_pmfs(p, q)
    if len(support) < 2:
        raise KLBoundError("equality check needs at least two atoms", field="support")
    fx = np.asarray(f(support), dtype=np.float64)
    e_p, e_q = float(pp @ fx), float(qq @ fx)

    holds = True
    spreads, constants = [], []
    for t in t_grid:
        r = (1.0 - t) * pp + t * qq
        num = (qq - pp) / r
        den = fx - e_p - t * (e_q - e_p)
        zero = np.abs(den) <= 1e-12
        if np.any(np.abs(num[zero]) > tol):
            holds = False
        ratios = num[~zero] / den[~zero]
        if ratios.size:
            lo, hi = float(ratios.min()), float(ratios.max())
            spread = hi - lo
            constants.append(0.5 * (lo + hi))
            if spread > tol * max(1.0, abs(lo), abs(hi)):
                holds = False
        else:
            spread = 0.0
            constants.append(0.0)
        spreads.append(spread)
    return EqualityReport(holds, t_grid, tuple(spreads), tuple(constants), tol)
