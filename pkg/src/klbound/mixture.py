"""The mixture path r(x; t) = (1 - t) p(x) + t q(x) between two distributions.

Besides evaluating the path, this module carries numerical checks of the
identities that hold along it:

* d/dt D_alpha(P || R_t) = ((1 - alpha) D_alpha + (1 + alpha) D_{alpha+1}) / t
* d/dt KL(P || R_t) = t I(t), with I(t) the Fisher information of the path
* bound(theta, theta + d) / d^2 -> psi'(theta)^2 / (2 Var_P f) as d -> 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bound import kl_lower_bound
from .divcore import (
    DEFAULT_QUAD,
    IDENTITY,
    Bernoulli,
    DiscreteFinite,
    Exponential,
    FoI,
    GenericDensity,
    MomentSummary,
    Normal,
    QuadratureSpec,
    aligned_pmfs,
    alpha_divergence,
    check_common_support,
    integrate_1d,
    kl_exact,
    moments,
)
from .errors import KLBoundError

PSI_STEP = 1e-6


def _check_t(t, lo=0.0, hi=1.0):
    t = float(t)
    if not lo <= t <= hi:
        raise KLBoundError(f"t must lie in [{lo}, {hi}], got {t!r}", field="t")
    return t


@dataclass(frozen=True)
class MixturePath:
    p: object
    q: object

    def __post_init__(self):
        object.__setattr__(self, "kind", check_common_support(self.p, self.q))

    @property
    def discrete(self) -> bool:
        return self.kind == "discrete"


def mixture_at(path: MixturePath, t: float, quad: QuadratureSpec = DEFAULT_QUAD):
    """The distribution R_t; exactly P at t = 0 and Q at t = 1."""
    t = _check_t(t)
    if t == 0.0:
        return path.p
    if t == 1.0:
        return path.q
    if path.discrete:
        support, pp, qq = aligned_pmfs(path.p, path.q)
        return DiscreteFinite(tuple(support), tuple((1.0 - t) * pp + t * qq))
    p, q = path.p, path.q
    lo, hi = p.domain
    log_w = (math.log1p(-t), math.log(t))
    return GenericDensity(
        lambda x: (1.0 - t) * p.pdf(x) + t * q.pdf(x),
        lo,
        hi,
        bulk=(*p.breakpoints(), *q.breakpoints()),
        quad=quad,
        log_density=lambda x: float(np.logaddexp(log_w[0] + p.logpdf(x), log_w[1] + q.logpdf(x))),
    )


def mixture_moments(m: MomentSummary, t: float):
    """(mean, variance) of f under R_t from the endpoint moments alone."""
    t = _check_t(t)
    gap = m.e_q - m.e_p
    mean = m.e_p + t * gap
    var = t * m.v_q + (1.0 - t) * m.v_p + t * (1.0 - t) * gap * gap
    return mean, var


def fisher_info_along_path(path: MixturePath, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """I(t) = integral of (q - p)^2 / r_t, the Fisher information in t."""
    t = _check_t(t)
    if path.discrete:
        _, pp, qq = aligned_pmfs(path.p, path.q)
        r = (1.0 - t) * pp + t * qq
        return math.fsum((qq - pp) ** 2 / r)
    p, q = path.p, path.q

    def integrand(x):
        px, qx = p.pdf(x), q.pdf(x)
        r = (1.0 - t) * px + t * qx
        return (qx - px) ** 2 / r if r > 0 else 0.0

    lo, hi = p.domain
    return integrate_1d(integrand, lo, hi, quad, (*p.breakpoints(), *q.breakpoints()))


def _central_difference(func, t, h):
    return (func(t + h) - func(t - h)) / (2.0 * h)


def _check_step(t, h):
    h = float(h)
    if not h > 0:
        raise KLBoundError(f"step h must be > 0, got {h!r}", field="h")
    if not h < t < 1.0 - h:
        raise KLBoundError(f"need h < t < 1 - h, got t={t!r}, h={h!r}", field="t")
    return float(t), h


def alpha_recurrence_sides(path: MixturePath, alpha: float, t: float, h: float = 1e-5,
                 quad: QuadratureSpec = DEFAULT_QUAD):
    """(finite-difference derivative, recurrence right-hand side) at t."""
    t, h = _check_step(t, h)
    alpha = float(alpha)

    def div(a, s):
        return alpha_divergence(a, path.p, mixture_at(path, s, quad), quad)

    lhs = _central_difference(lambda s: div(alpha, s), t, h)
    if alpha == 1.0:
        rhs = 2.0 * div(2.0, t) / t
    elif alpha == 0.0:
        rhs = (div(0.0, t) + div(1.0, t)) / t
    else:
        rhs = ((1.0 - alpha) * div(alpha, t) + (1.0 + alpha) * div(alpha + 1.0, t)) / t
    return lhs, rhs


def check_lemma1(path: MixturePath, alpha: float, t: float, h: float = 1e-5,
                 quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Residual of the alpha-recurrence for d/dt D_alpha(P || R_t)."""
    lhs, rhs = alpha_recurrence_sides(path, alpha, t, h, quad)
    return abs(lhs - rhs)


def check_fisher_identity(path: MixturePath, t: float, h: float = 1e-5,
                          quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Residual |d/dt KL(P || R_t) - t I(t)| with a central difference."""
    t, h = _check_step(t, h)
    slope = _central_difference(
        lambda s: alpha_divergence(1.0, path.p, mixture_at(path, s, quad), quad), t, h
    )
    return abs(slope - t * fisher_info_along_path(path, t, quad))


# ---------------------------------------------------------------------------
# Cramer-Rao limit
# ---------------------------------------------------------------------------


def parametric_family(name: str, **fixed) -> Callable[[float], object]:
    """theta -> distribution for the one-parameter families used in limit checks.

    ``normal`` varies the mean (``sigma`` fixed, default 1), ``exponential``
    the mean nu, ``bernoulli`` the success probability.
    """
    name = name.lower()
    if name == "normal":
        sigma = float(fixed.get("sigma", 1.0))
        return lambda theta: Normal(theta, sigma)
    if name == "exponential":
        return lambda theta: Exponential(theta)
    if name == "bernoulli":
        return lambda theta: Bernoulli(theta)
    raise KLBoundError(f"unknown family {name!r}", field="family")


@dataclass(frozen=True)
class CramerRaoRow:
    delta: float
    scaled_bound: float  # bound(theta, theta + delta) / delta^2
    scaled_kl: float     # KL(theta, theta + delta) / delta^2
    target: float        # psi'(theta)^2 / (2 Var_P f)

    @property
    def ratio(self) -> float:
        return self.scaled_bound / self.target


def cramer_rao_limit_check(family, f: FoI = IDENTITY, theta: float = 0.0, deltas=(1e-1, 1e-2, 1e-3),
                           quad: QuadratureSpec = DEFAULT_QUAD) -> list[CramerRaoRow]:
    """Sweep the perturbation size and compare the scaled bound to its limit.

    ``family`` is a name accepted by ``parametric_family`` or a callable
    theta -> distribution. psi' is a central difference of E[f] in theta.
    """
    if isinstance(family, str):
        family = parametric_family(family)
    deltas = [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas):
        raise KLBoundError("deltas must be positive", field="deltas")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise KLBoundError("deltas must be strictly decreasing", field="deltas")
    base = family(theta)
    e_p, v_p = moments(base, f, quad)
    psi_prime = (moments(family(theta + PSI_STEP), f, quad)[0]
                 - moments(family(theta - PSI_STEP), f, quad)[0]) / (2.0 * PSI_STEP)
    target = psi_prime ** 2 / (2.0 * v_p)
    rows = []
    for d in deltas:
        other = family(theta + d)
        e_q, v_q = moments(other, f, quad)
        value = kl_lower_bound(MomentSummary(e_p, e_q, v_p, v_q)).value
        rows.append(CramerRaoRow(d, value / d ** 2, kl_exact(base, other, quad) / d ** 2, target))
    return rows
