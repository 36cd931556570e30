"""Distributions, functions of interest, quadrature and exact divergences.

Supported distributions are finite discrete pmfs (``DiscreteFinite``,
``Bernoulli``) and one-dimensional densities (``Normal``, ``Exponential``,
``GenericDensity``). Divergences between discrete pairs are exact finite
sums; between continuous pairs they are adaptive quadratures, except for
the closed-form KL divergences of same-family pairs.

Every alpha-divergence is evaluated in f-divergence form, i.e. with the
pointwise nonnegative integrand

    (p^a q^(1-a) - a p - (1-a) q) / (a (a - 1)),

which integrates to the textbook definition because p and q both have unit
mass, and which vanishes identically when p == q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import KLBoundError, QuadratureError, SupportMismatchError

SUM_TOL = 1e-12
# Breakpoints for splitting infinite domains are placed this many scale
# units away from each distribution's centre.
_BULK_WIDTH = 10.0


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    rtol: float = 1e-10
    atol: float = 1e-12
    limit: int = 2000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise KLBoundError("quadrature tolerances must be positive", field="rtol")
        if int(self.limit) < 1:
            raise KLBoundError("max subdivisions must be >= 1", field="limit")


DEFAULT_QUAD = QuadratureSpec()


def integrate_1d(func: Callable[[float], float], lower: float, upper: float,
                 quad: QuadratureSpec = DEFAULT_QUAD, breaks: Sequence[float] = ()) -> float:
    """Integrate ``func`` over [lower, upper], splitting at ``breaks``.

    Infinite end pieces are handled by QUADPACK's change of variables.
    Raises QuadratureError when a piece misses its tolerance.
    """
    cuts = sorted({float(b) for b in breaks if lower < b < upper and math.isfinite(b)})
    edges = [lower, *cuts, upper]
    pieces = len(edges) - 1
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == hi:
            continue
        out = integrate.quad(func, lo, hi, epsabs=quad.atol / pieces, epsrel=quad.rtol,
                             limit=quad.limit, full_output=1)
        value, err = out[0], out[1]
        if len(out) > 3:
            allowed = max(quad.atol / pieces, quad.rtol * abs(value))
            if not err <= allowed:
                raise QuadratureError(
                    f"quadrature on [{lo}, {hi}] did not converge "
                    f"(estimate {value!r}, error {err:.3g}): {out[3]}"
                )
        if not math.isfinite(value):
            raise QuadratureError(f"quadrature on [{lo}, {hi}] produced {value!r}")
        total += value
    return total


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise KLBoundError(f"{name} must be finite, got {value!r}", field=name)
    return value


@dataclass(frozen=True)
class DiscreteFinite:
    """A pmf on finitely many distinct real atoms, all with positive mass."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(_finite("support", s) for s in self.support)
        probs = tuple(_finite("probs", p) for p in self.probs)
        if not support:
            raise KLBoundError("a discrete distribution needs at least one atom", field="support")
        if len(support) != len(probs):
            raise KLBoundError(
                f"{len(support)} support points but {len(probs)} probabilities", field="probs"
            )
        if len(set(support)) != len(support):
            raise KLBoundError("support points must be distinct", field="support")
        if any(p <= 0 for p in probs):
            # a zero atom would break the shared-support hypothesis
            raise KLBoundError("probabilities must be strictly positive", field="probs")
        if abs(math.fsum(probs) - 1.0) > SUM_TOL:
            raise KLBoundError(f"probabilities sum to {math.fsum(probs)!r}, not 1", field="probs")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, support):
        n = len(support)
        return cls(tuple(support), (1.0 / n,) * n)

    def as_discrete(self) -> DiscreteFinite:
        return self


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        p = _finite("p", self.p)
        if not 0.0 < p < 1.0:
            raise KLBoundError(f"Bernoulli p must lie in (0, 1), got {p!r}", field="p")
        object.__setattr__(self, "p", p)

    def as_discrete(self) -> DiscreteFinite:
        return DiscreteFinite((0.0, 1.0), (1.0 - self.p, self.p))


class _Continuous:
    """Shared interface of the one-dimensional densities."""

    lower = -math.inf
    upper = math.inf

    @property
    def domain(self):
        return (self.lower, self.upper)

    def pdf(self, x: float) -> float:
        return math.exp(self.logpdf(x))

    def breakpoints(self):
        return ()


@dataclass(frozen=True)
class Normal(_Continuous):
    mu: float
    sigma: float

    def __post_init__(self):
        _finite("mu", self.mu)
        if not _finite("sigma", self.sigma) > 0:
            raise KLBoundError(f"sigma must be > 0, got {self.sigma!r}", field="sigma")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))

    def logpdf(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2.0 * math.pi)

    def breakpoints(self):
        w = _BULK_WIDTH * self.sigma
        return (self.mu - w, self.mu, self.mu + w)


@dataclass(frozen=True)
class Exponential(_Continuous):
    """Exponential law in mean parameterisation: density exp(-x/nu)/nu on x >= 0."""

    nu: float
    lower = 0.0

    def __post_init__(self):
        if not _finite("nu", self.nu) > 0:
            raise KLBoundError(f"nu must be > 0, got {self.nu!r}", field="nu")
        object.__setattr__(self, "nu", float(self.nu))

    def logpdf(self, x):
        if x < 0:
            return -math.inf
        return -x / self.nu - math.log(self.nu)

    def breakpoints(self):
        return (self.nu, _BULK_WIDTH * self.nu)


@dataclass(frozen=True)
class GenericDensity(_Continuous):
    """A user-supplied density on an interval; normalisation is checked."""

    density: Callable[[float], float]
    lower: float = -math.inf
    upper: float = math.inf
    bulk: tuple = ()
    quad: QuadratureSpec = field(default=DEFAULT_QUAD, compare=False)
    # optional log of the density; keeps far tails from underflowing to -inf
    log_density: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.lower < self.upper:
            raise KLBoundError("density domain must have lower < upper", field="domain")
        object.__setattr__(self, "bulk", tuple(float(b) for b in self.bulk))
        mass = integrate_1d(self.density, self.lower, self.upper, self.quad, self.bulk)
        if abs(mass - 1.0) > max(100 * self.quad.rtol, 1e-9):
            raise KLBoundError(f"density integrates to {mass!r}, not 1", field="density")

    def pdf(self, x):
        return float(self.density(x))

    def logpdf(self, x):
        if self.log_density is not None:
            return float(self.log_density(x))
        value = self.pdf(x)
        return math.log(value) if value > 0 else -math.inf

    def breakpoints(self):
        return self.bulk


Distribution = DiscreteFinite | Bernoulli | Normal | Exponential | GenericDensity


def is_discrete(dist) -> bool:
    return isinstance(dist, (DiscreteFinite, Bernoulli))


def aligned_pmfs(p, q):
    """Return (support, p_probs, q_probs) as arrays on a shared sorted support."""
    dp, dq = p.as_discrete(), q.as_discrete()
    if set(dp.support) != set(dq.support):
        raise SupportMismatchError("discrete distributions have different supports")
    support = np.array(sorted(dp.support))
    mp = dict(zip(dp.support, dp.probs))
    mq = dict(zip(dq.support, dq.probs))
    return (support, np.array([mp[s] for s in support]), np.array([mq[s] for s in support]))


def check_common_support(p, q) -> str:
    """Validate that p and q share a support; returns "discrete" or "continuous"."""
    if is_discrete(p) and is_discrete(q):
        aligned_pmfs(p, q)
        return "discrete"
    if is_discrete(p) or is_discrete(q):
        raise SupportMismatchError("cannot compare a discrete and a continuous distribution")
    if p.domain != q.domain:
        raise SupportMismatchError(f"domains differ: {p.domain} vs {q.domain}")
    return "continuous"


# ---------------------------------------------------------------------------
# functions of interest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoI:
    """A polynomial function of interest, coefficients in ascending degree."""

    coefficients: tuple
    name: str = ""

    def __post_init__(self):
        coeffs = tuple(_finite("coefficients", c) for c in self.coefficients)
        if not any(c != 0.0 for c in coeffs[1:]):
            raise KLBoundError("a constant function of interest has zero variance", field="foi")
        object.__setattr__(self, "coefficients", coeffs)
        if not self.name:
            object.__setattr__(self, "name", "poly:" + ",".join(repr(c) for c in coeffs))

    def __call__(self, x):
        # Horner; works for floats and arrays alike
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    @property
    def kind(self) -> str:
        if self.coefficients == (0.0, 1.0):
            return "identity"
        if self.coefficients == (0.0, 0.0, 1.0):
            return "square"
        return "polynomial"

    @classmethod
    def polynomial(cls, coefficients):
        return cls(tuple(coefficients))

    @classmethod
    def parse(cls, text: str) -> FoI:
        """Parse ``identity``, ``square`` or ``poly:c0,c1,...``."""
        text = text.strip().lower()
        if text in ("identity", "x"):
            return IDENTITY
        if text in ("square", "x2", "x^2"):
            return SQUARE
        if text.startswith("poly:"):
            try:
                coeffs = [float(c) for c in text[5:].split(",") if c.strip()]
            except ValueError:
                raise KLBoundError(f"bad polynomial coefficients in {text!r}", field="foi") from None
            return cls.polynomial(coeffs)
        raise KLBoundError(f"unknown function of interest {text!r}", field="foi")


IDENTITY = FoI((0.0, 1.0), "identity")
SQUARE = FoI((0.0, 0.0, 1.0), "square")


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSummary:
    """Mean and variance of one function of interest under P and under Q."""

    e_p: float
    e_q: float
    v_p: float
    v_q: float

    def __post_init__(self):
        for name in ("e_p", "e_q", "v_p", "v_q"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        for name in ("v_p", "v_q"):
            if not getattr(self, name) > 0:
                raise KLBoundError(f"{name} must be > 0, got {getattr(self, name)!r}", field=name)

    @classmethod
    def from_distributions(cls, p, q, f: FoI = IDENTITY, quad: QuadratureSpec = DEFAULT_QUAD):
        e_p, v_p = moments(p, f, quad)
        e_q, v_q = moments(q, f, quad)
        return cls(e_p, e_q, v_p, v_q)


def _closed_form_moments(dist, f):
    kind = f.kind
    if isinstance(dist, Normal):
        mu, s2 = dist.mu, dist.sigma ** 2
        if kind == "identity":
            return mu, s2
        if kind == "square":
            return mu * mu + s2, 2.0 * s2 * s2 + 4.0 * mu * mu * s2
    if isinstance(dist, Exponential):
        nu = dist.nu
        if kind == "identity":
            return nu, nu * nu
        if kind == "square":
            # E[x^2] = 2 nu^2, E[x^4] = 24 nu^4
            return 2.0 * nu * nu, 20.0 * nu ** 4
    return None


def moments(dist, f: FoI = IDENTITY, quad: QuadratureSpec = DEFAULT_QUAD):
    """Return (E[f], Var[f]) under ``dist``.

    Exact for discrete laws and for Normal/Exponential with the identity or
    square; adaptive quadrature otherwise. The variance is the centred
    second moment, so it cannot come out negative.
    """
    if is_discrete(dist):
        d = dist.as_discrete()
        probs = np.array(d.probs)
        fx = np.asarray(f(np.array(d.support)), dtype=np.float64)
        mean = math.fsum(probs * fx)
        var = math.fsum(probs * (fx - mean) ** 2)
    else:
        closed = _closed_form_moments(dist, f)
        if closed is not None:
            mean, var = closed
        else:
            mean, var = quadrature_moments(dist, f, quad)
    if not (math.isfinite(mean) and math.isfinite(var)):
        raise KLBoundError(f"non-finite moment ({mean!r}, {var!r})")
    return float(mean), float(var)


def quadrature_moments(dist, f: FoI = IDENTITY, quad: QuadratureSpec = DEFAULT_QUAD):
    """(E[f], Var[f]) of a continuous distribution by quadrature only."""
    lo, hi = dist.domain
    breaks = dist.breakpoints()
    mean = integrate_1d(lambda x: dist.pdf(x) * f(x), lo, hi, quad, breaks)
    var = integrate_1d(lambda x: dist.pdf(x) * (f(x) - mean) ** 2, lo, hi, quad, breaks)
    return mean, var


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------


def _alpha_terms(alpha, lp, lq):
    """Pointwise f-divergence integrand from log densities (numpy arrays)."""
    p, q = np.exp(lp), np.exp(lq)
    if alpha == 1.0:
        return p * (lp - lq) - p + q
    if alpha == 0.0:
        return q * (lq - lp) - q + p
    return (np.exp(alpha * lp + (1.0 - alpha) * lq) - alpha * p - (1.0 - alpha) * q) / (
        alpha * (alpha - 1.0)
    )


def _alpha_point(alpha, lp, lq):
    """Scalar version of ``_alpha_terms`` tolerant of zero densities."""
    if lp == -math.inf and lq == -math.inf:
        return 0.0
    p, q = math.exp(lp), math.exp(lq)
    if alpha == 1.0:
        if p == 0.0:
            return q
        if lq == -math.inf:
            return math.inf
        return p * (lp - lq) - p + q
    if alpha == 0.0:
        if q == 0.0:
            return p
        if lp == -math.inf:
            return math.inf
        return q * (lq - lp) - q + p
    return (math.exp(alpha * lp + (1.0 - alpha) * lq) - alpha * p - (1.0 - alpha) * q) / (
        alpha * (alpha - 1.0)
    )


def _tilted_breaks(alpha, p, q):
    """Breakpoints around the bulk of p^a q^(1-a) for same-family pairs."""
    if isinstance(p, Normal) and isinstance(q, Normal):
        prec = alpha / p.sigma ** 2 + (1.0 - alpha) / q.sigma ** 2
        if prec > 0:
            centre = (alpha * p.mu / p.sigma ** 2 + (1.0 - alpha) * q.mu / q.sigma ** 2) / prec
            w = _BULK_WIDTH / math.sqrt(prec)
            return (centre - w, centre, centre + w)
    if isinstance(p, Exponential) and isinstance(q, Exponential):
        rate = alpha / p.nu + (1.0 - alpha) / q.nu
        if rate > 0:
            return (_BULK_WIDTH / rate,)
    return ()


def alpha_integral_diverges(alpha, p, q) -> bool:
    """True when the alpha-divergence is +inf for a Normal or Exponential pair."""
    if alpha in (0.0, 1.0):
        return False
    if isinstance(p, Normal) and isinstance(q, Normal):
        return alpha / p.sigma ** 2 + (1.0 - alpha) / q.sigma ** 2 <= 0
    if isinstance(p, Exponential) and isinstance(q, Exponential):
        return alpha / p.nu + (1.0 - alpha) / q.nu <= 0
    return False


def _continuous_integral(point, p, q, quad, alpha):
    lo, hi = p.domain
    breaks = (*p.breakpoints(), *q.breakpoints(), *_tilted_breaks(alpha, p, q))
    return integrate_1d(lambda x: point(p.logpdf(x), q.logpdf(x)), lo, hi, quad, breaks)


def alpha_divergence(alpha: float, p, q, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """D_alpha(P || Q), with dedicated branches at alpha = 0 and alpha = 1.

    Continuous pairs always go through quadrature. Normal and Exponential
    pairs whose integral is known to diverge return ``inf``.
    """
    alpha = float(alpha)
    if check_common_support(p, q) == "discrete":
        _, pp, qq = aligned_pmfs(p, q)
        return math.fsum(_alpha_terms(alpha, np.log(pp), np.log(qq)))
    if alpha_integral_diverges(alpha, p, q):
        return math.inf
    try:
        return _continuous_integral(lambda lp, lq: _alpha_point(alpha, lp, lq), p, q, quad, alpha)
    except OverflowError:
        # finite in exact arithmetic but beyond double range
        return math.inf


def _kl_same_scale(r_minus_1: float) -> float:
    """r - 1 - log r, computed from r - 1 without cancellation near r = 1."""
    return r_minus_1 - math.log1p(r_minus_1)


def kl_closed_form(p, q) -> float | None:
    """Closed-form KL(P || Q) for same-family pairs, or None."""
    if isinstance(p, Normal) and isinstance(q, Normal):
        r_minus_1 = (p.sigma - q.sigma) * (p.sigma + q.sigma) / q.sigma ** 2
        return (q.mu - p.mu) ** 2 / (2.0 * q.sigma ** 2) + 0.5 * _kl_same_scale(r_minus_1)
    if isinstance(p, Exponential) and isinstance(q, Exponential):
        return _kl_same_scale((p.nu - q.nu) / q.nu)
    if isinstance(p, Bernoulli) and isinstance(q, Bernoulli):
        a, b = p.p, q.p
        return a * math.log(a / b) + (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return None


def kl_exact(p, q, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """KL(P || Q) in nats; closed form when one exists."""
    closed = kl_closed_form(p, q)
    if closed is not None:
        return closed
    return alpha_divergence(1.0, p, q, quad)


def hellinger_sq(p, q, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Squared Hellinger distance, integral of (sqrt q - sqrt p)^2."""
    if check_common_support(p, q) == "discrete":
        _, pp, qq = aligned_pmfs(p, q)
        return math.fsum((np.sqrt(qq) - np.sqrt(pp)) ** 2)

    def point(lp, lq):
        return (math.exp(0.5 * lq) - math.exp(0.5 * lp)) ** 2

    return _continuous_integral(point, p, q, quad, 0.5)


def chi_sq(p, q, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Chi-square divergence, integral of (q - p)^2 / q."""
    if check_common_support(p, q) == "discrete":
        _, pp, qq = aligned_pmfs(p, q)
        return math.fsum((qq - pp) ** 2 / qq)
    if alpha_integral_diverges(2.0, p, q):
        return math.inf

    def point(lp, lq):
        if lq == -math.inf:
            return 0.0 if lp == -math.inf else math.inf
        if lp > lq:
            # p >> q in the tails; stay in log space to avoid overflow
            return math.exp(2.0 * lp - lq) * math.expm1(lq - lp) ** 2
        return math.exp(lq) * math.expm1(lp - lq) ** 2

    try:
        return _continuous_integral(point, p, q, quad, 2.0)
    except OverflowError:
        return math.inf
