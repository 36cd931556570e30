"""Seeded verification suites behind ``klbound check``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bound import (
    hcrb_chi2_lower_bound,
    hellinger_lower_bound,
    kl_lower_bound,
    kl_lower_bound_integral,
)
from .divcore import (
    IDENTITY,
    SQUARE,
    Bernoulli,
    DiscreteFinite,
    Exponential,
    MomentSummary,
    Normal,
    chi_sq,
    hellinger_sq,
    kl_exact,
)
from .mixture import MixturePath, check_fisher_identity, check_lemma1, cramer_rao_limit_check

SEED = 20190101
GOLDEN_P = DiscreteFinite.uniform((1.0, 2.0, 3.0, 4.0))
GOLDEN_Q = DiscreteFinite((1.0, 2.0, 3.0, 4.0), (0.1, 0.2, 0.3, 0.4))
T_GRID = tuple(k / 10 for k in range(1, 10))
ALPHA_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)
CR_CASES = (("normal", 0.0), ("exponential", 1.0), ("bernoulli", 0.3))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: worst={self.worst:.3e} "
                f"threshold={self.threshold:.1e} ({self.seconds:.2f}s) {self.detail}").rstrip()


def random_pair(rng):
    """A random (P, Q) pair: discrete with 2-8 atoms, normal or exponential."""
    kind = rng.integers(3)
    if kind == 0:
        k = int(rng.integers(2, 9))
        support = tuple(float(s) for s in np.sort(rng.uniform(-5, 5, k)))
        out = []
        for _ in range(2):
            w = rng.dirichlet(np.ones(k)) + 1e-3
            out.append(DiscreteFinite(support, tuple(w / w.sum())))
        return tuple(out)
    if kind == 1:
        return (Normal(rng.uniform(-3, 3), 10 ** rng.uniform(-0.5, 0.5)),
                Normal(rng.uniform(-3, 3), 10 ** rng.uniform(-0.5, 0.5)))
    return Exponential(10 ** rng.uniform(-0.7, 0.7)), Exponential(10 ** rng.uniform(-0.7, 0.7))


def random_pairs(n=1000, seed=SEED):
    rng = np.random.default_rng(seed)
    return [random_pair(rng) for _ in range(n)]


def random_summaries(n=1000, seed=SEED):
    """Log-uniform variances in [1e-3, 1e3], mean gaps uniform in [0, 10]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        e_p = rng.uniform(-5, 5)
        v_p, v_q = 10 ** rng.uniform(-3, 3, 2)
        out.append(MomentSummary(e_p, e_p + rng.uniform(0, 10), v_p, v_q))
    return out


def bernoulli_grid(n=50):
    grid = np.linspace(0.01, 0.99, n)
    return [(Bernoulli(a), Bernoulli(b)) for a in grid for b in grid if a != b]


def _timed(func):
    def run():
        start = time.perf_counter()
        res = func()
        return SuiteResult(**{**res.__dict__, "seconds": time.perf_counter() - start})
    run.__name__ = func.__name__
    return run


@_timed
def suite_bound_oracle():
    worst = 0.0
    for m in random_summaries():
        closed = kl_lower_bound(m).value
        worst = max(worst, abs(closed - kl_lower_bound_integral(m)) / max(1.0, abs(closed)))
    return SuiteResult("bound-oracle", worst <= 1e-8, worst, 1e-8, "1000 random moment summaries")


@_timed
def suite_alpha_recurrence():
    path = MixturePath(GOLDEN_P, GOLDEN_Q)
    worst = max(check_lemma1(path, a, t) for a in ALPHA_GRID for t in T_GRID)
    return SuiteResult("lemma1", worst <= 1e-6, worst, 1e-6, "alpha-recurrence, h=1e-5")


@_timed
def suite_fisher():
    path = MixturePath(GOLDEN_P, GOLDEN_Q)
    worst = max(check_fisher_identity(path, t) for t in T_GRID)
    return SuiteResult("fisher", worst <= 1e-6, worst, 1e-6, "dKL/dt = t I(t)")


@_timed
def suite_bernoulli():
    worst = max(abs(kl_exact(p, q) - kl_lower_bound(MomentSummary.from_distributions(p, q)).value)
                for p, q in bernoulli_grid())
    return SuiteResult("bernoulli", worst <= 1e-10, worst, 1e-10, "50x50 grid, identity FoI")


@_timed
def suite_cramer_rao():
    worst, monotone = 0.0, True
    for family, theta in CR_CASES:
        errs = [abs(r.ratio - 1.0) for r in cramer_rao_limit_check(family, IDENTITY, theta)]
        monotone &= all(b < a for a, b in zip(errs, errs[1:]))
        worst = max(worst, errs[-1])
    detail = "ratio at 1e-3" + ("" if monotone else "; NOT monotone")
    return SuiteResult("cramer-rao", worst <= 0.01 and monotone, worst, 0.01, detail)


@_timed
def suite_hcrb():
    worst = -np.inf
    for p, q in random_pairs():
        for f in (IDENTITY, SQUARE):
            m = MomentSummary.from_distributions(p, q, f)
            worst = max(worst, hcrb_chi2_lower_bound(m) - chi_sq(p, q),
                        hellinger_lower_bound(m) - hellinger_sq(p, q))
    tight = max(abs(hcrb_chi2_lower_bound(MomentSummary.from_distributions(p, q)) - chi_sq(p, q))
                for p, q in bernoulli_grid())
    ok = worst <= 1e-10 and tight <= 1e-12
    return SuiteResult("hcrb", ok, max(worst, tight), 1e-10,
                       f"bernoulli equality gap {tight:.1e}")


@_timed
def suite_soundness():
    worst = -np.inf
    for p, q in random_pairs():
        kl = kl_exact(p, q)
        for f in (IDENTITY, SQUARE):
            worst = max(worst, kl_lower_bound(MomentSummary.from_distributions(p, q, f)).value - kl)
    return SuiteResult("soundness", worst <= 1e-10, worst, 1e-10, "max(bound - KL), 1000 pairs")


SUITES = {
    "bound-oracle": suite_bound_oracle,
    "lemma1": suite_alpha_recurrence,
    "fisher": suite_fisher,
    "bernoulli": suite_bernoulli,
    "cramer-rao": suite_cramer_rao,
    "hcrb": suite_hcrb,
    "soundness": suite_soundness,
}


def run_suites(name: str = "all") -> list[SuiteResult]:
    names = list(SUITES) if name == "all" else [name]
    return [SUITES[n]() for n in names]
