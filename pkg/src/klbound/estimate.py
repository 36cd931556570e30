"""Plug-in KL lower bounds from two raw samples.

Each function of interest in a bank is evaluated on both samples, its
moments are accumulated in one pass, and the KL bound is computed from the
resulting sample moments. Every bank member bounds the same divergence, so
the largest value is reported as the headline bound.

The plug-in value estimates a lower bound; it is not a certified bound at
finite N. Delta-method standard errors are reported next to it.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from .bound import BoundResult, kl_lower_bound
from .divcore import IDENTITY, SQUARE, FoI, MomentSummary
from .errors import InapplicableError, InputError, KLBoundError


@dataclass(frozen=True)
class SampleMoments:
    count: int
    mean: float
    m2: float  # sum of squared deviations
    m3: float = 0.0
    m4: float = 0.0

    def __post_init__(self):
        if self.count < 2:
            raise KLBoundError("at least two values are needed for a variance", field="count")

    @property
    def variance(self) -> float:
        """Population (1/N) variance."""
        return max(self.m2, 0.0) / self.count

    def variance_ddof(self, ddof: int = 0) -> float:
        return max(self.m2, 0.0) / (self.count - ddof)

    @property
    def mean_se(self) -> float:
        return math.sqrt(self.variance / self.count)

    @property
    def variance_se(self) -> float:
        mu2 = self.variance
        mu4 = self.m4 / self.count
        return math.sqrt(max(mu4 - mu2 * mu2, 0.0) / self.count)

    def covariance(self):
        """Asymptotic covariance matrix of (sample mean, sample variance)."""
        n = self.count
        mu2, mu3, mu4 = self.m2 / n, self.m3 / n, self.m4 / n
        return np.array([[mu2, mu3], [mu3, max(mu4 - mu2 * mu2, 0.0)]]) / n


def _first_nonfinite(arr) -> int | None:
    bad = np.flatnonzero(~np.isfinite(arr))
    return int(bad[0]) if bad.size else None


def stream_moments(values, f: FoI = IDENTITY) -> SampleMoments:
    """One-pass moments of f(values).

    Raises InputError naming the (1-based) row of a non-finite value and
    InapplicableError when f is constant on the data.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.shape[0] < 2:
        raise InputError(f"need at least 2 values, got {arr.shape[0]}")
    k = _first_nonfinite(arr)
    if k is not None:
        raise InputError(f"non-finite value at row {k + 1}", row=k + 1, content=repr(arr[k]))
    with np.errstate(over="ignore", invalid="ignore"):
        fx = np.asarray(f(arr), dtype=np.float64)
    k = _first_nonfinite(fx)
    if k is not None:
        raise InputError(f"{f.name} overflows at row {k + 1}", row=k + 1, content=repr(arr[k]))
    n, mean, m2, m3, m4 = _kernels.welford(fx)
    if m2 <= 0.0:
        raise InapplicableError(f"{f.name} has zero variance on the data (constant, or spread below float range)")
    return SampleMoments(int(n), float(mean), float(m2), float(m3), float(m4))


@dataclass(frozen=True)
class FoIBank:
    members: tuple = (IDENTITY, SQUARE)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise KLBoundError("the FoI bank is empty", field="foi")
        object.__setattr__(self, "members", members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @classmethod
    def parse(cls, text: str) -> FoIBank:
        """Parse e.g. ``identity,square,poly:0,1,1``.

        Numeric tokens extend the coefficient list of the preceding
        ``poly:`` entry.
        """
        specs: list[str] = []
        for token in (t.strip() for t in text.split(",")):
            if not token:
                continue
            if specs and specs[-1].startswith("poly:") and _is_number(token):
                specs[-1] += "," + token
            else:
                specs.append(token)
        return cls(tuple(FoI.parse(s) for s in specs))


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


DEFAULT_BANK = FoIBank()


@dataclass(frozen=True)
class FoIBound:
    foi: FoI
    p_moments: SampleMoments | None = None
    q_moments: SampleMoments | None = None
    result: BoundResult | None = None
    std_error: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass(frozen=True)
class SampleBoundReport:
    entries: tuple
    ddof: int = 0
    best: FoIBound = field(init=False)

    def __post_init__(self):
        usable = [e for e in self.entries if e.ok]
        if not usable:
            reasons = "; ".join(f"{e.foi.name}: {e.error}" for e in self.entries)
            raise InapplicableError(f"no function of interest is applicable ({reasons})")
        object.__setattr__(self, "best", max(usable, key=lambda e: e.result.value))

    @property
    def max_bound(self) -> float:
        return self.best.result.value


def _bound_std_error(mp: SampleMoments, mq: SampleMoments, summary: MomentSummary) -> float:
    """Delta-method standard error of the plug-in bound."""
    x = np.array([summary.e_p, summary.e_q, summary.v_p, summary.v_q])
    grad = np.empty(4)
    for i in range(4):
        h = 1e-6 * max(abs(x[i]), math.sqrt(summary.v_p + summary.v_q))
        if i >= 2:
            h = min(h, 0.5 * x[i])
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (kl_lower_bound(MomentSummary(*up)).value
                   - kl_lower_bound(MomentSummary(*down)).value) / (2.0 * h)
    cp, cq = mp.covariance(), mq.covariance()
    # samples are independent; (mean, var) covary within each sample
    var = (grad[[0, 2]] @ cp @ grad[[0, 2]]) + (grad[[1, 3]] @ cq @ grad[[1, 3]])
    return math.sqrt(max(var, 0.0))


def bound_from_samples(xs, ys, bank: FoIBank = DEFAULT_BANK, ddof: int = 0) -> SampleBoundReport:
    """Plug-in KL(P || Q) lower bounds with xs ~ P and ys ~ Q.

    FoIs whose moments are unusable are kept in the report with their error
    message. ``ddof=1`` switches to the unbiased 1/(N-1) variance.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    entries = []
    for f in bank:
        try:
            mp = stream_moments(xs, f)
            mq = stream_moments(ys, f)
        except KLBoundError as exc:
            entries.append(FoIBound(f, error=str(exc)))
            continue
        summary = MomentSummary(mp.mean, mq.mean, mp.variance_ddof(ddof), mq.variance_ddof(ddof))
        result = kl_lower_bound(summary)
        entries.append(FoIBound(f, mp, mq, result, _bound_std_error(mp, mq, summary)))
    return SampleBoundReport(tuple(entries), ddof)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def _open(source):
    if source == "-":
        return sys.stdin, False
    if isinstance(source, (str, Path)):
        try:
            return open(source, newline=""), True
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror}") from exc
    return source, False


def iter_values(source, fmt: str = "lines", column: int = 1, delimiter: str = ",") -> Iterator[float]:
    """Stream floats from a path, ``-`` (stdin) or an open text stream.

    ``fmt`` is ``lines`` (one value per line) or ``column`` (1-based
    ``column`` of ``delimiter``-separated rows). Blank lines are skipped.
    """
    if fmt not in ("lines", "column"):
        raise InputError(f"unknown input format {fmt!r}")
    if fmt == "column" and column < 1:
        raise InputError(f"column index is 1-based, got {column}")
    handle, close = _open(source)
    try:
        rows: Iterable = (
            enumerate(handle, start=1)
            if fmt == "lines"
            else enumerate(csv.reader(handle, delimiter=delimiter), start=1)
        )
        for lineno, row in rows:
            if fmt == "lines":
                text = row.strip()
                if not text:
                    continue
            else:
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) < column:
                    raise InputError(f"row {lineno} has no column {column}: {delimiter.join(row)!r}",
                                     row=lineno, content=delimiter.join(row))
                text = row[column - 1].strip()
            try:
                yield float(text)
            except ValueError:
                raise InputError(f"cannot parse row {lineno}: {text!r}", row=lineno, content=text) from None
    finally:
        if close:
            handle.close()


def ingest(source, fmt: str = "lines", column: int = 1, delimiter: str = ",") -> np.ndarray:
    """Read a whole dataset into an array; see ``iter_values``."""
    values = np.fromiter(iter_values(source, fmt, column, delimiter), dtype=np.float64)
    if values.size == 0:
        raise InputError(f"no values in {source if isinstance(source, (str, Path)) else 'stream'}")
    return values


def ingest_text(text: str, **kwargs) -> np.ndarray:
    return ingest(io.StringIO(text), **kwargs)
