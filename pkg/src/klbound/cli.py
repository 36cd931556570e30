"""Command-line interface: ``klbound {bound,exact,sweep,check}``.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import checks
from .bound import kl_lower_bound
from .divcore import (
    Bernoulli,
    DiscreteFinite,
    Exponential,
    IDENTITY,
    SQUARE,
    MomentSummary,
    Normal,
    alpha_divergence,
    chi_sq,
    hellinger_sq,
    kl_closed_form,
    kl_exact,
)
from .errors import KLBoundError
from .estimate import FoIBank, bound_from_samples, ingest

FLAG_FOR_FIELD = {
    "e_p": "--ep", "e_q": "--eq", "v_p": "--vp", "v_q": "--vq",
    "probs": "--p/--q", "support": "--support", "p": "--p/--q",
    "mu": "--mu", "sigma": "--sigma", "nu": "--nu", "foi": "--foi",
}

SWEEP_DEFAULTS = {
    "normal-mean-shift": (0.0, 5.0),
    "normal-scale": (0.2, 5.0),
    "exponential-scale": (0.2, 5.0),
}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def _floats(text: str, flag: str, count: int | None = None) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise UsageError(f"{flag}: expected {count} values, got {len(values)}")
    return values


# ---------------------------------------------------------------------------
# bound
# ---------------------------------------------------------------------------


def cmd_bound(args) -> int:
    stats = [args.ep, args.eq, args.vp, args.vq]
    files = [args.p_file, args.q_file]
    if any(v is not None for v in stats) and any(v is not None for v in files):
        raise UsageError("choose either --ep/--eq/--vp/--vq or --p-file/--q-file, not both")
    if all(v is None for v in files):
        missing = [flag for flag, v in zip(("--ep", "--eq", "--vp", "--vq"), stats) if v is None]
        if missing:
            raise UsageError(f"missing {', '.join(missing)}")
        result = kl_lower_bound(MomentSummary(*stats))
        if args.json:
            print(json.dumps(result.as_dict()))
        else:
            for key, value in result.as_dict().items():
                print(f"{key}: {value if isinstance(value, str) else fmt(value)}")
        return 0
    if None in files:
        raise UsageError("--p-file and --q-file must be given together")

    read = dict(fmt=args.format, column=args.column, delimiter=args.delimiter)
    xs, ys = ingest(args.p_file, **read), ingest(args.q_file, **read)
    report = bound_from_samples(xs, ys, FoIBank.parse(args.foi), ddof=args.ddof)
    if args.json:
        for e in report.entries:
            record = {"foi": e.foi.name}
            if e.ok:
                record.update(e.result.as_dict())
                record.update(std_error=e.std_error, e_p=e.p_moments.mean, e_q=e.q_moments.mean,
                              v_p=e.p_moments.variance_ddof(args.ddof),
                              v_q=e.q_moments.variance_ddof(args.ddof),
                              n_p=e.p_moments.count, n_q=e.q_moments.count)
            else:
                record["error"] = e.error
            print(json.dumps(record))
        print(json.dumps({"max_bound": report.max_bound, "best_foi": report.best.foi.name}))
        return 0
    # poly names contain commas, so let csv quote them
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["foi", "value", "std_error", "e_p", "e_q", "v_p", "v_q", "regime"])
    for e in report.entries:
        if e.ok:
            out.writerow([e.foi.name, fmt(e.result.value), fmt(e.std_error),
                          fmt(e.p_moments.mean), fmt(e.q_moments.mean),
                          fmt(e.p_moments.variance_ddof(args.ddof)),
                          fmt(e.q_moments.variance_ddof(args.ddof)), e.result.regime.value])
        else:
            out.writerow([e.foi.name, f"error: {e.error}"])
    print(f"max_bound: {fmt(report.max_bound)} ({report.best.foi.name})")
    return 0


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------


def _pair_from_args(args):
    family = args.family
    if family == "discrete":
        if args.p is None or args.q is None:
            raise UsageError("discrete needs --p and --q")
        pp, qq = _floats(args.p, "--p"), _floats(args.q, "--q")
        if len(pp) != len(qq):
            raise UsageError("--p and --q must have the same length")
        support = (_floats(args.support, "--support", len(pp)) if args.support
                   else [float(k) for k in range(1, len(pp) + 1)])
        return DiscreteFinite(tuple(support), tuple(pp)), DiscreteFinite(tuple(support), tuple(qq))
    if family == "bernoulli":
        if args.p is None or args.q is None:
            raise UsageError("bernoulli needs --p and --q")
        return Bernoulli(_floats(args.p, "--p", 1)[0]), Bernoulli(_floats(args.q, "--q", 1)[0])
    if family == "normal":
        if args.mu is None or args.sigma is None:
            raise UsageError("normal needs --mu and --sigma")
        mu, sigma = _floats(args.mu, "--mu", 2), _floats(args.sigma, "--sigma", 2)
        return Normal(mu[0], sigma[0]), Normal(mu[1], sigma[1])
    if args.nu is None:
        raise UsageError("exponential needs --nu")
    nu = _floats(args.nu, "--nu", 2)
    return Exponential(nu[0]), Exponential(nu[1])


def cmd_exact(args) -> int:
    p, q = _pair_from_args(args)
    record = {"divergence": args.divergence, "family": args.family}
    if args.divergence == "kl":
        record["value"] = kl_exact(p, q)
        closed = kl_closed_form(p, q)
        if closed is not None:
            numeric = alpha_divergence(1.0, p, q)
            record.update(closed_form=closed, numeric=numeric, discrepancy=abs(closed - numeric))
    elif args.divergence == "hellinger":
        record["value"] = hellinger_sq(p, q)
    elif args.divergence == "chi2":
        record["value"] = chi_sq(p, q)
    else:
        if args.alpha is None:
            raise UsageError("alpha needs --alpha")
        record["alpha"] = args.alpha
        record["value"] = alpha_divergence(args.alpha, p, q)
    if args.json:
        print(json.dumps(record))
    else:
        print(fmt(record["value"]))
        for key in ("closed_form", "numeric", "discrepancy"):
            if key in record:
                print(f"{key}: {fmt(record[key])}")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def sweep_rows(family: str, start: float, stop: float, steps: int):
    """(beta, KL, bound, ratio-or-None) rows for one of the three sweeps."""
    if not start < stop:
        raise UsageError(f"--start must be < --stop, got {start} and {stop}")
    if steps < 2:
        raise UsageError(f"--steps must be >= 2, got {steps}")
    if family != "normal-mean-shift" and start <= 0:
        raise UsageError(f"--start: {family} needs beta > 0")
    rows = []
    for beta in np.linspace(start, stop, steps):
        beta = float(beta)
        if family == "normal-mean-shift":
            p, q, f = Normal(0.0, 1.0), Normal(beta, 1.0), IDENTITY
        elif family == "normal-scale":
            p, q, f = Normal(0.0, 1.0), Normal(0.0, beta), SQUARE
        else:
            p, q, f = Exponential(1.0), Exponential(beta), IDENTITY
        kl = kl_exact(p, q)
        bound = kl_lower_bound(MomentSummary.from_distributions(p, q, f)).value
        rows.append((beta, kl, bound, bound / kl if kl > 0 else None))
    return rows


def write_sweep(rows, out) -> None:
    out.write("beta,kl,bound,ratio\n")
    for beta, kl, bound, ratio in rows:
        out.write(f"{fmt(beta)},{fmt(kl)},{fmt(bound)},{'' if ratio is None else fmt(ratio)}\n")


def cmd_sweep(args) -> int:
    lo, hi = SWEEP_DEFAULTS[args.family]
    start = lo if args.start is None else args.start
    stop = hi if args.stop is None else args.stop
    rows = sweep_rows(args.family, start, stop, args.steps)
    if args.output == "-":
        write_sweep(rows, sys.stdout)
        return 0
    try:
        with open(args.output, "w", newline="") as fh:
            write_sweep(rows, fh)
    except OSError as exc:
        raise UsageError(f"--output: cannot write {args.output}: {exc.strerror}") from None
    return 0


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    results = checks.run_suites(args.suite)
    for r in results:
        if args.json:
            print(json.dumps({"suite": r.name, "passed": r.passed, "worst": r.worst,
                              "threshold": r.threshold, "seconds": r.seconds}))
        else:
            print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klbound", description="Moment-based KL divergence lower bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="KL lower bound from moments or from two sample files")
    for name in ("ep", "eq", "vp", "vq"):
        b.add_argument(f"--{name}", type=float)
    b.add_argument("--p-file", help="samples from P ('-' for stdin)")
    b.add_argument("--q-file", help="samples from Q")
    b.add_argument("--foi", default="identity,square", help="e.g. identity,square,poly:0,1,1")
    b.add_argument("--format", choices=("lines", "column"), default="lines")
    b.add_argument("--column", type=int, default=1, help="1-based column for --format column")
    b.add_argument("--delimiter", default=",")
    b.add_argument("--ddof", type=int, choices=(0, 1), default=0,
                   help="0: population variance (default), 1: unbiased")
    b.add_argument("--json", action="store_true", help="one JSON record per line")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("exact", help="exact divergence between two distributions")
    e.add_argument("divergence", choices=("kl", "hellinger", "chi2", "alpha"))
    e.add_argument("family", choices=("discrete", "bernoulli", "normal", "exponential"))
    e.add_argument("--p", help="pmf of P (discrete) or success probability (bernoulli)")
    e.add_argument("--q")
    e.add_argument("--support", help="atoms for discrete pmfs (default 1..n)")
    e.add_argument("--mu", help="mu_P,mu_Q")
    e.add_argument("--sigma", help="sigma_P,sigma_Q")
    e.add_argument("--nu", help="nu_P,nu_Q")
    e.add_argument("--alpha", type=float)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_exact)

    s = sub.add_parser("sweep", help="tables of KL and bound against beta")
    s.add_argument("family", choices=tuple(SWEEP_DEFAULTS))
    s.add_argument("--start", type=float)
    s.add_argument("--stop", type=float)
    s.add_argument("--steps", type=int, default=200)
    s.add_argument("--output", "-o", default="-")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="run verification suites")
    c.add_argument("suite", nargs="?", default="all", choices=("all", *checks.SUITES))
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KLBoundError as exc:
        flag = FLAG_FOR_FIELD.get(exc.field, exc.field)
        prefix = f"{flag}: " if flag else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
