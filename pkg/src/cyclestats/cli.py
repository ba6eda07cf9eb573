"""Command-line front end.

Every subcommand prints one envelope (JSON by default, CSV with
``--format csv``) on stdout.  Exit status is 0 on success, 1 on a domain
error and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import sys
from collections import defaultdict

from . import exact, montecarlo, tvd
from .asymptotics import bounds as bnd
from .asymptotics.dickman import DEFAULT_STEP, DickmanTable, dickman_rho
from .core import CycleType, DomainError, IndexSet, harmonic, parse_int_set
from .output import Envelope


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _set_text(text: str) -> str:
    """argparse type for set flags: checks the syntax, keeps the text."""
    try:
        parse_int_set(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}") from exc


def _index_set(n: int, text: str | None) -> IndexSet:
    return IndexSet.full(n) if text is None else IndexSet.parse(n, text)


# -- exact -------------------------------------------------------------------------


def _exact(args):
    kind = args.exact_kind
    n = args.n
    params = {"n": n}
    cols = None
    if kind == "cauchy":
        t = CycleType(n, tuple(args.type))
        params["type"] = str(t)
        rows = [{"type": str(t), "probability": exact.cauchy_pmf(t), "class_size": exact.class_size(t)}]
        cols = ["type", "probability", "class_size"]
    elif kind == "goncharov":
        params.update(j=args.j, m=args.m)
        rows = [{"j": args.j, "m": args.m, "probability": exact.goncharov_pmf(n, args.j, args.m)}]
    elif kind in ("joint", "moments"):
        spec = exact.JointSpec(n, tuple(IndexSet.parse(n, s) for s in args.set), tuple(args.counts))
        params.update(sets=[str(s) for s in spec.sets], counts=list(spec.counts))
        if kind == "joint":
            rows = [{"probability": exact.joint_pmf(spec)}]
        else:
            rows = [
                {
                    "moment": exact.binomial_moment(spec),
                    "poisson_moment": exact.moment_upper(spec),
                    "equality_case": exact.moment_equality_case(spec),
                }
            ]
            cols = ["moment", "poisson_moment", "equality_case"]
    elif kind == "stirling":
        row = exact.unsigned_stirling_row(n)
        pmf = exact.total_cycles_pmf(n)
        rows = [{"k": k, "stirling": row[k], "probability": pmf[k]} for k in range(1, n + 1)]
        cols = ["k", "stirling", "probability"]
    elif kind == "gruder":
        I = _index_set(n, args.set)
        params.update(k=args.k, set=str(I))
        rows = [{"k": args.k, "probability": exact.gruder_count(n, args.k, I)}]
    elif kind == "usmall":
        params["m"] = args.m
        rows = [{"m": args.m, "probability": exact.no_small_prob(n, args.m)}]
    elif kind == "fixedset":
        ks = range(0, n + 1) if args.k is None else [args.k]
        if args.k is not None:
            params["k"] = args.k
        rows = [{"k": k, "probability": exact.fixed_set_prob(n, k)} for k in ks]
    elif kind == "divcount":
        rows = [{"expectation": exact.expected_divisor_count(n)}]
    elif kind == "djcdf":
        params.update(j=args.j, k=args.k)
        rows = [{"j": args.j, "k": args.k, "probability": exact.smallest_cycle_cdf(n, args.j, args.k)}]
    elif kind == "conditional":
        I = _index_set(n, args.set)
        params.update(set=str(I), k=args.k)
        pmf = exact.conditional_pmf(n, I, args.k)
        rows = [{"h": h, "probability": w} for h, w in pmf.items()]
        cols = ["h", "probability"]
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(kind)
    if cols is None:
        cols = list(rows[0]) if rows else []
    return Envelope(f"exact {kind}", params, rows, cols)


def _nu(args):
    value = exact.no_large_prob(args.n, args.m)
    row = {"n": args.n, "m": args.m, "probability": value}
    if 2 * args.m >= args.n:
        row["closed_form"] = 1 - (harmonic(args.n) - harmonic(args.m))
    return Envelope("nu", {"n": args.n, "m": args.m}, [row], list(row))


def _dickman(args):
    u_max = max(args.u_max, math.ceil(max(args.u)), 2.0)
    table = DickmanTable.build(u_max, args.step)
    if args.table_out:
        with open(args.table_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(table.to_csv())
    rows = [{"u": u, "rho": dickman_rho(u, table)} for u in args.u]
    params = {"u": list(args.u), "step": table.step, "u_max": table.u_max, "interpolation": table.interpolation}
    return Envelope("dickman", params, rows, ["u", "rho"])


def parse_params(text: str) -> dict:
    """``k=v`` pairs split on commas; a piece without ``=`` continues the
    previous value, so ``I=1-5,8`` stays one value."""
    out: dict = {}
    last = None
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" in piece:
            key, value = piece.split("=", 1)
            last = key.strip()
            out[last] = value.strip()
        elif last is None:
            raise UsageError(f"parameter {piece!r} has no name")
        else:
            out[last] += "," + piece
    return out


def _bounds(args):
    params = parse_params(args.params)
    report = bnd.theorem_bound(args.name, params, verify=args.verify)
    record = report.as_record()
    return Envelope("bounds", {"name": args.name, "params": params, "verify": args.verify}, [record])


def _tvd(args):
    row = {"n": args.n, "k": args.k, "tvd": tvd.tvd_small_cycles(args.n, args.k)}
    if args.oracle:
        row["oracle"] = tvd.tvd_definition_oracle(args.n, args.k)
    return Envelope("tvd", {"n": args.n, "k": args.k, "oracle": args.oracle}, [row], list(row))


def _sample(args):
    config = montecarlo.SampleConfig(args.n, args.trials, args.seed, args.workers)
    base = {"n": args.n, "trials": args.trials, "seed": args.seed}
    if args.event is not None:
        event = montecarlo.parse_event(args.event)
        est = montecarlo.estimate_event(args.n, event, config)
        rec = est.as_record("event", {"n": args.n, "event": event.text}, args.seed)
    elif args.experiment == "uniform-growth":
        xi = args.n if args.xi is None else args.xi
        est = montecarlo.uniform_growth_experiment(args.n, xi, config)
        rec = est.as_record("uniform-growth", {"n": args.n, "xi": xi}, args.seed)
        rec["failure_shape"] = 1.0 / math.log(xi) ** (1.0 / 3.0)
    elif args.experiment == "smallest-cycle":
        theta = math.log(args.n) if args.theta is None else args.theta
        est = montecarlo.smallest_cycle_experiment(args.n, theta, config)
        rec = est.as_record("smallest-cycle", {"n": args.n, "theta": theta}, args.seed)
        rec["failure_shape"] = 1.0 / theta ** (1.0 / 3.0)
    else:
        I = _index_set(args.n, args.set)
        err = montecarlo.clt_empirical_error(args.n, I, config, force_sampling=args.sampled)
        rec = {
            "experiment": "clt",
            "params": {"n": args.n, "set": str(I)},
            "seed": args.seed,
            "trials": args.trials,
            "sup_error": err,
        }
    cols = [c for c in ("experiment", "seed", "trials", "point", "half_width_95", "sup_error", "failure_shape") if c in rec]
    return Envelope("sample", base, [rec], cols)


# -- report ------------------------------------------------------------------------


def _small_grid(n_max: int) -> list:
    rows = []

    def check(name, n, ok):
        rows.append({"check": name, "n": n, "holds": bool(ok)})

    for n in range(1, n_max + 1):
        check("cauchy_normalization", n, sum(exact.cauchy_pmf(t) for t in exact.iter_cycle_types(n)) == 1)
        check(
            "goncharov_matches_joint",
            n,
            all(
                exact.goncharov_pmf(n, j, m)
                == exact.joint_pmf(exact.JointSpec(n, (IndexSet(n, (j,)),), (m,)))
                for j in range(1, n + 1)
                for m in range(n // j + 1)
            ),
        )
        check("divisor_expectation", n, exact.expected_divisor_count(n) == n + 1)
        check(
            "no_large_closed_form",
            n,
            all(
                exact.no_large_prob(n, m) == 1 - (harmonic(n) - harmonic(m))
                for m in range(max(1, math.ceil(n / 2)), n + 1)
            ),
        )
        check(
            "fixed_set_symmetry",
            n,
            all(exact.fixed_set_prob(n, k) == exact.fixed_set_prob(n, n - k) for k in range(n + 1)),
        )
        check(
            "stirling_normalization",
            n,
            sum(w for _, w in exact.total_cycles_pmf(n).items()) == 1,
        )
    return rows


def _bounds_summary(n_max: int, seed: int) -> tuple:
    tally: dict = defaultdict(lambda: [0, 0, 0.0])
    failures = []
    for rep in bnd.bound_suite(n_max, seed):
        t = tally[rep.name]
        t[0] += 1
        if rep.holds is False:
            t[1] += 1
            failures.append(rep.as_record())
        if rep.kind == "upper" and rep.exact_value is not None and rep.bound_value > 0:
            t[2] = max(t[2], rep.exact_value / rep.bound_value)
    rows = [
        {"bound": name, "checked": t[0], "violations": t[1], "max_exact_over_bound": t[2]}
        for name, t in sorted(tally.items())
    ]
    return rows, failures


def _report(args):
    if args.suite == "small-grid":
        n_max = args.n_max or 12
        rows = _small_grid(n_max)
        env = Envelope("report", {"suite": "small-grid", "n_max": n_max}, rows, ["check", "n", "holds"])
        failed = any(not r["holds"] for r in rows)
    elif args.suite == "bounds":
        n_max = args.n_max or 40
        rows, failures = _bounds_summary(n_max, args.seed)
        env = Envelope(
            "report",
            {"suite": "bounds", "n_max": n_max, "seed": args.seed},
            rows + failures if args.format == "json" else rows,
            ["bound", "checked", "violations", "max_exact_over_bound"],
        )
        failed = bool(failures)
    else:
        n_max = args.n_max or 60
        rows = [
            {"n": n, "k": k, "tvd": tvd.tvd_small_cycles(n, k)}
            for k in range(1, 6)
            for n in range(k, n_max + 1)
        ]
        env = Envelope("report", {"suite": "tvd", "n_max": n_max}, rows, ["n", "k", "tvd"])
        failed = False
    return env, failed


# -- parser ------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")
    common.add_argument("--exact-cap", type=int, default=None, metavar="N", help="partition enumeration cap (default 60)")
    return common


EXACT_HELP = {
    "cauchy": "Cauchy's formula: probability of a cycle type",
    "goncharov": "Goncharov's local law: P(C_j = m) by inclusion-exclusion",
    "joint": "joint law P(C_I1 = m1, ..., C_Ir = mr) over disjoint sets",
    "moments": "binomial moments E prod binom(C_Ij, mj) against prod H(Ij)^mj/mj!",
    "stirling": "law of the total cycle count through Stirling numbers of the first kind",
    "gruder": "Gruder's generating function: P(C_I = k, no cycle outside I)",
    "usmall": "U(n,m): probability of no cycle of length <= m",
    "fixedset": "i(n,k): probability that some set of size k is fixed",
    "divcount": "E 2^C = n + 1 (expected number of fixed sets)",
    "djcdf": "P(D_j <= k) for the j-th smallest cycle length",
    "conditional": "law of C_I given C = k",
}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="cyclestats", description="Cycle-type statistics of uniform random permutations.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    ex = sub.add_parser("exact", help="exact laws in rational arithmetic", description="Exact laws in rational arithmetic.")
    exsub = ex.add_subparsers(dest="exact_kind", metavar="law", parser_class=_Parser)
    exsub.required = True
    for name, text in EXACT_HELP.items():
        q = exsub.add_parser(name, parents=[common], help=text, description=text)
        q.add_argument("--n", type=int, required=True)
        if name == "cauchy":
            q.add_argument("--type", type=_int_list, required=True, help="multiplicities m1,...,mn")
        if name in ("goncharov",):
            q.add_argument("--j", type=int, required=True)
            q.add_argument("--m", type=int, required=True)
        if name in ("joint", "moments"):
            q.add_argument("--set", type=_set_text, action="append", required=True, help="index set, e.g. 1-5,8 (repeat)")
            q.add_argument("--counts", type=_int_list, required=True, help="m1,...,mr")
        if name in ("gruder", "conditional"):
            q.add_argument("--set", type=_set_text, default=None, help="index set (default [n])")
            q.add_argument("--k", type=int, required=True)
        if name == "usmall":
            q.add_argument("--m", type=int, required=True)
        if name == "fixedset":
            q.add_argument("--k", type=int, default=None, help="set size (default: every k)")
        if name == "djcdf":
            q.add_argument("--j", type=int, required=True)
            q.add_argument("--k", type=int, required=True)
        q.set_defaults(func=_exact)

    text = "nu(n,m): probability of no cycle longer than m (exact recursion)"
    q = sub.add_parser("nu", parents=[common], help=text, description=text)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.set_defaults(func=_nu)

    text = "Dickman's rho from the integral equation u rho(u) = int_{u-1}^{u} rho"
    q = sub.add_parser("dickman", parents=[common], help=text, description=text)
    q.add_argument("--u", type=float, action="append", required=True, help="argument (repeatable)")
    q.add_argument("--step", type=float, default=DEFAULT_STEP)
    q.add_argument("--u-max", type=float, default=20.0)
    q.add_argument("--table-out", default=None, metavar="FILE", help="write the u,value table as CSV")
    q.set_defaults(func=_dickman)

    text = (
        "explicit bounds: joint and single-set upper bounds, Poisson-type tails, "
        "the strict bound H(I)^k/k!, two equal large cycles, the lower bound for "
        "P(C=k), no large cycles, the Dickman sandwich and the fixed-set decay"
    )
    q = sub.add_parser("bounds", parents=[common], help="explicit bounds checked against exact values", description=text)
    q.add_argument("--name", required=True, choices=bnd.BOUND_NAMES)
    q.add_argument("--params", required=True, help="k=v pairs, e.g. n=40,I=1-5,8,lam=0.5")
    q.add_argument("--verify", action="store_true", help="attach the exact value and the verdict")
    q.set_defaults(func=_bounds)

    text = "total variation between (C_1..C_k) and independent Poisson(1/j) counts"
    q = sub.add_parser("tvd", parents=[common], help=text, description=text)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--oracle", action="store_true", help="also evaluate the definition directly (n <= 20)")
    q.set_defaults(func=_tvd)

    text = (
        "seeded Monte Carlo: event frequencies, uniform growth of C_[m], "
        "the j-th smallest cycle law and the central limit theorem for C_I"
    )
    q = sub.add_parser("sample", parents=[common], help="seeded Monte Carlo estimates", description=text)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--trials", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--workers", type=int, default=1)
    what = q.add_mutually_exclusive_group(required=True)
    what.add_argument("--event", help='e.g. "C[1]=0 & Ctotal>=3"')
    what.add_argument("--experiment", choices=("uniform-growth", "smallest-cycle", "clt"))
    q.add_argument("--xi", type=int, default=None, help="uniform-growth lower end (default n)")
    q.add_argument("--theta", type=float, default=None, help="smallest-cycle lower end (default log n)")
    q.add_argument("--set", type=_set_text, default=None, help="clt index set (default [n])")
    q.add_argument("--sampled", action="store_true", help="clt: sample even when the exact law is cheap")
    q.set_defaults(func=_sample)

    text = "batch reports: exact identities on a small grid, the bound suite, a TVD table"
    q = sub.add_parser("report", parents=[common], help=text, description=text)
    q.add_argument("--suite", required=True, choices=("small-grid", "bounds", "tvd"))
    q.add_argument("--out", default=None, metavar="FILE")
    q.add_argument("--n-max", type=int, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_report)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    old_cap = exact.partition_cap()
    try:
        if args.exact_cap is not None:
            exact.set_partition_cap(args.exact_cap)
        failed = False
        if args.func is _report:
            env, failed = _report(args)
        else:
            env = args.func(args)
        text = env.render(args.format)
        target = getattr(args, "out", None)
        if target:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 1 if failed else 0
    except UsageError as exc:
        stderr.write(f"cyclestats: usage error: {exc}\n")
        return 2
    except DomainError as exc:
        stderr.write(f"cyclestats: error: {exc}\n")
        return 1
    finally:
        exact.set_partition_cap(old_cap)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
