"""Command-line front end.

Subcommands
-----------
verify    exact local-time identity suite + offspring-law statistics
converge  deterministic F_N -> Phi convergence table with diagnostics
compare   distributional comparison of simulated l_N against exact H samples
moments   second-moment linear-growth check
simulate  raw excursion dump (one CSV row per excursion)

Exit codes: 0 ok, 1 config error, 2 identity failure, 3 statistical
failure, 4 resource limit.  Stochastic subcommands require --seed; reruns
with an identical config (seed and workers included) produce byte-identical
output bodies.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, analysis, walk
from .errors import WalklimError
from .limit import LimitLaw, LTQuery, finite_dim_lt, sample_path
from .model import ModelParams, params_from_q
from .rng import worker_streams

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IDENTITY = 2
EXIT_STATISTICAL = 3
EXIT_RESOURCE = 4


class _ConfigError(Exception):
    pass


def _load_params(args) -> ModelParams:
    if args.params_file:
        kv = {}
        with open(args.params_file) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, val = line.partition("=")
                kv[key.strip()] = val.strip()
        return ModelParams.from_dict(kv)
    if args.q is None:
        raise _ConfigError("pass --q or --params-file")
    return params_from_q(args.q)


def _emit(args, meta: dict, header: list[str], rows: list[list]) -> None:
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "json":
            body = [dict(zip(header, row)) for row in rows]
            json.dump({"meta": meta, "rows": body}, out, indent=2)
            out.write("\n")
        else:
            for k, v in meta.items():
                out.write(f"# {k}={v}\n")
            out.write(",".join(header) + "\n")
            for row in rows:
                out.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if args.out:
            out.close()


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _meta(args, params: ModelParams, **extra) -> dict:
    meta = {"tool": f"walklim {__version__}", **params.to_dict()}
    if getattr(args, "seed", None) is not None:
        meta["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        meta["workers"] = args.workers
    meta.update(extra)
    return meta


def _require_seed(args) -> None:
    if args.seed is None:
        raise _ConfigError("--seed is required for stochastic subcommands")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    params = _load_params(args)
    _require_seed(args)
    if args.excursions < 1:
        raise _ConfigError("--excursions must be >= 1")
    streams = worker_streams(args.seed, args.workers + 1)
    report = analysis.IdentityReport()
    from .rng import split_count
    for count, rng in zip(split_count(args.excursions, args.workers), streams):
        if count == 0:
            continue
        part = analysis.identity_suite(params, count, rng, cap=args.cap)
        report.n_excursions += part.n_excursions
        report.n_checks += part.n_checks
        report.n_failures += part.n_failures
        report.n_discarded += part.n_discarded
        for k, v in part.u1_counts.items():
            report.u1_counts[k] = report.u1_counts.get(k, 0) + v
    tv = analysis.u1_pmf_tv(report, params)
    chi_stat, chi_p = analysis.offspring_sampler_gof(
        params, min(args.excursions, 200_000), streams[-1])
    rows = [[report.n_excursions, report.n_checks, report.n_failures,
             report.n_discarded, tv, chi_stat, chi_p]]
    _emit(args, _meta(args, params, excursions=args.excursions, cap=args.cap),
          ["excursions", "checks", "identity_failures", "discarded",
           "u1_pmf_tv", "offspring_chi2", "offspring_chi2_p"], rows)
    if report.n_failures > 0:
        return EXIT_IDENTITY
    if tv >= args.tv_threshold or chi_p <= 0.001:
        return EXIT_STATISTICAL
    return EXIT_OK


def cmd_converge(args) -> int:
    params = _load_params(args)
    schedule = [int(n) for n in args.N.split(",")]
    if not schedule or any(n < 1 for n in schedule):
        raise _ConfigError("--N must be a comma list of positive integers")
    rows = analysis.convergence_table(params, schedule, args.x, args.lam)
    out = [[r.N, r.x, r.lam, r.F1, r.F2, r.Phi, r.gap1, r.gap2,
            abs(r.F1 - r.F2), r.A_N, r.B_N, r.n_gap] for r in rows]
    _emit(args, _meta(args, params, x=args.x, lam=args.lam),
          ["N", "x", "lambda", "F1", "F2", "Phi", "gap1", "gap2",
           "gap12", "A_N", "B_N", "N_times_B_minus_A"], out)
    gaps = [r.gap1 for r in rows]
    shrinking = all(b < a for a, b in zip(gaps, gaps[1:])) if args.lam > 0 else True
    return EXIT_OK if (shrinking and gaps[-1] < args.threshold) else EXIT_STATISTICAL


def cmd_compare(args) -> int:
    params = _load_params(args)
    _require_seed(args)
    if args.runs < 2 or args.paths < 2:
        raise _ConfigError("--runs and --paths must be >= 2")
    xs = sorted(float(x) for x in args.x.split(","))
    law = LimitLaw.from_params(params)
    l_samples, _ = analysis.sample_scaled_local_time(
        params, args.N, xs, args.runs, seed=args.seed, workers=args.workers)
    rng_h = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
    h_samples = sample_path(xs, law, rng_h, n_paths=args.paths)

    header = ["kind", "x_points", "lambdas", "statistic", "threshold",
              "mc_value", "mc_se", "analytic", "ok"]
    rows = []
    all_ok = True
    crit = analysis.ks_critical_value(0.01, args.runs, args.paths)
    for k, x in enumerate(xs):
        d = analysis.ks_distance(l_samples[:, k], h_samples[:, k])
        ok = d < crit
        all_ok &= ok
        rows.append(["ks", _fmt(x), "", d, crit, "", "", "", int(ok)])
    # Finite-dimensional Laplace transforms (k <= 3) against the exact fold.
    queries = [xs[:1], xs[:2], xs[:3]]
    for qxs in queries:
        if not qxs:
            continue
        lams = tuple(1.0 for _ in qxs)
        analytic = finite_dim_lt(LTQuery(tuple(qxs), lams), law)
        idx = [xs.index(x) for x in qxs]
        joint = l_samples[:, idx] @ np.ones(len(qxs))
        est, se = analysis.empirical_lt(joint, 1.0)
        tol = 3.0 * se + args.ln_allowance * len(qxs) / args.N
        ok = abs(est - analytic) < tol
        all_ok &= ok
        rows.append(["finite_dim_lt", ";".join(_fmt(x) for x in qxs),
                     ";".join(_fmt(l) for l in lams), abs(est - analytic), tol,
                     est, se, analytic, int(ok)])
    _emit(args, _meta(args, params, N=args.N, runs=args.runs, paths=args.paths),
          header, rows)
    return EXIT_OK if all_ok else EXIT_STATISTICAL


def cmd_moments(args) -> int:
    params = _load_params(args)
    _require_seed(args)
    if args.replicates < 1:
        raise _ConfigError("--replicates must be >= 1")
    schedule = [int(n) for n in args.n_schedule.split(",")]
    if len(schedule) < 2:
        raise _ConfigError("--n-schedule needs at least two points")
    rng = np.random.default_rng(args.seed)
    report = analysis.second_moment_check(params, schedule, args.replicates, rng)
    rows = [[r.n, r.estimate, r.se, r.cv_estimate, r.exact,
             report.slope, report.target, report.ratio]
            for r in report.rows]
    _emit(args, _meta(args, params, replicates=args.replicates,
                      cap_exceeded=report.cap_exceeded,
                      slope_se=report.slope_se,
                      exact_slope=report.exact_slope),
          ["n", "second_moment", "se", "cv_estimate", "exact",
           "slope", "target", "ratio"], rows)
    if report.cap_exceeded > 0.001 * report.replicates:
        return EXIT_RESOURCE
    return EXIT_OK if 0.9 <= report.ratio <= 1.1 else EXIT_STATISTICAL


def cmd_simulate(args) -> int:
    params = _load_params(args)
    _require_seed(args)
    if args.excursions < 1:
        raise _ConfigError("--excursions must be >= 1")
    rng = np.random.default_rng(args.seed)
    batch = walk.run_excursions(params, args.excursions, rng, cap=args.cap)
    rows = [[i, exc.length, exc.max_height]
            for i, exc in enumerate(batch.excursions)]
    _emit(args, _meta(args, params, excursions=args.excursions, cap=args.cap,
                      discarded=batch.n_discarded),
          ["excursion_id", "length", "max_height"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walklim",
        description="Reflected (1,L) walk local times and their diffusion limit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, stochastic=True):
        p.add_argument("--q", type=float, default=None,
                       help="free parameter of the L=2 family, q in (1/2, 2/3)")
        p.add_argument("--params-file", default=None,
                       help="flat key=value file with L, p1..pL, q")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        if stochastic:
            p.add_argument("--seed", type=int, default=None, required=False,
                           help="required; no silent time-based seeding")
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify", help="exact identity + offspring-law suite")
    common(p)
    p.add_argument("--excursions", type=int, default=100_000)
    p.add_argument("--cap", type=int, default=100_000,
                   help="per-excursion step budget; discards are reported")
    p.add_argument("--tv-threshold", type=float, default=0.005)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converge", help="deterministic F_N -> Phi table")
    common(p, stochastic=False)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--N", default="10,100,1000,10000",
                   help="comma-separated N schedule")
    p.add_argument("--threshold", type=float, default=1e-2)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("compare", help="l_N vs exact H: KS and joint LTs")
    common(p)
    p.add_argument("--x", default="0.25,0.5,1.0", help="comma-separated x grid")
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--runs", type=int, default=10_000, help="l_N replicates")
    p.add_argument("--paths", type=int, default=10_000, help="exact H draws")
    p.add_argument("--ln-allowance", type=float, default=20.0,
                   help="finite-N allowance coefficient (tolerance += coef*k/N)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("moments", help="second-moment linear-growth check")
    common(p)
    p.add_argument("--n-schedule", default="25,50,100,200")
    p.add_argument("--replicates", type=int, default=100_000)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("simulate", help="raw excursion dump")
    common(p)
    p.add_argument("--excursions", type=int, default=1000)
    p.add_argument("--cap", type=int, default=walk.DEFAULT_CAP)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_ConfigError, WalklimError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
