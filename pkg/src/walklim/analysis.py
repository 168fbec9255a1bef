"""Numerical experiments: convergence tables, distributional comparisons,
identity suites, and second-moment asymptotics.

The walk side and the generating-function side meet here: F_N is the exact
Laplace transform of the scaled branching functional, the batched simulator
draws l_N(x) from the aggregated branching representation, and the limit
module supplies exact samples of H for distributional tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import branching, walk
from .errors import EmptySample
from .limit import LimitLaw, phi
from .model import ModelParams, derive_constants
from .rng import split_count, worker_streams


# ---------------------------------------------------------------------------
# Generating-function side: F_N and its limit diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FNResult:
    """Value of F_N plus the A_N/B_N diagnostics behind it."""

    value: float
    A_N: float
    B_N: float
    n_gap: float  # N * (B_N - A_N)


def analytic_FN(start_type: int, N: int, x: float, lam: float,
                params: ModelParams, ab: np.ndarray | None = None) -> FNResult:
    """Exact Laplace transform of (2 U_{N,1}(x) + U_{N,2}(x)).

    F_N = [f_j(e^{-2 lambda/N}, e^{-lambda/N})]^N with j = floor(Nx),
    raised to the N-th power in log space.  For floor(Nx) = 0 the scaled
    local time is the deterministic boundary constant 2/sigma^2, so the
    value is exp(-lambda * 2/sigma^2) and the diagnostics are NaN.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    j = int(np.floor(N * x))
    if lam == 0.0:
        return FNResult(1.0, np.nan, np.nan, np.nan) if j < 1 else _fn_result(
            start_type, N, j, 0.0, params, ab)
    if j < 1:
        return FNResult(float(np.exp(-lam * 2.0 / params.sigma2)), np.nan, np.nan, np.nan)
    return _fn_result(start_type, N, j, lam, params, ab)


def _fn_result(start_type, N, j, lam, params, ab):
    if ab is None:
        ab = branching.gf_recursion(j, params)
    s1, s2 = np.exp(-2.0 * lam / N), np.exp(-lam / N)
    v = np.array([1.0 - s1, 1.0 - s2])
    A = float(ab[j - 1] @ v)
    B = float(ab[j] @ v)
    if start_type == 1:
        logf = np.log1p(A) - np.log1p(B)
    else:
        logf = branching.gf_fn_log(2, j, s1, s2, params, ab=ab)
    return FNResult(float(np.exp(N * logf)), A, B, N * (B - A))


def limit_diagnostics(N: int, x: float, lam: float,
                      params: ModelParams) -> tuple[float, float, float]:
    """(A_N, B_N, N (B_N - A_N)); the limits are (lam*x*c, lam*x*c, lam*c)."""
    r = analytic_FN(1, N, x, lam, params)
    return r.A_N, r.B_N, r.n_gap


def gap_via_matrix_power(N: int, x: float, lam: float, params: ModelParams) -> float:
    """B_N - A_N computed by the independent route u M^{j-1} v'."""
    consts = derive_constants(params)
    j = int(np.floor(N * x))
    if j < 1:
        raise ValueError("floor(Nx) must be >= 1")
    u = np.array(consts.rho)
    v = np.array([1.0 - np.exp(-2.0 * lam / N), 1.0 - np.exp(-lam / N)])
    return float(u @ np.linalg.matrix_power(consts.M, j - 1) @ v)


def analytic_lN_lt(N: int, x: float, lam: float, params: ModelParams) -> float:
    """Exact Laplace transform of l_N(x) itself, boundary term included.

    Per excursion, E[exp(-(lam/N)(U1(j-1) + U1(j) + U2(j)))] is the
    (j-1)-generation pgf evaluated at (s g1(s,s), g2(s,s)) with
    s = e^{-lam/N}; the N-excursion transform is its N-th power.  The gap
    to analytic_FN is the exact O(1/N) boundary-term allowance.
    """
    j = int(np.floor(N * x))
    if j < 1:
        return float(np.exp(-lam * 2.0 / params.sigma2))
    s = float(np.exp(-lam / N))
    g1 = branching.gf_g(1, s, s, params)
    g2 = branching.gf_g(2, s, s, params)
    if j == 1:
        logf = np.log(s * g1)  # f_0(s1, s2) = s1
    else:
        logf = branching.gf_fn_log(1, j - 1, s * g1, g2, params)
    return float(np.exp(N * logf))


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    x: float
    lam: float
    F1: float
    F2: float
    Phi: float
    gap1: float
    gap2: float
    A_N: float
    B_N: float
    n_gap: float


def convergence_table(params: ModelParams, N_schedule, x: float,
                      lam: float) -> list[ConvergenceRow]:
    """F_N^{(1)}, F_N^{(2)}, Phi, and the limit diagnostics over an N schedule."""
    law = LimitLaw.from_params(params)
    target = phi(x, lam, law)
    rows = []
    for N in N_schedule:
        ab = branching.gf_recursion(max(int(np.floor(N * x)), 1), params)
        r1 = analytic_FN(1, N, x, lam, params, ab=ab)
        r2 = analytic_FN(2, N, x, lam, params, ab=ab)
        rows.append(ConvergenceRow(
            N=int(N), x=x, lam=lam, F1=r1.value, F2=r2.value, Phi=target,
            gap1=abs(r1.value - target), gap2=abs(r2.value - target),
            A_N=r1.A_N, B_N=r1.B_N, n_gap=r1.n_gap,
        ))
    return rows


# ---------------------------------------------------------------------------
# Monte Carlo utilities
# ---------------------------------------------------------------------------

def empirical_lt(samples, lam: float) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of E[exp(-lambda X)]."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("empirical_lt needs at least one sample")
    vals = np.exp(-lam * samples)
    se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return float(vals.mean()), se


def ks_distance(samples_a, samples_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("ks_distance needs non-empty samples")
    return float(stats.ks_2samp(a, b, method="asymp").statistic)


def ks_critical_value(alpha: float, n: int, m: int) -> float:
    """Asymptotic two-sample KS critical value at level alpha."""
    return float(np.sqrt(-0.5 * np.log(alpha / 2.0)) * np.sqrt((n + m) / (n * m)))


# ---------------------------------------------------------------------------
# Scaled local time via the aggregated branching representation
# ---------------------------------------------------------------------------

def sample_scaled_local_time(params: ModelParams, N: int, xs, n_runs: int,
                             rng: np.random.Generator | None = None,
                             seed: int | None = None, workers: int = 1,
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Draw (l_N(x))_{x in xs} for n_runs independent runs.

    Uses the exact branching representation: the N excursion trees of one
    run aggregate into a single 2-type process V started at (N, 0), and
    l_N(x) = (V1(j-1) + V1(j) + V2(j)) / N with j = floor(Nx).  Identical
    in law to path simulation (the local-time identity is exact) at a cost
    of one batched generation step per level instead of one step per walk
    move.

    Returns (l, w): arrays of shape (n_runs, len(xs)) with the scaled local
    time and the companion functional (2 V1(j) + V2(j)) / N whose transform
    is analytic_FN.  Pass either rng (single stream) or seed (reproducible
    worker splitting).
    """
    xs = np.asarray(xs, dtype=float)
    if rng is not None:
        streams = [rng]
        counts = [n_runs]
    else:
        if seed is None:
            raise ValueError("pass rng or seed")
        streams = worker_streams(seed, workers)
        counts = split_count(n_runs, workers)
    parts = [_scaled_local_time_block(params, N, xs, c, s)
             for c, s in zip(counts, streams) if c > 0]
    l = np.concatenate([p[0] for p in parts], axis=0)
    w = np.concatenate([p[1] for p in parts], axis=0)
    return l, w


def _scaled_local_time_block(params, N, xs, n_runs, rng):
    js = np.floor(N * xs).astype(int)
    need = sorted({j for j in js if j >= 1} | {j - 1 for j in js if j >= 1})
    v1 = np.full(n_runs, N, dtype=np.int64)
    v2 = np.zeros(n_runs, dtype=np.int64)
    snap: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    if 0 in need or not need:
        snap[0] = (v1.copy(), v2.copy())
    top = need[-1] if need else 0
    for gen in range(1, top + 1):
        v1, v2 = branching.step_population(v1, v2, params, rng)
        if gen in need:
            snap[gen] = (v1, v2)
    l = np.empty((n_runs, len(js)))
    w = np.empty((n_runs, len(js)))
    for k, j in enumerate(js):
        if j < 1:
            l[:, k] = 2.0 / params.sigma2
            w[:, k] = 2.0 / params.sigma2
        else:
            a1, _ = snap[j - 1]
            b1, b2 = snap[j]
            l[:, k] = (a1 + b1 + b2) / N
            w[:, k] = (2 * b1 + b2) / N
    return l, w


def sample_scaled_local_time_paths(params: ModelParams, N: int, xs, n_runs: int,
                                   rng: np.random.Generator,
                                   cap: int = 1_000_000) -> tuple[np.ndarray, int]:
    """Path-route l_N sampler (walk simulation), for cross-validation.

    Returns (l, n_discarded); discarded over-budget excursions are resampled
    and counted.
    """
    xs = np.asarray(xs, dtype=float)
    out = np.empty((n_runs, xs.size))
    discarded = 0
    for r in range(n_runs):
        profile = walk.LocalTimeProfile()
        batch = walk.run_excursions(params, N, rng, cap=cap, keep_paths=False,
                                    on_excursion=profile.add)
        discarded += batch.n_discarded
        for k, x in enumerate(xs):
            if N * x < 1.0:
                out[r, k] = 2.0 / params.sigma2
            else:
                out[r, k] = profile.local_time(int(np.floor(N * x))) / N
    return out, discarded


# ---------------------------------------------------------------------------
# Identity and offspring-law suites (walk side)
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    """Outcome of the exact per-path local-time identity suite."""

    n_excursions: int = 0
    n_checks: int = 0
    n_failures: int = 0
    n_discarded: int = 0
    u1_counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_failures == 0 and self.n_excursions > 0


def identity_suite(params: ModelParams, n_excursions: int,
                   rng: np.random.Generator, cap: int = 100_000) -> IdentityReport:
    """Check L(j; tau_1) = U1(j-1) + U1(j) + U2(j) on every simulated path.

    Every level 1 <= j <= max_height of every excursion is checked exactly
    (integer arithmetic); any failure is an implementation bug.  The report
    also accumulates the empirical pmf of U(1) for the offspring-law check.
    """
    report = IdentityReport()

    def check(exc: walk.ExcursionRecord) -> None:
        report.n_excursions += 1
        report.n_checks += exc.max_height
        if not walk.verify_identity_all_levels(exc):
            report.n_failures += 1
        U = walk.extract_branching(exc)
        key = (int(U[1, 0]), int(U[1, 1])) if len(U) > 1 else (0, 0)
        report.u1_counts[key] = report.u1_counts.get(key, 0) + 1

    batch = walk.run_excursions(params, n_excursions, rng, cap=cap,
                                keep_paths=False, on_excursion=check)
    report.n_discarded = batch.n_discarded
    return report


def u1_pmf_tv(report: IdentityReport, params: ModelParams) -> float:
    """Total-variation distance between extracted U(1) and the offspring pmf."""
    n = sum(report.u1_counts.values())
    if n == 0:
        raise EmptySample("no excursions in report")
    top = max(max(k) for k in report.u1_counts) + 2
    tv = 0.0
    covered = 0.0
    for u1 in range(top):
        for u2 in range(top):
            p = branching.offspring_pmf(1, u1, u2, params)
            covered += p
            emp = report.u1_counts.get((u1, u2), 0) / n
            tv += abs(emp - p)
    return 0.5 * (tv + max(0.0, 1.0 - covered))


def u1_pmf_chi_square(report: IdentityReport, params: ModelParams,
                      support_total: int = 12) -> tuple[float, float]:
    """Chi-square of the extracted U(1) counts against the offspring pmf.

    Same cell layout as offspring_sampler_gof: outcomes with
    u1 + u2 <= support_total plus a pooled tail.  Returns (stat, p_value).
    """
    n = sum(report.u1_counts.values())
    if n == 0:
        raise EmptySample("no excursions in report")
    cells = [(u1, u2) for u1 in range(support_total + 1)
             for u2 in range(support_total + 1 - u1)]
    cellset = set(cells)
    tail = sum(c for k, c in report.u1_counts.items() if k not in cellset)
    probs = np.array([branching.offspring_pmf(1, u1, u2, params) for u1, u2 in cells])
    observed = np.append(
        np.array([report.u1_counts.get(c, 0) for c in cells], dtype=float), tail)
    expected = np.append(probs, max(1.0 - probs.sum(), 0.0)) * n
    return _chi_square(observed, expected)


def offspring_sampler_gof(params: ModelParams, n_samples: int,
                          rng: np.random.Generator, parent_type: int = 1,
                          support_total: int = 12) -> tuple[float, float]:
    """Chi-square goodness of fit of sample_offspring against offspring_pmf.

    Cells are the outcomes with u1 + u2 <= support_total plus one pooled
    tail cell.  Returns (statistic, p_value).
    """
    shift = 1 if parent_type == 2 else 0
    cells = [(u1, u2) for u1 in range(support_total + 1)
             for u2 in range(support_total + 1 - u1)]
    counts = {c: 0 for c in cells}
    tail = 0
    for _ in range(n_samples):
        u1, u2 = branching.sample_offspring(parent_type, params, rng)
        key = (u1 - shift, u2)
        if key in counts:
            counts[key] += 1
        else:
            tail += 1
    probs = np.array([branching.offspring_pmf(1, u1, u2, params) for u1, u2 in cells])
    observed = np.append(np.array([counts[c] for c in cells], dtype=float), tail)
    expected = np.append(probs, max(1.0 - probs.sum(), 0.0)) * n_samples
    return _chi_square(observed, expected)


def _chi_square(observed: np.ndarray, expected: np.ndarray) -> tuple[float, float]:
    keep = expected >= 5.0
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] <= 0:
        obs, exp = obs[:-1], exp[:-1]
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = len(exp) - 1
    return stat, float(stats.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# Second-moment asymptotics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentRow:
    n: int
    estimate: float
    se: float
    cv_estimate: float
    exact: float


@dataclass(frozen=True)
class MomentReport:
    """MC second moments of 2 U1(n) + U2(n) against the linear-growth target."""

    rows: tuple[MomentRow, ...]
    slope: float
    slope_se: float
    exact_slope: float
    target: float
    cap_exceeded: int
    replicates: int

    @property
    def ratio(self) -> float:
        return self.slope / self.target


def functional_second_moment_exact(n_max: int, params: ModelParams) -> np.ndarray:
    """Exact E[(2 U1(n) + U2(n))^2], n = 0..n_max, from a single type-1 start.

    The second-moment matrix obeys S_{n+1} = M' S_n M + sum_i m_i(n) b^(i)
    with m(n) = e1 M^n; this is the independent oracle for the MC rows and
    pins the linear growth rate exactly.
    """
    consts = derive_constants(params)
    a = np.array([2.0, 1.0])
    S = np.array([[1.0, 0.0], [0.0, 0.0]])
    m = np.array([1.0, 0.0])
    out = np.empty(n_max + 1)
    out[0] = a @ S @ a
    for n in range(1, n_max + 1):
        S = consts.M.T @ S @ consts.M + m[0] * consts.b_cov[0] + m[1] * consts.b_cov[1]
        m = m @ consts.M
        out[n] = a @ S @ a
    return out


def second_moment_check(params: ModelParams, n_schedule, replicates: int,
                        rng: np.random.Generator,
                        pop_cap: int = branching.DEFAULT_POP_CAP) -> MomentReport:
    """Estimate E[(2 U1(n) + U2(n))^2] over n_schedule, fit the slope.

    Replicates start from a single type-1 particle and evolve by batched
    generation steps.  Replicates that overflow pop_cap are frozen and
    excluded from later rows (counted in the report).  Each row carries the
    plain MC estimate, a control-variate estimate (the exactly-known first
    moment as control; the functional's fourth moment grows like n^3, so
    the plain estimate is noisy), and the exact closed-form value.  The
    slope is fitted by least squares on the control-variate estimates over
    the top half of the schedule, with its standard error propagated from
    the row SEs; the target is K1 * mu1 * Q2[mu].
    """
    n_schedule = sorted(int(n) for n in n_schedule)
    if len(n_schedule) < 2:
        raise ValueError("n_schedule needs at least two points to fit a slope")
    consts = derive_constants(params)
    exact = functional_second_moment_exact(n_schedule[-1], params)
    a = np.array([2.0, 1.0])
    v1 = np.ones(replicates, dtype=np.int64)
    v2 = np.zeros(replicates, dtype=np.int64)
    ok = np.ones(replicates, dtype=bool)
    rows = []
    cv_se = {}
    gen = 0
    m = np.array([1.0, 0.0])
    for n_target in n_schedule:
        while gen < n_target:
            v1, v2 = branching.step_population(v1, v2, params, rng)
            over = (v1 + v2 > pop_cap) & ok
            if np.any(over):
                ok &= ~over
                v1[over] = 0
                v2[over] = 0
            m = m @ consts.M
            gen += 1
        z = 2.0 * v1[ok] + v2[ok]
        z2 = z * z
        beta = float(np.cov(z2, z)[0, 1] / np.var(z))
        resid = z2 - beta * z
        cv = float(resid.mean()) + beta * float(m @ a)
        se = float(z2.std(ddof=1) / np.sqrt(z2.size))
        cv_se[n_target] = float(resid.std(ddof=1) / np.sqrt(resid.size))
        rows.append(MomentRow(n=n_target, estimate=float(z2.mean()), se=se,
                              cv_estimate=cv, exact=float(exact[n_target])))
    top = rows[len(rows) // 2:]
    ns = np.array([r.n for r in top], dtype=float)
    ys = np.array([r.cv_estimate for r in top])
    coef = (ns - ns.mean()) / ((ns - ns.mean()) ** 2).sum()
    slope = float(coef @ ys)
    slope_se = float(np.sqrt((coef**2 @ np.array([cv_se[r.n] ** 2 for r in top]))))
    exact_slope = float(coef @ np.array([r.exact for r in top]))
    target = consts.K1 * consts.mu[0] * consts.Q2mu
    return MomentReport(rows=tuple(rows), slope=slope, slope_se=slope_se,
                        exact_slope=exact_slope, target=target,
                        cap_exceeded=int(replicates - ok.sum()),
                        replicates=replicates)
