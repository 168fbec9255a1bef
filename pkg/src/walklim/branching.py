"""The 2-type critical Galton-Watson process embedded in the (1,2) walk.

A type-1 parent's offspring (u1, u2) has probability
(u1+u2)!/(u1! u2!) p1^u1 p2^u2 q, i.e., the type counts of an i.i.d. trial
sequence (+type1 w.p. p1, +type2 w.p. p2, stop w.p. q).  A type-2 parent
produces the same law shifted by one deterministic type-1 child.

The module holds the exact pmf, a trial-sequence sampler, generation
simulation (per-particle and batched), the generating-function machinery
(g, the (a_n, b_n) affine recursion, and the closed-form f_n), and a
brute-force forward-convolution enumerator used as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import PopulationCapExceeded, TruncationBudgetExceeded, UnsupportedL
from .model import ModelParams, derive_constants

DEFAULT_POP_CAP = 10_000_000


def _require_l2(params: ModelParams) -> tuple[float, float, float]:
    if params.L != 2:
        raise UnsupportedL(f"branching machinery requires L=2, got L={params.L}")
    return params.p[0], params.p[1], params.q


def offspring_pmf(parent_type: int, u1: int, u2: int, params: ModelParams) -> float:
    """Exact offspring probability P(child counts = (u1, u2) | parent type).

    For a type-2 parent the outcome always contains the deterministic extra
    type-1 child, so (u1, u2) with u1 = 0 is out of support and returns 0.
    """
    p1, p2, q = _require_l2(params)
    if parent_type == 2:
        u1 -= 1
    elif parent_type != 1:
        raise ValueError("parent_type must be 1 or 2")
    if u1 < 0 or u2 < 0:
        return 0.0
    if u1 == u2 == 0:
        return q
    logp = (
        gammaln(u1 + u2 + 1) - gammaln(u1 + 1) - gammaln(u2 + 1)
        + u1 * np.log(p1) + u2 * np.log(p2) + np.log(q)
    )
    return float(np.exp(logp))


def sample_offspring(parent_type: int, params: ModelParams,
                     rng: np.random.Generator) -> tuple[int, int]:
    """Draw one offspring vector by the trial-sequence method."""
    p1, p2, q = _require_l2(params)
    u1 = 1 if parent_type == 2 else 0
    u2 = 0
    while True:
        r = rng.random()
        if r < q:
            return u1, u2
        if r < q + p1:
            u1 += 1
        else:
            u2 += 1


def step_population(u1, u2, params: ModelParams, rng: np.random.Generator):
    """One batched generation step for populations (u1, u2), vectorized.

    The pooled children of n = u1 + u2 parents are the type counts of a
    trial sequence stopped n times: the total G is negative binomial
    (n stops, stop probability q) and splits binomially between the types;
    each type-2 parent adds one deterministic type-1 child.  Accepts scalars
    or equal-shape integer arrays; extinct entries stay extinct.
    """
    p1, p2, q = _require_l2(params)
    u1 = np.asarray(u1, dtype=np.int64)
    u2 = np.asarray(u2, dtype=np.int64)
    parents = u1 + u2
    g = np.zeros_like(parents)
    alive = parents > 0
    if np.any(alive):
        g[alive] = rng.negative_binomial(parents[alive], q)
    w1 = rng.binomial(g, p1 / (p1 + p2))
    return w1 + u2, g - w1


def simulate_generations(n_max: int, params: ModelParams, rng: np.random.Generator,
                         pop_cap: int = DEFAULT_POP_CAP,
                         batched: bool = False) -> list[tuple[int, int]]:
    """Trajectory [(U1(0), U2(0)), ..., (U1(n_max), U2(n_max))] from (1, 0).

    Per-particle reproduction by default; batched=True uses the pooled
    negative-binomial step (same law, validated against the per-particle
    route in the test suite).
    """
    u1, u2 = 1, 0
    traj = [(u1, u2)]
    for _ in range(n_max):
        if u1 + u2 == 0:
            traj.append((0, 0))
            continue
        if batched:
            v1, v2 = step_population(u1, u2, params, rng)
            u1, u2 = int(v1), int(v2)
        else:
            c1 = c2 = 0
            for _ in range(u1):
                a, b = sample_offspring(1, params, rng)
                c1 += a
                c2 += b
            for _ in range(u2):
                a, b = sample_offspring(2, params, rng)
                c1 += a
                c2 += b
            u1, u2 = c1, c2
        if u1 + u2 > pop_cap:
            raise PopulationCapExceeded(f"generation size {u1 + u2} > cap {pop_cap}")
        traj.append((u1, u2))
    return traj


def gf_g(parent_type: int, s1: float, s2: float, params: ModelParams) -> float:
    """Offspring pgf: g1 = q/(1 - p1 s1 - p2 s2), g2 = s1 * g1."""
    p1, p2, q = _require_l2(params)
    g1 = q / (1.0 - p1 * s1 - p2 * s2)
    if parent_type == 1:
        return g1
    if parent_type == 2:
        return s1 * g1
    raise ValueError("parent_type must be 1 or 2")


def gf_recursion(n: int, params: ModelParams) -> np.ndarray:
    """The (a_k, b_k) sequence for k = 0..n, shape (n+1, 2).

    (a_0, b_0) = (0, 0) and (a_k, b_k) = (a_{k-1}, b_{k-1}) M + (rho1, rho2).
    """
    consts = derive_constants(params)
    rho = np.array(consts.rho)
    ab = np.zeros((n + 1, 2))
    for k in range(1, n + 1):
        ab[k] = ab[k - 1] @ consts.M + rho
    return ab


def gf_fn_log(start_type: int, n: int, s1: float, s2: float,
              params: ModelParams, ab: np.ndarray | None = None) -> float:
    """log f_n(s1, s2), the n-generation log-pgf started from one particle.

    Computed as log1p(A) - log1p(B) from the closed form, which stays
    accurate when s -> 1 (the regime used by the Laplace-transform limits).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if start_type not in (1, 2):
        raise ValueError("start_type must be 1 or 2")
    if start_type == 2 and n == 1:
        g = gf_g(2, s1, s2, params)
        return float(np.log(g)) if g > 0.0 else float("-inf")
    if ab is None:
        ab = gf_recursion(n, params)
    v = np.array([1.0 - s1, 1.0 - s2])
    top = n - 1 if start_type == 1 else n - 2
    return float(np.log1p(ab[top] @ v) - np.log1p(ab[n] @ v))


def gf_fn(start_type: int, n: int, s1: float, s2: float,
          params: ModelParams, ab: np.ndarray | None = None) -> float:
    """f_n(s1, s2) = E[s1^U1(n) s2^U2(n) | U_0 = e_start_type]."""
    return float(np.exp(gf_fn_log(start_type, n, s1, s2, params, ab=ab)))


@dataclass(frozen=True)
class TruncatedPmf:
    """Joint pmf of U_n on a truncated (u1, u2) grid, plus the lost mass."""

    probs: np.ndarray
    truncation_bound: float

    def pgf(self, s1: float, s2: float) -> float:
        """Pgf of the truncated pmf; exact up to truncation_bound."""
        n1, n2 = self.probs.shape
        return float(self.probs @ np.power(s2, np.arange(n2)) @ np.power(s1, np.arange(n1)))

    def mean(self) -> np.ndarray:
        n1, n2 = self.probs.shape
        m1 = np.arange(n1) @ self.probs.sum(axis=1)
        m2 = self.probs.sum(axis=0) @ np.arange(n2)
        return np.array([m1, m2])


def _pooled_offspring_kernel(n_parents: int, n_type2: int, shape: tuple[int, int],
                             params: ModelParams) -> np.ndarray:
    """Next-generation pmf grid given (n_parents total, n_type2 of them type 2).

    The pooled law is negative-multinomial with n_parents stops, shifted by
    (n_type2, 0) for the deterministic type-1 children.
    """
    p1, p2, q = _require_l2(params)
    n1, n2 = shape
    w1 = np.arange(n1)[:, None] - n_type2
    w2 = np.arange(n2)[None, :]
    with np.errstate(invalid="ignore"):
        logp = (
            gammaln(w1 + w2 + n_parents) - gammaln(w1 + 1) - gammaln(w2 + 1)
            - gammaln(n_parents)
            + w1 * np.log(p1) + w2 * np.log(p2) + n_parents * np.log(q)
        )
    out = np.exp(logp)
    out[w1[:, 0] < 0, :] = 0.0
    return out


def enumerate_pmf(start_type: int, n: int, params: ModelParams,
                  mass_target: float = 1.0 - 1e-9,
                  max_support: int = 256) -> TruncatedPmf:
    """Brute-force forward convolution of the offspring law over n generations.

    Independent of the generating-function route: the state pmf is pushed
    through the pooled-offspring kernel generation by generation on a grid
    that grows until the captured mass reaches mass_target.
    """
    _require_l2(params)
    if start_type not in (1, 2):
        raise ValueError("start_type must be 1 or 2")
    size = 16
    while True:
        probs = np.zeros((size, size))
        if start_type == 1:
            probs[1, 0] = 1.0
        else:
            probs[0, 1] = 1.0
        lost = 0.0
        for _ in range(n):
            nxt = np.zeros_like(probs)
            idx1, idx2 = np.nonzero(probs)
            for v1, v2 in zip(idx1, idx2):
                mass = probs[v1, v2]
                if v1 + v2 == 0:
                    nxt[0, 0] += mass
                    continue
                kern = _pooled_offspring_kernel(v1 + v2, v2, probs.shape, params)
                nxt += mass * kern
                lost += mass * max(0.0, 1.0 - kern.sum())
            probs = nxt
        if 1.0 - lost >= mass_target:
            return TruncatedPmf(probs=probs, truncation_bound=lost)
        if size >= max_support:
            raise TruncationBudgetExceeded(
                f"captured mass {1.0 - lost} < target {mass_target} at support {size}"
            )
        size = min(2 * size, max_support)
