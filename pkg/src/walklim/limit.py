"""The limit diffusion H: exact transforms and exact transition sampling.

H is the continuous-state branching diffusion dH = sqrt(2c) sqrt(H^+) dB
started at h0 = c = 2/sigma^2.  Its Laplace exponent flows by
psi(t, lambda) = lambda / (1 + c lambda t), so every transition Laplace
transform is exp(-x0 psi(t, lambda)) and transitions can be sampled exactly
as a Poisson(x0/(c t)) mixture of Gamma(n, scale c t) variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


@dataclass(frozen=True)
class LimitLaw:
    """Parameters of the limit diffusion: branching scale c and start h0."""

    c: float
    h0: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")

    @classmethod
    def from_params(cls, params: ModelParams) -> "LimitLaw":
        c = 2.0 / params.sigma2
        return cls(c=c, h0=c)

    @classmethod
    def from_c(cls, c: float) -> "LimitLaw":
        return cls(c=c, h0=c)


@dataclass(frozen=True)
class LTQuery:
    """A finite-dimensional Laplace-transform query E exp(-sum l_i H(x_i))."""

    xs: tuple[float, ...]
    lambdas: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.lambdas) or not self.xs:
            raise ValueError("xs and lambdas must be non-empty and equal length")
        if any(x < 0 for x in self.xs) or any(l < 0 for l in self.lambdas):
            raise ValueError("xs and lambdas must be non-negative")
        if any(a > b for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("xs must be non-decreasing")


def psi(t: float, lam: float, c: float) -> float:
    """Laplace exponent flow psi(t, lambda) = lambda / (1 + c lambda t).

    Saturates at 1/(c t) as lambda -> infinity; psi(0, lambda) = lambda.
    """
    return lam / (1.0 + c * lam * t)


def phi(x: float, lam: float, law: LimitLaw) -> float:
    """One-dimensional Laplace transform E[exp(-lambda H(x))]."""
    return float(np.exp(-law.h0 * psi(x, lam, law.c)))


def transition_lt(x0: float, t: float, lam: float, law: LimitLaw) -> float:
    """E[exp(-lambda H(t)) | H(0) = x0] = exp(-x0 psi(t, lambda))."""
    return float(np.exp(-x0 * psi(t, lam, law.c)))


def sample_transition(x0, t: float, law: LimitLaw, rng: np.random.Generator):
    """Exact transition draw(s) of H(t) given H(0) = x0.

    Poisson(x0/(c t)) many exponential clusters of mean c t, i.e., 0 with
    the absorption probability exp(-x0/(c t)) and Gamma(n, scale c t)
    otherwise; the mixture's Laplace transform is exp(-x0 psi(t, lambda)).
    Accepts a scalar or array x0 and preserves the shape.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    arr = np.atleast_1d(np.asarray(x0, dtype=float))
    scale = law.c * t
    n = rng.poisson(arr / scale)
    out = np.zeros_like(arr)
    pos = n > 0
    if np.any(pos):
        out[pos] = rng.gamma(shape=n[pos], scale=scale)
    if np.ndim(x0) == 0:
        return float(out[0])
    return out.reshape(np.shape(x0))


def sample_path(grid, law: LimitLaw, rng: np.random.Generator,
                n_paths: int = 1) -> np.ndarray:
    """Exact joint sample of H on an increasing grid, shape (n_paths, len(grid)).

    Chained exact transitions via the Markov property: no discretization
    error at the grid points.  H(0) = h0 deterministically; absorbed paths
    stay at 0.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) < 0) or grid[0] < 0:
        raise ValueError("grid must be non-empty, non-negative, and increasing")
    out = np.empty((n_paths, grid.size))
    h = np.full(n_paths, law.h0)
    t_prev = 0.0
    for k, t in enumerate(grid):
        if t > t_prev:
            h = sample_transition(h, t - t_prev, law, rng)
            t_prev = t
        out[:, k] = h
    return out


def finite_dim_lt(query: LTQuery, law: LimitLaw) -> float:
    """E[exp(-sum_i lambda_i H(x_i))] by exact backward folding.

    Each conditional transform is exponential-affine in the state, so the
    effective rate folds backward through psi: l'_k = lambda_k, then
    l'_i = lambda_i + psi(x_{i+1} - x_i, l'_{i+1}), and the answer is
    exp(-h0 psi(x_1, l'_1)).
    """
    lam = query.lambdas[-1]
    for i in range(len(query.xs) - 2, -1, -1):
        lam = query.lambdas[i] + psi(query.xs[i + 1] - query.xs[i], lam, law.c)
    return float(np.exp(-law.h0 * psi(query.xs[0], lam, law.c)))


def euler_sde(h: float, horizon: float, law: LimitLaw, rng: np.random.Generator,
              n_paths: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Euler-Maruyama discretization of dH = sqrt(2c H^+) dB.

    Returns (grid, paths) with paths of shape (n_paths, len(grid)).  The
    The state is clipped at 0 after each step: the drift is zero and the
    diffusion vanishes at 0, so 0 is absorbing and unclipped paths would
    park at small negative values instead.  This integrator is a
    convergence cross-check only; the exact Poisson-Gamma sampler is the
    reference.
    """
    if h <= 0 or horizon <= 0:
        raise ValueError("h and horizon must be positive")
    n_steps = int(round(horizon / h))
    grid = np.linspace(0.0, n_steps * h, n_steps + 1)
    paths = np.empty((n_paths, n_steps + 1))
    paths[:, 0] = law.h0
    coef = np.sqrt(2.0 * law.c)
    for k in range(n_steps):
        x = paths[:, k]
        dw = rng.normal(0.0, np.sqrt(h), size=n_paths)
        paths[:, k + 1] = np.maximum(x + coef * np.sqrt(x) * dw, 0.0)
    return grid, paths
