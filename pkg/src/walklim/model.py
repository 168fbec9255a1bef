"""Walk parameters and the derived constants of the L = 2 branching machinery.

The step law of the reflected walk is (p_1, ..., p_L, q): jump +l with
probability p_l, jump -1 with probability q, and a deterministic step 0 -> 1
at the boundary.  The mean-zero constraint sum(l * p_l) = q makes the
embedded 2-type branching process critical; everything downstream (mean
matrix, eigenstructure, second-moment constants) is computed here in closed
form for L = 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAProbabilityVector, NotMeanZero, OutOfRange, UnsupportedL

_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Validated step law of the reflected (1,L) walk.

    Attributes
    ----------
    L : int
        Maximum upward jump.
    p : tuple of float
        p[l-1] is the probability of a +l step.
    q : float
        Probability of a -1 step.
    """

    L: int
    p: tuple[float, ...]
    q: float

    @property
    def sigma2(self) -> float:
        """Variance of a single step away from the boundary.

        Under the mean-zero constraint this is sum(l^2 * p_l) + q; for
        L = 2 it reduces to 6q - 2.
        """
        return sum(l * l * pl for l, pl in enumerate(self.p, start=1)) + self.q

    def to_dict(self) -> dict[str, float]:
        """Flat key-value form (keys L, p1..pL, q)."""
        d: dict[str, float] = {"L": self.L}
        for l, pl in enumerate(self.p, start=1):
            d[f"p{l}"] = pl
        d["q"] = self.q
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        L = int(d["L"])
        p = tuple(float(d[f"p{l}"]) for l in range(1, L + 1))
        return validate_params(L, p, float(d["q"]))


def validate_params(L: int, p, q: float) -> ModelParams:
    """Validate a raw step law; never silently repairs.

    Raises
    ------
    NotAProbabilityVector
        If the components are outside (0,1) or do not sum to 1.
    NotMeanZero
        If sum(l * p_l) != q.
    """
    L = int(L)
    p = tuple(float(x) for x in p)
    q = float(q)
    if L < 1 or len(p) != L:
        raise NotAProbabilityVector(f"expected {L} upward-step probabilities, got {len(p)}")
    if not all(0.0 < x < 1.0 for x in (*p, q)):
        raise NotAProbabilityVector("all step probabilities must lie strictly in (0, 1)")
    total = sum(p) + q
    if abs(total - 1.0) > _TOL:
        raise NotAProbabilityVector(f"probabilities sum to {total!r}, not 1")
    drift = sum(l * pl for l, pl in enumerate(p, start=1)) - q
    if abs(drift) > _TOL:
        raise NotMeanZero(f"mean step is {drift!r}, not 0")
    return ModelParams(L=L, p=p, q=q)


def params_from_q(q: float) -> ModelParams:
    """The L = 2 family by its single free parameter q in (1/2, 2/3).

    The constraints p1 + p2 + q = 1 and p1 + 2 p2 = q force
    p1 = 2 - 3q and p2 = 2q - 1.
    """
    q = float(q)
    if not 0.5 < q < 2.0 / 3.0:
        raise OutOfRange(f"q={q} outside (1/2, 2/3)")
    return validate_params(2, (2.0 - 3.0 * q, 2.0 * q - 1.0), q)


@dataclass(frozen=True)
class ModelConstants:
    """Closed-form constants of the L = 2 branching machinery.

    M is the mean offspring matrix [[rho1, rho2], [1 + rho1, rho2]] with
    rho_i = p_i / q; its eigenvalues are 1 and alpha = (1 - 2q)/q.  mu and
    nu are the right/left eigenvectors for eigenvalue 1, normalized so that
    1.mu = 1 and nu.mu = 1.  b_cov[i] is the offspring covariance matrix of
    a type-(i+1) parent; K1 and Q2mu are the second-moment constants that
    set the linear growth rate of E[(2 U1(n) + U2(n))^2].
    """

    sigma2: float
    c: float
    rho: tuple[float, float]
    M: np.ndarray
    alpha: float
    T: np.ndarray
    Tinv: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    K1: float
    Q2mu: float
    b_cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        for a in (self.M, self.T, self.Tinv, self.mu, self.nu, self.b_cov):
            a.setflags(write=False)


def derive_constants(params: ModelParams) -> ModelConstants:
    """Compute every derived constant of the L = 2 machinery.

    All quantities are closed-form: the 2x2 eigenproblem is solved by hand
    and the offspring covariances come from the trial-sequence (negative
    multinomial) representation of the offspring law.
    """
    if params.L != 2:
        raise UnsupportedL(f"derived constants require L=2, got L={params.L}")
    p1, p2 = params.p
    q = params.q
    rho1, rho2 = p1 / q, p2 / q
    M = np.array([[rho1, rho2], [1.0 + rho1, rho2]])
    alpha = (1.0 - 2.0 * q) / q
    T = np.array([[1.0, 1.0 - 2.0 * q], [2.0, 1.0 - q]])
    Tinv = np.array([[1.0 - q, 2.0 * q - 1.0], [-2.0, 1.0]]) / (3.0 * q - 1.0)

    # Right eigenvector for eigenvalue 1: row 1 of (M - I).mu = 0 gives
    # mu2/mu1 = (1 - rho1)/rho2; normalize mu1 + mu2 = 1.
    den = rho2 + 1.0 - rho1
    mu = np.array([rho2 / den, (1.0 - rho1) / den])
    # Left eigenvector: nu2/nu1 = (1 - rho1)/(1 + rho1); normalize nu.mu = 1.
    nu = np.array([1.0, (1.0 - rho1) / (1.0 + rho1)])
    nu = nu / (nu @ mu)

    # Offspring covariance from the negative-multinomial moments:
    # Cov(U_j, U_k) = p_j p_k / q^2 + delta_jk p_j / q.  The type-2 parent
    # adds one deterministic type-1 child, which leaves covariances alone.
    p = np.array([p1, p2])
    b = np.outer(p, p) / q**2 + np.diag(p) / q
    b_cov = np.stack([b, b])

    q2mu = np.array([mu @ b_cov[i] @ mu for i in range(2)])
    Q2mu = float(nu @ q2mu)
    K1 = float((2.0 * nu[0] + nu[1]) ** 2)

    return ModelConstants(
        sigma2=params.sigma2,
        c=2.0 / params.sigma2,
        rho=(rho1, rho2),
        M=M,
        alpha=alpha,
        T=T,
        Tinv=Tinv,
        mu=mu,
        nu=nu,
        K1=K1,
        Q2mu=Q2mu,
        b_cov=b_cov,
    )
