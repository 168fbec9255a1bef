import numpy as np
import pytest
from scipy.stats import ks_2samp

from walklim import limit, model


@pytest.fixture(scope="module")
def law():
    return limit.LimitLaw.from_params(model.params_from_q(0.6))


def test_law_from_params(law):
    assert law.c == pytest.approx(1.25)
    assert law.h0 == pytest.approx(1.25)
    with pytest.raises(ValueError):
        limit.LimitLaw.from_c(-1.0)


def test_psi_basics(law):
    assert limit.psi(0.0, 3.0, law.c) == 3.0
    assert limit.psi(1.0, 1.0, law.c) == pytest.approx(1.0 / 2.25)
    # saturation as lambda grows
    assert limit.psi(2.0, 1e12, law.c) == pytest.approx(1.0 / (law.c * 2.0), rel=1e-9)


def test_psi_flow_property(law):
    for t in np.linspace(0.1, 2.0, 7):
        for s in np.linspace(0.05, 1.7, 7):
            for lam in (0.3, 1.0, 3.0):
                lhs = limit.psi(t + s, lam, law.c)
                rhs = limit.psi(t, limit.psi(s, lam, law.c), law.c)
                assert abs(lhs - rhs) < 1e-12


def test_phi_value(law):
    assert limit.phi(1.0, 1.0, law) == pytest.approx(0.5737534207374327, rel=1e-14)


def test_transition_lt_and_absorption(law):
    x0, t = 0.8, 0.7
    assert limit.transition_lt(x0, t, 0.0, law) == 1.0
    # lambda -> inf limit is the absorption probability exp(-x0/(c t))
    assert limit.transition_lt(x0, t, 1e14, law) == pytest.approx(
        np.exp(-x0 / (law.c * t)), rel=1e-9)


def test_sample_transition_scalar_and_shape(law, rng):
    v = limit.sample_transition(1.0, 0.5, law, rng)
    assert isinstance(v, float)
    arr = limit.sample_transition(np.full((3, 4), 1.0), 0.5, law, rng)
    assert arr.shape == (3, 4)
    with pytest.raises(ValueError):
        limit.sample_transition(1.0, 0.0, law, rng)


def test_sample_transition_atom_at_zero(law, rng):
    x0, t = law.h0, 1.0
    draws = limit.sample_transition(np.full(40_000, x0), t, law, rng)
    p0 = np.exp(-x0 / (law.c * t))
    frac = (draws == 0.0).mean()
    assert abs(frac - p0) < 4 * np.sqrt(p0 * (1 - p0) / draws.size)


def test_sample_path_markov_consistency(law, rng):
    grid = np.array([0.25, 0.5, 1.0])
    paths = limit.sample_path(grid, law, rng, n_paths=60_000)
    assert paths.shape == (60_000, 3)
    # each marginal matches the one-step exact transition law
    for k, t in enumerate(grid):
        direct = limit.sample_transition(np.full(60_000, law.h0), t, law, rng)
        assert ks_2samp(paths[:, k], direct).pvalue > 1e-3
    # absorbed paths stay absorbed
    dead = paths[:, 1] == 0.0
    assert np.all(paths[dead, 2] == 0.0)


def test_lt_query_validation():
    with pytest.raises(ValueError):
        limit.LTQuery((), ())
    with pytest.raises(ValueError):
        limit.LTQuery((1.0, 0.5), (1.0, 1.0))
    with pytest.raises(ValueError):
        limit.LTQuery((0.5, 1.0), (1.0,))


def test_finite_dim_lt_degenerate_fold(law):
    q = limit.LTQuery((1.0,), (1.0,))
    assert limit.finite_dim_lt(q, law) == limit.phi(1.0, 1.0, law)
    # zero lambda at the later time collapses to the earlier marginal
    q2 = limit.LTQuery((0.5, 1.0), (1.0, 0.0))
    assert limit.finite_dim_lt(q2, law) == pytest.approx(
        limit.phi(0.5, 1.0, law), rel=1e-14)


def test_euler_sde_matches_exact_law(law):
    grid, paths = limit.euler_sde(1e-3, 1.0, law, np.random.default_rng(3),
                                  n_paths=20_000)
    assert grid[-1] == pytest.approx(1.0)
    exact = limit.sample_transition(np.full(20_000, law.h0), 1.0, law,
                                    np.random.default_rng(4))
    assert ks_2samp(paths[:, -1], exact).statistic < 0.03
