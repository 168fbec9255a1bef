import numpy as np
import pytest

from walklim import branching, model, walk
from walklim.errors import PopulationCapExceeded, UnsupportedL


def test_offspring_pmf_closed_form(q06):
    p1, p2, q = 0.2, 0.2, 0.6
    # type 1: (u1+u2)!/(u1! u2!) p1^u1 p2^u2 q
    assert branching.offspring_pmf(1, 0, 0, q06) == pytest.approx(q)
    assert branching.offspring_pmf(1, 1, 1, q06) == pytest.approx(2 * p1 * p2 * q)
    assert branching.offspring_pmf(1, 2, 0, q06) == pytest.approx(p1**2 * q)
    # type 2 adds one deterministic type-1 child
    assert branching.offspring_pmf(2, 1, 0, q06) == pytest.approx(q)
    assert branching.offspring_pmf(2, 0, 0, q06) == 0.0
    assert branching.offspring_pmf(1, -1, 0, q06) == 0.0


@pytest.mark.parametrize("parent", [1, 2])
def test_offspring_pmf_normalized_and_mean(q06, parent):
    c = model.derive_constants(q06)
    grid = np.array([[branching.offspring_pmf(parent, u1, u2, q06)
                      for u2 in range(80)] for u1 in range(80)])
    assert grid.sum() == pytest.approx(1.0, abs=1e-12)
    m1 = (np.arange(80)[:, None] * grid).sum()
    m2 = (np.arange(80)[None, :] * grid).sum()
    np.testing.assert_allclose([m1, m2], c.M[parent - 1], atol=1e-10)


def test_offspring_covariance_matches_constants(q06):
    # covariance of the offspring law vs the closed-form b matrices
    c = model.derive_constants(q06)
    for parent in (1, 2):
        grid = np.array([[branching.offspring_pmf(parent, u1, u2, q06)
                          for u2 in range(100)] for u1 in range(100)])
        u1g, u2g = np.meshgrid(np.arange(100), np.arange(100), indexing="ij")
        m = np.array([(u1g * grid).sum(), (u2g * grid).sum()])
        cov = np.array([
            [(u1g * u1g * grid).sum(), (u1g * u2g * grid).sum()],
            [(u2g * u1g * grid).sum(), (u2g * u2g * grid).sum()],
        ]) - np.outer(m, m)
        np.testing.assert_allclose(cov, c.b_cov[parent - 1], atol=1e-8)


def test_sample_offspring_matches_pmf(q06, rng):
    # the full goodness-of-fit lives in test_analysis; here a cheap moment check
    draws = np.array([branching.sample_offspring(1, q06, rng) for _ in range(20_000)])
    c = model.derive_constants(q06)
    se = draws.std(axis=0, ddof=1) / np.sqrt(len(draws))
    np.testing.assert_array_less(np.abs(draws.mean(axis=0) - c.M[0]), 4 * se)


def test_step_population_preserves_mean(q06, rng):
    c = model.derive_constants(q06)
    v1 = np.full(200_000, 3, dtype=np.int64)
    v2 = np.full(200_000, 2, dtype=np.int64)
    w1, w2 = branching.step_population(v1, v2, q06, rng)
    target = np.array([3.0, 2.0]) @ c.M
    se1 = w1.std(ddof=1) / np.sqrt(w1.size)
    se2 = w2.std(ddof=1) / np.sqrt(w2.size)
    assert abs(w1.mean() - target[0]) < 4 * se1
    assert abs(w2.mean() - target[1]) < 4 * se2


def test_simulate_generations_paths_match_batched_law(q06):
    # per-particle and batched generation steps agree in distribution
    rng_a = np.random.default_rng(1)
    rng_b = np.random.default_rng(2)
    tot_a = [sum(branching.simulate_generations(3, q06, rng_a)[-1])
             for _ in range(4000)]
    v1 = np.ones(4000, dtype=np.int64)
    v2 = np.zeros(4000, dtype=np.int64)
    for _ in range(3):
        v1, v2 = branching.step_population(v1, v2, q06, rng_b)
    tot_b = v1 + v2
    from scipy.stats import ks_2samp
    assert ks_2samp(tot_a, tot_b).pvalue > 1e-3


def test_simulate_generations_cap(q06):
    with pytest.raises(PopulationCapExceeded):
        for seed in range(500):
            branching.simulate_generations(100, q06, np.random.default_rng(seed),
                                           pop_cap=3)


def test_gf_recursion_closed_form(q06):
    ab = branching.gf_recursion(2, q06)
    np.testing.assert_allclose(ab[0], [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(ab[2], [8.0 / 9.0, 5.0 / 9.0], rtol=1e-12)


def test_gf_g_values(q06):
    s1, s2 = np.exp(-2.0), np.exp(-1.0)
    direct = 0.6 / (1.0 - 0.2 * s1 - 0.2 * s2)
    assert branching.gf_g(1, s1, s2, q06) == pytest.approx(direct, rel=1e-12)
    assert branching.gf_g(2, s1, s2, q06) == pytest.approx(s1 * direct, rel=1e-12)
    assert branching.gf_fn(1, 1, s1, s2, q06) == pytest.approx(0.6671432626066601,
                                                               rel=1e-12)


@pytest.mark.parametrize("start", [1, 2])
@pytest.mark.parametrize("q", [0.55, 0.6, 0.65])
def test_gf_fn_vs_enumeration(start, q):
    params = model.params_from_q(q)
    for n in range(1, 5):
        pmf = branching.enumerate_pmf(start, n, params)
        for s1 in (0.0, 0.5, 0.9):
            for s2 in (0.0, 0.5, 0.9):
                gap = abs(branching.gf_fn(start, n, s1, s2, params)
                          - pmf.pgf(s1, s2))
                assert gap <= pmf.truncation_bound + 1e-12


def test_enumerate_pmf_one_generation(q06):
    pmf = branching.enumerate_pmf(1, 1, q06)
    for u1 in range(6):
        for u2 in range(6):
            assert pmf.probs[u1, u2] == pytest.approx(
                branching.offspring_pmf(1, u1, u2, q06), abs=1e-12)


def test_enumerate_pmf_mean_matches_matrix_power(q06):
    c = model.derive_constants(q06)
    pmf = branching.enumerate_pmf(1, 3, q06)
    np.testing.assert_allclose(pmf.mean(), np.linalg.matrix_power(c.M, 3)[0],
                               atol=1e-6)


def test_extracted_type2_offspring_matches_pmf(q06):
    # pure type-2 transitions harvested from real excursions follow the
    # shifted offspring law
    rng = np.random.default_rng(9)
    counts = {}
    total = 0
    batch = walk.run_excursions(q06, 4000, rng, keep_paths=True)
    for exc in batch.excursions:
        U = walk.extract_branching(exc)
        for n in range(len(U) - 1):
            # a level with exactly one type-2 particle and no type-1 gives
            # one clean type-2 offspring observation
            if U[n, 0] == 0 and U[n, 1] == 1:
                key = (int(U[n + 1, 0]), int(U[n + 1, 1]))
                counts[key] = counts.get(key, 0) + 1
                total += 1
    assert total > 300
    for key, cnt in counts.items():
        p = branching.offspring_pmf(2, key[0], key[1], q06)
        se = np.sqrt(max(p * (1 - p), 1e-12) / total)
        assert abs(cnt / total - p) < max(5 * se, 0.02)
