import io

import numpy as np
import pytest

from walklim import model, walk
from walklim.errors import ExcursionTooLong, UnsupportedL


def test_excursion_shape(q06, rng):
    exc = walk.simulate_excursion(q06, rng)
    s = exc.steps
    assert s[0] == 0 and s[1] == 1 and s[-1] == 0
    assert (s[1:-1] > 0).all()
    inc = np.diff(s)
    assert set(np.unique(inc)) <= {-1, 1, 2}
    assert exc.length == len(s) - 1
    assert exc.max_height == s.max()


def test_excursion_cap(q06):
    # a cap of 2 can only complete the two-step excursion 0,1,0
    rng = np.random.default_rng(0)
    seen_short = 0
    for _ in range(50):
        try:
            exc = walk.simulate_excursion(q06, rng, cap=2)
            assert exc.length == 2
            seen_short += 1
        except ExcursionTooLong as e:
            assert e.partial_length >= 1
    assert seen_short > 0


def test_local_time_counts(q06):
    exc = walk.ExcursionRecord(np.array([0, 1, 2, 1, 2, 4, 3, 2, 1, 0]))
    assert walk.local_time([exc], 1) == 3
    assert walk.local_time([exc], 2) == 3
    assert walk.local_time([exc], 4) == 1
    assert walk.local_time([exc], 5) == 0
    assert walk.local_time([exc, exc], 0) == 3  # N + 1 shared zeros


def test_extract_branching_hand_example():
    # path 0,1,3,2,1,0: the +1 step from 0 gives U1(0)=1, the +2 step
    # from 1 gives U2(1)=1 and U1(2)=1
    exc = walk.ExcursionRecord(np.array([0, 1, 3, 2, 1, 0]))
    U = walk.extract_branching(exc)
    np.testing.assert_array_equal(U, [[1, 0], [0, 1], [1, 0]])
    assert walk.verify_identity_all_levels(exc)


def test_extract_branching_rejects_large_jumps():
    exc = walk.ExcursionRecord(np.array([0, 1, 4, 3, 2, 1, 0]))
    with pytest.raises(UnsupportedL):
        walk.extract_branching(exc)


def test_identity_every_level(q06, rng):
    for _ in range(200):
        exc = walk.simulate_excursion(q06, rng)
        assert walk.verify_identity_all_levels(exc)
        for j in range(1, exc.max_height + 2):
            assert walk.verify_identity(exc, j)


def test_scaled_local_time_boundary(q06):
    assert walk.scaled_local_time([], q06, 100, 0.001) == pytest.approx(1.25)


def test_profile_matches_direct_counts(q06, rng):
    batch = walk.run_excursions(q06, 50, rng)
    profile = walk.LocalTimeProfile()
    for exc in batch.excursions:
        profile.add(exc)
    for j in range(0, 12):
        assert profile.local_time(j) == walk.local_time(batch.excursions, j)


def test_run_excursions_counts_discards(q06):
    rng = np.random.default_rng(5)
    batch = walk.run_excursions(q06, 200, rng, cap=8, keep_paths=False)
    assert batch.excursions == []
    assert batch.n_discarded > 0
    assert batch.discarded_steps >= batch.n_discarded


def test_write_excursion_csv(q06, rng):
    batch = walk.run_excursions(q06, 3, rng)
    buf = io.StringIO()
    walk.write_excursion_csv(batch.excursions, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "excursion_id,length,max_height"
    assert len(lines) == 4
