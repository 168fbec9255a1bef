"""Excursion-by-excursion simulation of the reflected (1,L) walk.

An excursion starts at 0, takes the deterministic reflection step to 1, and
runs until the first return to 0.  The walk is null recurrent (excursion
lengths have infinite mean), so every simulation carries a step budget and
reports how many excursions were discarded for exceeding it.

Local times are exact integer counts; the branching arrays U are extracted
from paths in one vectorized pass.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ExcursionTooLong, UnsupportedL
from .model import ModelParams

DEFAULT_CAP = 100_000_000

_CHUNK0 = 64
_CHUNK_MAX = 65_536


@dataclass(frozen=True)
class ExcursionRecord:
    """One completed excursion: the path X_0=0, X_1=1, ..., X_tau=0."""

    steps: np.ndarray

    def __post_init__(self):
        self.steps.setflags(write=False)

    @property
    def length(self) -> int:
        """tau, the number of steps."""
        return len(self.steps) - 1

    @property
    def max_height(self) -> int:
        return int(self.steps.max())


def _increment_table(params: ModelParams):
    # Draw u ~ U[0,1); u < q maps to -1, then +1, ..., +L in order.
    edges = np.cumsum([params.q, *params.p])
    values = np.array([-1] + list(range(1, params.L + 1)), dtype=np.int64)
    return edges, values


def simulate_excursion(params: ModelParams, rng: np.random.Generator,
                       cap: int = DEFAULT_CAP) -> ExcursionRecord:
    """Simulate one excursion, drawing increments in growing chunks.

    Raises ExcursionTooLong (carrying the partial length) if the walk has
    not returned to 0 after `cap` steps; the caller must account for the
    discard.
    """
    if cap < 2:
        raise ExcursionTooLong(partial_length=min(cap, 1))
    edges, values = _increment_table(params)
    pieces = [np.array([0, 1], dtype=np.int64)]
    pos = 1
    length = 1
    chunk = _CHUNK0
    while True:
        if length >= cap:
            raise ExcursionTooLong(partial_length=length)
        n = min(chunk, cap - length)
        u = rng.random(n)
        idx = np.minimum(np.searchsorted(edges, u, side="right"), params.L)
        path = pos + np.cumsum(values[idx])
        hits = np.nonzero(path == 0)[0]
        if hits.size:
            pieces.append(path[: hits[0] + 1])
            return ExcursionRecord(np.concatenate(pieces))
        pieces.append(path)
        pos = int(path[-1])
        length += n
        chunk = min(2 * chunk, _CHUNK_MAX)


def local_time(excursions: Sequence[ExcursionRecord], j: int) -> int:
    """L(j; tau_N): visits to j over the concatenated excursions.

    For j >= 1 this is the sum of per-excursion counts (the i.i.d. xi_r of
    the excursion decomposition).  For j = 0 the concatenation shares its
    boundary zeros, so the count is N + 1.
    """
    if j < 0:
        raise ValueError("position must be >= 0")
    if j == 0:
        return len(excursions) + 1
    return sum(int(np.count_nonzero(exc.steps == j)) for exc in excursions)


def extract_branching(excursion: ExcursionRecord) -> np.ndarray:
    """Branching array U of shape (max_height, 2) for an L = 2 excursion.

    U[i-1] = (U1(i-1), U2(i-1)) where U1(i-1) counts steps from below i
    landing at i and U2(i-1) counts steps from below i landing at i+1.
    A +1 step from x contributes to U1(x); a +2 step from x contributes to
    both U1(x+1) and U2(x).
    """
    steps = excursion.steps
    inc = np.diff(steps)
    if inc.max() > 2:
        raise UnsupportedL("branching extraction is defined for L=2 excursions only")
    height = int(steps.max())
    start = steps[:-1]
    up1 = start[inc == 1]
    up2 = start[inc == 2]
    U = np.zeros((height, 2), dtype=np.int64)
    U[:, 0] = np.bincount(up1, minlength=height)[:height]
    if up2.size:
        U[:, 0] += np.bincount(up2 + 1, minlength=height)[:height]
        U[:, 1] = np.bincount(up2, minlength=height)[:height]
    return U


def verify_identity(excursion: ExcursionRecord, j: int) -> bool:
    """Check L(j; tau_1) == U1(j-1) + U1(j) + U2(j) for one excursion."""
    if j < 1:
        raise ValueError("the local-time identity is stated for j >= 1")
    U = extract_branching(excursion)

    def u(n, k):
        return int(U[n, k]) if 0 <= n < len(U) else 0

    return local_time([excursion], j) == u(j - 1, 0) + u(j, 0) + u(j, 1)


def verify_identity_all_levels(excursion: ExcursionRecord) -> bool:
    """Vectorized identity check over every level 1 <= j <= max_height."""
    U = extract_branching(excursion)
    h = len(U)
    counts = np.bincount(excursion.steps[1:], minlength=h + 2)
    u1 = np.concatenate([U[:, 0], [0]])
    u2 = np.concatenate([U[:, 1], [0]])
    # L(j) for j = 1..h must equal U1(j-1) + U1(j) + U2(j).
    lhs = counts[1 : h + 1]
    rhs = U[:, 0] + u1[1 : h + 1] + u2[1 : h + 1]
    return bool(np.array_equal(lhs, rhs))


def scaled_local_time(excursions: Sequence[ExcursionRecord], params: ModelParams,
                      N: int, x: float) -> float:
    """l_N(x) = L(floor(Nx); tau_N) / N, with the boundary convention.

    For 0 <= Nx < 1 the value is the constant 2/sigma^2 rather than a path
    count.
    """
    if N * x < 1.0:
        return 2.0 / params.sigma2
    return local_time(excursions, int(np.floor(N * x))) / N


@dataclass
class LocalTimeProfile:
    """Streaming accumulator of exact local-time counts over excursions."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    n_excursions: int = 0

    def add(self, excursion: ExcursionRecord) -> None:
        c = np.bincount(excursion.steps[1:])
        if len(c) > len(self.counts):
            self.counts = np.concatenate(
                [self.counts, np.zeros(len(c) - len(self.counts), dtype=np.int64)]
            )
        self.counts[: len(c)] += c
        self.n_excursions += 1

    def local_time(self, j: int) -> int:
        if j == 0:
            return self.n_excursions + 1
        return int(self.counts[j]) if j < len(self.counts) else 0


@dataclass
class ExcursionBatch:
    """Result of a capped batch of excursions."""

    excursions: list[ExcursionRecord]
    n_discarded: int
    discarded_steps: int


def run_excursions(params: ModelParams, n: int, rng: np.random.Generator,
                   cap: int = DEFAULT_CAP, keep_paths: bool = True,
                   on_excursion=None) -> ExcursionBatch:
    """Simulate until `n` excursions complete, counting discards.

    keep_paths=False drops the path arrays after the optional per-excursion
    callback has seen them (excursion lengths are heavy-tailed, so storing
    paths at scale is a debug mode).
    """
    out: list[ExcursionRecord] = []
    n_discarded = 0
    discarded_steps = 0
    done = 0
    while done < n:
        try:
            exc = simulate_excursion(params, rng, cap=cap)
        except ExcursionTooLong as e:
            n_discarded += 1
            discarded_steps += e.partial_length
            continue
        if on_excursion is not None:
            on_excursion(exc)
        if keep_paths:
            out.append(exc)
        done += 1
    return ExcursionBatch(excursions=out, n_discarded=n_discarded,
                          discarded_steps=discarded_steps)


def write_excursion_csv(excursions: Iterable[ExcursionRecord], fh) -> None:
    """One diagnostic row per excursion: excursion_id, length, max_height."""
    w = csv.writer(fh)
    w.writerow(["excursion_id", "length", "max_height"])
    for i, exc in enumerate(excursions):
        w.writerow([i, exc.length, exc.max_height])
