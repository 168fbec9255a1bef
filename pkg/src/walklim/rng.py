"""Reproducible random streams for (optionally parallel) workers."""

from __future__ import annotations

import numpy as np


def worker_streams(seed: int, n_workers: int) -> list[np.random.Generator]:
    """Independent generators derived from one seed, one per worker.

    Results aggregated in worker order are reproducible for fixed
    (seed, n_workers) regardless of scheduling.
    """
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_workers)]


def split_count(total: int, n_workers: int) -> list[int]:
    """Deterministic near-even partition of a job count across workers."""
    base, extra = divmod(total, n_workers)
    return [base + (1 if i < extra else 0) for i in range(n_workers)]
