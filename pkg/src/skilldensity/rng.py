"""Deterministic, splittable random streams for reproducible simulation.

Every sampling operation in this package is a pure function of its inputs
and an integer seed. Independent sub-streams (per trial, per retry) are
derived from a root seed and an integer key path, so parallel trials never
share state and a rerun with the same seed is bit-identical.
"""

from __future__ import annotations

import numpy as np


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator on the stream identified by (seed, *key)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def derive_seed(seed: int, *key: int) -> int:
    """Stable integer seed for the child stream (seed, *key)."""
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)[0])
