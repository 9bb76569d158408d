"""Deterministic derivation of independent random streams.

Every random draw in the library comes from a Generator built by `stream`.
A stream is identified by the experiment seed plus a tuple of integer tags
(purpose constant, iteration, trial, ...), so results are reproducible
regardless of scheduling and trials could run in any order or in parallel.
"""

from __future__ import annotations

import numpy as np

# purpose tags; first entry of every stream's tag tuple
INIT = 0
PERTURB = 1
ROLLOUT = 2
VOTES = 3
EVAL = 4
BASELINE = 5
DIAG = 6


def stream(seed: int, *tags: int) -> np.random.Generator:
    """Return a fresh Generator for (seed, *tags).

    SeedSequence hashes the whole entropy tuple, so distinct tag tuples give
    statistically independent streams and the same tuple always gives the
    same stream.
    """
    entropy = [int(seed) & 0xFFFFFFFF] + [int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
