"""Seeded random number generation.

Every stochastic component in the package draws from a PCG64 generator made
here, so identical seeds give bitwise-identical streams across runs.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive n independent child generators deterministically."""
    seeds = rng.integers(0, 2**63 - 1, size=n)
    return [make_rng(int(s)) for s in seeds]
