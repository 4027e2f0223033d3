"""Deterministic seed derivation for parallel generation.

Every independently generated object (graph, trajectory, prediction) owns its
own numpy Generator whose seed is derived from the master seed with SplitMix64.
The derivation is pure integer arithmetic, so external tools can reproduce any
stream from the documented formula:

    graph_seed      = splitmix64(master_seed ^ graph_index)
    trajectory_seed = splitmix64(graph_seed ^ trajectory_index)

Nested derivations chain the same mix, one index per level.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One output of the SplitMix64 mixer for the given 64-bit state."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_seed(seed: int, *indices: int) -> int:
    """Derive a child seed by folding each index through splitmix64."""
    s = seed & _MASK64
    for idx in indices:
        s = splitmix64(s ^ (idx & _MASK64))
    return s


def spawn(seed: int, *indices: int) -> np.random.Generator:
    """Generator seeded by `child_seed(seed, *indices)` (PCG64)."""
    return np.random.default_rng(child_seed(seed, *indices))
