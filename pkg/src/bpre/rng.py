"""Counter-based random streams for reproducible parallel replication.

Streams are Philox generators keyed by (master_seed, *path). Distinct paths
give statistically independent streams, so replicate chunks can run in any
order, on any number of threads, and reproduce bit-identically.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ROLE_SIM", "ROLE_MOMENTS", "ROLE_CONTROL", "stream"]

# Role tags keep different uses of one master seed from colliding.
ROLE_SIM = 0
ROLE_MOMENTS = 1
ROLE_CONTROL = 2


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (master_seed, *path), e.g. (seed, chunk, role)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
