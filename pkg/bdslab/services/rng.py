"""
Deterministic random streams for Monte Carlo replicas.

Each replica owns a ``SeedSequence([master_seed, replica_index])`` root and
spawns one child per concern, so results never depend on how replicas are
scheduled across workers. The bit generator is numpy's PCG64.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReplicaStreams:
    # Which miner group finds each fPoW
    finder: np.random.Generator
    # pPoW submissions between fPoWs (share-level mode only)
    shares: np.random.Generator


def make_streams(master_seed: int, replica_index: int) -> ReplicaStreams:
    """
    Create the independent streams of one replica.

    Structure:
      replica
        ├── finder
        └── shares
    """
    root = np.random.SeedSequence([master_seed, replica_index])
    ss_finder, ss_shares = root.spawn(2)
    return ReplicaStreams(
        finder=np.random.Generator(np.random.PCG64(ss_finder)),
        shares=np.random.Generator(np.random.PCG64(ss_shares)),
    )
