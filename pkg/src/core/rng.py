from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def as_generator(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator from an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def as_seed_sequence(seed: int | np.random.SeedSequence | None) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn_seeds(
    seed: int | np.random.SeedSequence | None, count: int
) -> list[np.random.SeedSequence]:
    """
    ``count`` independent child sequences, stable for a given root seed.

    Equal to ``root.spawn(count)`` on a fresh root, but the root is left
    untouched, so repeated calls give the same children. A root that is itself
    a spawned child keeps its ``spawn_key`` as the prefix of every child key.
    """
    root = as_seed_sequence(seed)
    return [child_seed(root.entropy, i, root.spawn_key) for i in range(count)]


def child_seed(
    root_entropy: int, index: int, spawn_key: tuple[int, ...] = ()
) -> np.random.SeedSequence:
    """Child ``index`` of the root ``SeedSequence(root_entropy, spawn_key=spawn_key)``."""
    return np.random.SeedSequence(int(root_entropy), spawn_key=(*spawn_key, int(index)))
