"""Seeded random profile generators used by tests, demos and sweeps."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .profile import Profile


def random_profile(rng: np.random.Generator, m: int, blocks: int, max_weight: int = 20) -> Profile:
    """Up to ``blocks`` random rankings with integer weights, normalized."""
    rankings = [rng.permutation(m).tolist() for _ in range(blocks)]
    weights = rng.integers(1, max_weight + 1, size=blocks).tolist()
    return Profile.from_rankings(zip(weights, rankings), m)


def rotation_closed_profile(rng: np.random.Generator, m: int, base_blocks: int = 2) -> Profile:
    """Random rankings closed under the rotation c -> c + 1 (mod m), equal weights.

    Every candidate then plays the same role, so all pairwise fractions are
    invariant under the rotation.
    """
    pairs = []
    for _ in range(base_blocks):
        r = rng.permutation(m).tolist()
        for shift in range(m):
            pairs.append((1, [(c + shift) % m for c in r]))
    return Profile.from_rankings(pairs, m)


def regular_profile(rng: np.random.Generator, m: int, theta, blocks: int = 6) -> Profile:
    """Random profile whose pairwise fractions all lie within [1 - theta, theta].

    A random profile P is blended with its symmetrization (P plus reversed P),
    which has every fraction equal to 1/2; the blend weight shrinks each
    margin ``s - 1/2`` by the same factor.
    """
    theta = Fraction(theta) if not isinstance(theta, float) else Fraction(str(theta))
    base = random_profile(rng, m, blocks)
    s = base.tournament_matrix().s
    dev = max((abs(s[a][b] - Fraction(1, 2)) for a in range(m) for b in range(m) if a != b), default=Fraction(0))
    t = Fraction(1) if dev == 0 else min(Fraction(1), (theta - Fraction(1, 2)) / dev)
    pairs = []
    for b in base.blocks:
        pairs.append((t * b.weight + (1 - t) * b.weight / 2, b.ranking))
        pairs.append(((1 - t) * b.weight / 2, b.ranking[::-1]))
    return Profile.from_rankings(pairs, m)
