"""Shared helpers: random modules, random maps, vanishing chains."""

import numpy as np
import pytest

from stmodcat.modrep import Ring, module_from_partition
from stmodcat.stcat import DIRECT, stable_hom

RINGS = [Ring(2, 2), Ring(2, 3), Ring(2, 4),
         Ring(3, 2), Ring(3, 3), Ring(3, 4)]


def random_module(rng, ring, max_dim=8):
    parts = []
    total = 0
    while True:
        l = int(rng.integers(1, ring.m + 1))
        if total + l > max_dim or (parts and rng.random() < 0.4):
            break
        parts.append(l)
        total += l
    if not parts:
        parts = [1]
    return module_from_partition(ring, parts)


def random_stable_map(rng, A, B):
    S = stable_hom(A, B)
    return S.from_stable_coords(rng.integers(0, A.ring.p, size=S.sdim))


def random_in_kernel(rng, mat, space):
    """Random stable class in the kernel of a composition operator."""
    from stmodcat.linalg import nullspace
    kern = nullspace(mat)
    coeffs = rng.integers(0, space.p, size=kern.rows)
    v = (coeffs @ kern.a) % space.p if kern.rows else np.zeros(space.sdim, dtype=np.int64)
    return space.from_stable_coords(v)


def random_vanishing_chain(rng, ring, length, max_dim=6):
    """Maps (f_length, ..., f_1) with all consecutive composites stably zero.

    Built middle-out: each new map is sampled from the kernel of the
    relevant composition operator, so the vanishing is exact by
    construction.
    """
    from stmodcat.stcat import post_matrix, pre_matrix

    objs = [random_module(rng, ring, max_dim) for _ in range(length + 1)]
    maps = [None] * length  # maps[i] : objs[i] -> objs[i+1], f_{i+1} in bracket order
    maps[0] = random_stable_map(rng, objs[0], objs[1])
    for i in range(1, length):
        # f_{i+1} . f_i must vanish: sample in ker( (-) . f_i )
        space = stable_hom(objs[i], objs[i + 1])
        mat = pre_matrix(maps[i - 1], objs[i + 1])
        maps[i] = random_in_kernel(rng, mat, space)
    return list(reversed(maps))  # bracket order: f_length first
