"""Shared deterministic generators for laminate trees."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from lamprobe import Chart, Cone, Coords, LaminateTree, Matrix, flatten
from lamprobe.chart import cone_family
from lamprobe.laminate import SplitNode, leaf, split


def rational(rng: random.Random, lo=-4, hi=4, den=4) -> F:
    return F(rng.randint(lo, hi), rng.randint(1, den))


def random_rank_one_2x2(rng: random.Random) -> Matrix:
    while True:
        v = (rational(rng), rational(rng))
        n = (F(rng.randint(-3, 3)), F(rng.randint(-3, 3)))
        if (v[0] or v[1]) and (n[0] or n[1]):
            return Matrix([[vi * nj for nj in n] for vi in v])


def random_matrix_tree(rng: random.Random, max_depth: int = 4) -> LaminateTree:
    """Exact-rational 2x2 laminate tree rooted at the zero matrix."""

    def grow(point: Matrix, weight: F, depth: int) -> SplitNode:
        if depth >= max_depth or (depth >= 1 and rng.random() < 0.35):
            return leaf(point, weight)
        step = random_rank_one_2x2(rng)
        t1 = F(rng.randint(1, 5), rng.randint(1, 3))
        t2 = F(rng.randint(1, 5), rng.randint(1, 3))
        w_right = weight * t2 / (t1 + t2)
        w_left = weight * t1 / (t1 + t2)
        left = grow(point - step.scale(t2), w_left, depth + 1)
        right = grow(point + step.scale(t1), w_right, depth + 1)
        return split(point, weight, left, right)

    return LaminateTree(grow(Matrix.zero(2, 2), F(1), 0))


def random_quadric_direction(rng: random.Random, tau: F) -> Coords:
    """Exact rational member of the quadric cone at tau."""
    choice = rng.randint(0, 5)
    if choice == 0:
        return Coords(F(1), F(0), F(0))
    if choice == 1:
        return Coords(F(0), F(1), F(0))
    if choice == 2:
        return Coords(F(0), F(0), F(1))
    c = F(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2]))
    if c + tau * (1 + 2 * c) == 0:
        return Coords(F(0), F(0), F(1))
    first, second = cone_family(c, tau)
    return first if choice == 3 else second


def random_coords_tree(rng: random.Random, tau: F,
                       depth: int = 3) -> LaminateTree:
    """Full exact coordinate-space laminate of the given depth whose split
    directions all lie in the quadric cone at tau; leaves are pairwise
    distinct (regenerated otherwise)."""

    def grow(point: Coords, weight: F, d: int) -> SplitNode:
        if d == depth:
            return leaf(point, weight)
        direction = random_quadric_direction(rng, tau)
        t1 = F(rng.randint(1, 4), 4)
        t2 = F(rng.randint(1, 4), 4)
        w_right = weight * t2 / (t1 + t2)
        w_left = weight * t1 / (t1 + t2)
        left = grow(point - direction.scale(t2), w_left, d + 1)
        right = grow(point + direction.scale(t1), w_right, d + 1)
        return split(point, weight, left, right)

    while True:
        tree = LaminateTree(grow(Coords(F(0), F(0), F(0)), F(1), 0))
        leaves = [n.point.entries() for _, n in tree.nodes() if n.is_leaf]
        if len(set(leaves)) == len(leaves):
            return tree


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)
