"""Uncertainty sets for the follower's objective vector.

Four shapes are supported: coordinate boxes, explicit finite scenario
lists, convex hulls of finitely many points, and coordinatewise products
of finite value sets.  All entries are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .numeric import ONE, ZERO, as_matrix, as_vector


@dataclass(frozen=True)
class Interval:
    """Box [lower_1, upper_1] x ... x [lower_n, upper_n]."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", as_vector(self.lower))
        object.__setattr__(self, "upper", as_vector(self.upper))
        if len(self.lower) != len(self.upper):
            raise ValueError("interval bound dimensions differ")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("interval has lower > upper")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def free_indices(self) -> tuple:
        return tuple(i for i in range(self.dim)
                     if self.lower[i] != self.upper[i])


@dataclass(frozen=True)
class DiscreteSet:
    """Explicit finite list of scenario vectors."""

    scenarios: tuple

    def __post_init__(self):
        object.__setattr__(self, "scenarios", as_matrix(self.scenarios))
        if not self.scenarios:
            raise ValueError("discrete uncertainty needs at least one scenario")

    @property
    def dim(self) -> int:
        return len(self.scenarios[0])


@dataclass(frozen=True)
class ConvexHull:
    """Convex hull of finitely many explicitly listed points."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", as_matrix(self.points))
        if not self.points:
            raise ValueError("convex hull needs at least one point")

    @property
    def dim(self) -> int:
        return len(self.points[0])


@dataclass(frozen=True)
class ProductFinite:
    """Coordinatewise product of finite value sets (uncorrelated choice)."""

    choices: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "choices", tuple(as_vector(c) for c in self.choices))
        if any(len(c) == 0 for c in self.choices):
            raise ValueError("every coordinate needs at least one value")

    @property
    def dim(self) -> int:
        return len(self.choices)

    def grid_size(self) -> int:
        total = 1
        for c in self.choices:
            total *= len(c)
        return total


UncertaintySet = Union[Interval, DiscreteSet, ConvexHull, ProductFinite]


def uncertainty_dim(unc: UncertaintySet) -> int:
    return unc.dim


def contains_scenario(unc: UncertaintySet, c: Sequence) -> bool:
    """Exact membership test of a vector in the uncertainty set."""
    c = as_vector(c)
    if len(c) != unc.dim:
        return False
    if isinstance(unc, Interval):
        return all(lo <= ci <= hi
                   for lo, ci, hi in zip(unc.lower, c, unc.upper))
    if isinstance(unc, DiscreteSet):
        return c in unc.scenarios
    if isinstance(unc, ProductFinite):
        return all(ci in vals for ci, vals in zip(c, unc.choices))
    if isinstance(unc, ConvexHull):
        from .lp import LpStatus, Polyhedron, Sense, solve_lp

        # Feasibility of lambda >= 0, sum lambda = 1, sum lambda p_k = c.
        k = len(unc.points)
        rows = [[-ONE if j == i else ZERO for j in range(k)]
                for i in range(k)]
        rhs = [ZERO] * k
        rows.append([ONE] * k)
        rhs.append(ONE)
        rows.append([-ONE] * k)
        rhs.append(-ONE)
        for coord in range(unc.dim):
            scores = [unc.points[j][coord] for j in range(k)]
            rows.append(scores)
            rhs.append(c[coord])
            rows.append([-s for s in scores])
            rhs.append(-c[coord])
        probe = solve_lp(Polyhedron(rows, rhs), (ZERO,) * k, Sense.MAX,
                         purify=False)
        return probe.status is LpStatus.OPTIMAL
    raise TypeError(f"unknown uncertainty kind: {type(unc).__name__}")


def box_corner_scenarios(unc: Interval, cap: int = 4096) -> list:
    """All corners of the box over its free coordinates (fixed ones pinned)."""
    free = unc.free_indices()
    if 2 ** len(free) > cap:
        raise ValueError(f"too many box corners: 2^{len(free)} > {cap}")
    corners = [tuple(unc.lower)]
    for i in free:
        corners = [c[:i] + (val,) + c[i + 1:]
                   for c in corners for val in (unc.lower[i], unc.upper[i])]
    return corners
