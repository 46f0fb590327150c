"""Independent brute-force references for validating the solvers.

Nothing here reuses the simplex, the face machinery or the bilevel
solver logic: follower responses are recomputed from scratch by
enumerating basic solutions of Y(x) with raw Gaussian elimination, and
leader/adversary loops are plain nested enumeration.  The only shared
code is the rational arithmetic itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from math import comb

from .bilevel import (
    Caps,
    DEFAULT_CAPS,
    ExplicitList,
    Mode,
    RobustBilevelInstance,
    solve_robust,
)
from .compiler import Formula, evaluate
from .geometry import CapExceededError
from .numeric import Fraction, as_vector, dot, gauss_solve
from .uncertainty import (
    ConvexHull,
    DiscreteSet,
    Interval,
    ProductFinite,
    box_corner_scenarios,
)


class Reference(Enum):
    DISCRETE_ENUMERATION = "discrete_enumeration"
    GRID_SAMPLE = "grid_sample"


@dataclass(frozen=True)
class OracleVerdict:
    expected: Fraction
    actual: Fraction
    agree: bool
    witness: str


def sat_oracle(formula: Formula, cap: int = 22) -> bool:
    """Exhaustive satisfiability over all variables, leader ones included."""
    total = formula.p + formula.n
    if total > cap:
        raise CapExceededError(f"{total} variables exceed the {cap}-var cap")
    for bits in itertools.product((0, 1), repeat=total):
        if evaluate(formula, bits[:formula.p], bits[formula.p:]):
            return True
    return False


def qsat_oracle(formula: Formula, cap: int = 22) -> bool:
    """Exhaustive check of: some x makes f(x, y) = 1 for every y."""
    if formula.p + formula.n > cap:
        raise CapExceededError(
            f"{formula.p + formula.n} variables exceed the {cap}-var cap")
    for x_bits in itertools.product((0, 1), repeat=formula.p):
        if all(evaluate(formula, x_bits, y_bits)
               for y_bits in itertools.product((0, 1), repeat=formula.n)):
            return True
    return False


def robust_single_level_oracle(x_set, scenarios, cap: int = 10 ** 6):
    """max over X of min over scenarios of c·x, by full enumeration."""
    x_vectors = [as_vector(v) for v in x_set]
    scenario_rows = [as_vector(c) for c in scenarios]
    if not x_vectors or not scenario_rows:
        raise ValueError("oracle needs a nonempty X and scenario list")
    if len(x_vectors) * len(scenario_rows) > cap:
        raise CapExceededError("X x scenarios product exceeds the oracle cap")
    best = None
    for x in x_vectors:
        worst = min(dot(c, x) for c in scenario_rows)
        if best is None or worst > best:
            best = worst
    return best


def _brute_vertices(rows, rhs, cap: int):
    """All vertices of {v : rows v <= rhs} by raw subset enumeration."""
    m = len(rows)
    n = len(rows[0])
    if m < n or comb(m, n) > cap:
        raise CapExceededError(
            f"brute vertex enumeration needs C({m},{n}) subsets, cap {cap}")
    vertices = set()
    for subset in itertools.combinations(range(m), n):
        point = gauss_solve([rows[i] for i in subset],
                            [rhs[i] for i in subset])
        if point is None or point in vertices:
            continue
        if all(dot(rows[i], point) <= rhs[i] for i in range(m)):
            vertices.add(point)
    if not vertices:
        raise ValueError("no vertices; set is empty or unbounded")
    return sorted(vertices)


def _brute_follower_value(inst: RobustBilevelInstance, x, c, mode: Mode,
                          cap: int):
    """Leader value of the follower's response, recomputed from vertices.

    The follower's optimum is attained on a face whose extreme points are
    polytope vertices, so scanning vertices reproduces the lexicographic
    tie-breaking exactly.
    """
    shifted = [inst.rhs[i] + dot(inst.leader_mat[i], x)
               for i in range(inst.num_rows)]
    vertices = _brute_vertices(inst.lhs, shifted, cap)
    best = max(dot(c, v) for v in vertices)
    scores = [dot(inst.leader_obj, v) for v in vertices
              if dot(c, v) == best]
    return max(scores) if mode is Mode.OPTIMISTIC else min(scores)


def _leader_candidates(inst: RobustBilevelInstance):
    ls = inst.leader_set
    if isinstance(ls, ExplicitList):
        return sorted(ls.vectors)
    return [tuple(Fraction(b) for b in bits)
            for bits in itertools.product((0, 1), repeat=ls.p)]


def _sample_scenarios(inst: RobustBilevelInstance, cap: int):
    unc = inst.uncertainty
    if isinstance(unc, Interval):
        return box_corner_scenarios(unc, cap)
    if isinstance(unc, ConvexHull):
        return list(unc.points)
    if isinstance(unc, ProductFinite):
        if unc.grid_size() > cap:
            raise CapExceededError("product grid exceeds the sampling cap")
        return [tuple(c) for c in itertools.product(*unc.choices)]
    raise ValueError("grid sampling needs interval, hull or product "
                     "uncertainty")


def cross_validate(inst: RobustBilevelInstance, mode: Mode,
                   reference: Reference, caps: Caps = DEFAULT_CAPS,
                   brute_cap: int = 10 ** 6) -> OracleVerdict:
    """Compare solve_robust against an independent reference computation.

    DISCRETE_ENUMERATION re-solves finite-scenario instances with plain
    loops and must agree exactly.  GRID_SAMPLE replaces a continuous
    uncertainty set by finitely many members (box corners or hull
    points), which can only over-estimate the adversary's min, so the
    sampled value is a certified upper bound; `agree` still reports exact
    equality, which specific constructions are known to achieve.
    """
    actual = solve_robust(inst, mode, caps).value
    unc = inst.uncertainty
    if reference is Reference.DISCRETE_ENUMERATION:
        if not isinstance(unc, DiscreteSet):
            raise ValueError("discrete enumeration needs a discrete set")
        scenarios = list(unc.scenarios)
    else:
        scenarios = _sample_scenarios(inst, caps.grid_points)
    expected = None
    for x in _leader_candidates(inst):
        worst = None
        for c in scenarios:
            value = _brute_follower_value(inst, x, c, mode, brute_cap)
            if worst is None or value < worst:
                worst = value
        if expected is None or worst > expected:
            expected = worst
    agree = expected == actual
    if reference is Reference.GRID_SAMPLE and expected < actual:
        witness = (f"sampled bound {expected} fell below the exact value "
                   f"{actual}: the bound property is violated")
    elif agree:
        witness = "values agree exactly"
    else:
        witness = f"reference value {expected} != solver value {actual}"
    return OracleVerdict(expected=expected, actual=actual, agree=agree,
                         witness=witness)
