"""Robust bilevel instances and their exact desk-scale solvers.

The model: a leader picks x from a binary (or relaxed) set, an adversary
picks the follower's objective c from an uncertainty set, the follower
maximizes c·y over Y(x) = {y : lhs·y <= leader_mat·x + rhs}, and the
leader scores leader_obj·y.  The leader maximizes, the adversary
minimizes, and follower ties are broken for (optimistic) or against
(pessimistic) the leader via a lexicographic LP.

Finite scenario sets are handled by enumeration.  Box and hull
uncertainty run the face/exposure machinery on an exact low-dimensional
linear image ("shadow") of Y(x): one image coordinate per genuinely
uncertain objective coordinate, plus one for the certain part's score.
Scenarios agreeing on the shadow induce the same follower argmax set, so
enumerating exposable shadow faces enumerates every possible adversary
outcome exactly, at desk scale, even when Y(x) itself has far too many
faces to enumerate; each outcome is then read off the follower's
lexicographic response at the face's certificate scenario.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from . import geometry
from .geometry import CapExceededError
from .lp import (
    Polyhedron,
    Sense,
    check_bounded_nonempty,
    solve_lex_lp,
)
from .numeric import (
    ONE,
    ZERO,
    Fraction,
    as_matrix,
    as_vector,
    dot,
    rat_format,
    rat_parse,
)
from .uncertainty import (
    ConvexHull,
    DiscreteSet,
    Interval,
    ProductFinite,
    UncertaintySet,
    box_corner_scenarios,
)


class Mode(Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"


class InstanceError(ValueError):
    """The instance data violates the model's standing assumptions."""


@dataclass(frozen=True)
class AllBinary:
    p: int


@dataclass(frozen=True)
class ExplicitList:
    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "vectors",
                           tuple(as_vector(v) for v in self.vectors))
        if not self.vectors:
            raise InstanceError("explicit leader set is empty")
        for v in self.vectors:
            if any(x != 0 and x != 1 for x in v):
                raise InstanceError(f"non-binary leader vector {v}")


@dataclass(frozen=True)
class RelaxedBox:
    """Leader ranges over [0,1]^p; solved by binary enumeration, which the
    deviation-penalty construction makes exact, plus a fractional
    spot-check sampler."""

    p: int


LeaderSet = Union[AllBinary, ExplicitList, RelaxedBox]


@dataclass(frozen=True)
class Caps:
    """Work budgets for the exhaustive parts of the solvers."""

    leader_bits: int = 20
    vertex_subsets: int = 2 ** 22
    face_joins: int = 2 ** 22
    grid_points: int = 4096
    projection_rows: int = 4000


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class RobustBilevelInstance:
    """All data of one robust bilevel problem.

    Follower feasible set: Y(x) = {y in R^n : lhs y <= leader_mat x + rhs}.
    The leader's objective is leader_obj·y over the follower's response.
    """

    p: int
    n: int
    lhs: tuple
    leader_mat: tuple
    rhs: tuple
    leader_obj: tuple
    leader_set: LeaderSet
    uncertainty: UncertaintySet
    mode_default: Mode = Mode.OPTIMISTIC

    def __post_init__(self):
        object.__setattr__(self, "lhs", as_matrix(self.lhs, self.n))
        object.__setattr__(self, "leader_mat",
                           as_matrix(self.leader_mat, self.p))
        object.__setattr__(self, "rhs", as_vector(self.rhs))
        object.__setattr__(self, "leader_obj", as_vector(self.leader_obj))
        if self.n < 1:
            raise InstanceError("need at least one follower variable")
        m = len(self.lhs)
        if m < 1:
            raise InstanceError("need at least one constraint row")
        if len(self.leader_mat) != m or len(self.rhs) != m:
            raise InstanceError("row counts of lhs/leader_mat/rhs differ")
        if len(self.leader_obj) != self.n:
            raise InstanceError("leader objective length != n")
        if self.uncertainty.dim != self.n:
            raise InstanceError(
                f"uncertainty dimension {self.uncertainty.dim} != n={self.n}")
        ls = self.leader_set
        if isinstance(ls, (AllBinary, RelaxedBox)) and ls.p != self.p:
            raise InstanceError("leader set arity != p")
        if isinstance(ls, ExplicitList):
            for v in ls.vectors:
                if len(v) != self.p:
                    raise InstanceError("leader vector arity != p")

    @property
    def num_rows(self) -> int:
        return len(self.lhs)

    def follower_polyhedron(self, x: Sequence) -> Polyhedron:
        x = as_vector(x)
        if len(x) != self.p:
            raise InstanceError(f"leader vector has arity {len(x)} != {self.p}")
        shifted = tuple(self.rhs[i] + dot(self.leader_mat[i], x)
                        for i in range(self.num_rows))
        return Polyhedron(self.lhs, shifted)


@dataclass(frozen=True)
class SolveReport:
    leader_x: tuple
    value: Fraction
    worst_scenario: tuple
    follower_y: tuple
    trace: tuple


def enumerate_leader(inst: RobustBilevelInstance,
                     caps: Caps = DEFAULT_CAPS):
    """Leader candidates in lexicographic order (binary for relaxed sets)."""
    ls = inst.leader_set
    if isinstance(ls, ExplicitList):
        return sorted(ls.vectors)
    if ls.p > caps.leader_bits:
        raise CapExceededError(
            f"leader enumeration over 2^{ls.p} vectors exceeds "
            f"2^{caps.leader_bits}")
    return [tuple(Fraction(b) for b in bits)
            for bits in itertools.product((0, 1), repeat=ls.p)]


def validate_instance(inst: RobustBilevelInstance,
                      caps: Caps = DEFAULT_CAPS) -> None:
    """Check Y(x) nonempty and bounded for every enumerable leader choice."""
    for x in enumerate_leader(inst, caps):
        nonempty, bounded = check_bounded_nonempty(inst.follower_polyhedron(x))
        if not nonempty:
            raise InstanceError(f"Y(x) is empty for x={x}")
        if not bounded:
            raise InstanceError(f"Y(x) is unbounded for x={x}")


def follower_response(inst: RobustBilevelInstance, x: Sequence, c: Sequence,
                      mode: Mode):
    """Follower's optimal y under scenario c, tie-broken per mode.

    Returns (y, leader value).  Optimistic picks the argmax point with the
    largest leader score, pessimistic the smallest.
    """
    c = as_vector(c)
    if len(c) != inst.n:
        raise InstanceError(f"scenario has dimension {len(c)} != {inst.n}")
    tie_sense = Sense.MAX if mode is Mode.OPTIMISTIC else Sense.MIN
    lex = solve_lex_lp(inst.follower_polyhedron(x), c, Sense.MAX,
                       inst.leader_obj, tie_sense)
    return lex.point, lex.value


def adversary_discrete(inst: RobustBilevelInstance, x: Sequence, mode: Mode):
    """Worst scenario by plain enumeration of a finite uncertainty set."""
    unc = inst.uncertainty
    if not isinstance(unc, DiscreteSet):
        raise InstanceError("adversary_discrete requires discrete uncertainty")
    best_c = None
    best_value = None
    for c in unc.scenarios:
        _, value = follower_response(inst, x, c, mode)
        if best_value is None or value < best_value:
            best_value = value
            best_c = c
    return best_c, best_value


# ---------------------------------------------------------------------------
# Shadow construction for box and hull uncertainty.


@dataclass(frozen=True)
class _ShadowSpec:
    """How scenarios act on the image space and how to map them back.

    Image coordinates: one per genuinely uncertain objective coordinate
    (box case) or one score per hull point (hull case), plus one score
    coordinate for a nonzero certain part.  Two scenarios with the same
    image functional have the same follower argmax for every y, so the
    adversary only needs the faces of the image polytope.
    """

    image_rows: tuple          # q x n linear map applied to follower points
    directions: UncertaintySet  # scenario images inside the shadow space
    free_indices: tuple = ()    # interval case: uncertain coordinates
    base: tuple = ()            # interval case: certain values (zeros on free)
    hull_points: tuple = ()     # hull case: original scenario vertices

    @property
    def q(self) -> int:
        return len(self.image_rows)

    def scenario_from_shadow(self, c_shadow: Sequence) -> tuple:
        if self.hull_points:
            k = len(self.hull_points)
            lam = c_shadow[:k]
            return tuple(
                sum((lam[j] * self.hull_points[j][i] for j in range(k)), ZERO)
                for i in range(len(self.hull_points[0])))
        c = list(self.base)
        for pos, i in enumerate(self.free_indices):
            c[i] = c_shadow[pos]
        return tuple(c)


def _shadow_spec(inst: RobustBilevelInstance) -> _ShadowSpec:
    unc = inst.uncertainty
    n = inst.n
    if isinstance(unc, Interval):
        free = unc.free_indices()
        free_set = set(free)
        base = tuple(ZERO if i in free_set else unc.lower[i]
                     for i in range(n))
        rows = [tuple(ONE if j == i else ZERO for j in range(n))
                for i in free]
        lower = [unc.lower[i] for i in free]
        upper = [unc.upper[i] for i in free]
        if any(base):
            rows.append(base)
            lower.append(ONE)
            upper.append(ONE)
        return _ShadowSpec(image_rows=tuple(rows),
                           directions=Interval(tuple(lower), tuple(upper)),
                           free_indices=free, base=base)
    if isinstance(unc, ConvexHull):
        k = len(unc.points)
        rows = [tuple(pt) for pt in unc.points]
        simplex = [tuple(ONE if j == i else ZERO for j in range(k))
                   for i in range(k)]
        return _ShadowSpec(image_rows=tuple(rows),
                           directions=ConvexHull(tuple(simplex)),
                           hull_points=unc.points)
    raise InstanceError("shadow adversary needs interval or hull uncertainty")


def _adversary_on_shadow(inst: RobustBilevelInstance, x, spec: _ShadowSpec,
                         mode: Mode, caps: Caps):
    """Minimize the leader outcome over all exposable shadow faces.

    Each exposable face's certificate scenario pins the follower to that
    face's argmax set; the leader outcome there comes from the follower's
    lexicographic response at the certificate scenario.
    """
    shadow_poly = geometry.project_polytope(inst.follower_polyhedron(x),
                                            spec.image_rows,
                                            max_rows=caps.projection_rows)
    vset = geometry.enumerate_vertices(shadow_poly, caps.vertex_subsets)
    faces = geometry.enumerate_faces(shadow_poly, vset, caps.face_joins)
    best_value = None
    best_c = None
    for face in faces:
        cert = geometry.exposure_check(face, vset, spec.directions,
                                       grid_cap=caps.grid_points)
        if cert is None:
            continue
        c_star = spec.scenario_from_shadow(cert.c)
        _, outcome = follower_response(inst, x, c_star, mode)
        if best_value is None or outcome < best_value:
            best_value = outcome
            best_c = c_star
    if best_value is None:
        raise RuntimeError("no exposable face found; shadow set is broken")
    return best_c, best_value


def _adversary_product(inst: RobustBilevelInstance, x: Sequence, mode: Mode,
                       caps: Caps):
    unc = inst.uncertainty
    if unc.grid_size() > caps.grid_points:
        raise CapExceededError(
            f"product grid of {unc.grid_size()} scenarios exceeds "
            f"{caps.grid_points}")
    best_c = None
    best_value = None
    for c in itertools.product(*unc.choices):
        _, value = follower_response(inst, x, c, mode)
        if best_value is None or value < best_value:
            best_value = value
            best_c = tuple(c)
    return best_c, best_value


def adversary_geometric(inst: RobustBilevelInstance, x: Sequence, mode: Mode,
                        caps: Caps = DEFAULT_CAPS,
                        _spec: Optional[_ShadowSpec] = None):
    """Worst scenario over box, hull or product uncertainty.

    Box and hull sets go through the exposable-shadow-face enumeration;
    product sets are finite and scanned directly.  Returns (c*, value).
    """
    unc = inst.uncertainty
    if isinstance(unc, DiscreteSet):
        raise InstanceError("use adversary_discrete for discrete uncertainty")
    if isinstance(unc, ProductFinite):
        return _adversary_product(inst, x, mode, caps)
    x = as_vector(x)
    if isinstance(unc, Interval) and not unc.free_indices():
        c = tuple(unc.lower)
        _, value = follower_response(inst, x, c, mode)
        return c, value
    if isinstance(unc, ConvexHull) and len(unc.points) == 1:
        c = unc.points[0]
        _, value = follower_response(inst, x, c, mode)
        return c, value
    if _spec is None:
        _spec = _shadow_spec(inst)
    return _adversary_on_shadow(inst, x, _spec, mode, caps)


def _adversary_value(inst, x, mode, caps, spec):
    if isinstance(inst.uncertainty, DiscreteSet):
        return adversary_discrete(inst, x, mode)
    return adversary_geometric(inst, x, mode, caps, _spec=spec)


def solve_certain(inst: RobustBilevelInstance, c: Sequence, mode: Mode,
                  caps: Caps = DEFAULT_CAPS) -> SolveReport:
    """Leader optimum for one fixed scenario c (no adversary)."""
    c = as_vector(c)
    best = None
    trace = []
    for x in enumerate_leader(inst, caps):
        y, value = follower_response(inst, x, c, mode)
        trace.append((x, value))
        if best is None or value > best[1]:
            best = (x, value, y)
    x_star, value, y_star = best
    return SolveReport(leader_x=x_star, value=value, worst_scenario=tuple(c),
                       follower_y=y_star, trace=tuple(trace))


def solve_robust(inst: RobustBilevelInstance, mode: Optional[Mode] = None,
                 caps: Caps = DEFAULT_CAPS) -> SolveReport:
    """Max over leader choices of the adversary's min; exact throughout.

    Ties between leader choices resolve to the lexicographically smallest
    x; adversary ties to the first scenario/face in canonical order.  The
    report's value is cross-checked by replaying the worst scenario
    through the follower's lexicographic LP.
    """
    if mode is None:
        mode = inst.mode_default
    spec = None
    unc = inst.uncertainty
    if isinstance(unc, Interval) and unc.free_indices():
        spec = _shadow_spec(inst)
    elif isinstance(unc, ConvexHull) and len(unc.points) > 1:
        spec = _shadow_spec(inst)
    best = None
    trace = []
    for x in enumerate_leader(inst, caps):
        c_star, value = _adversary_value(inst, x, mode, caps, spec)
        trace.append((x, value))
        if best is None or value > best[1]:
            best = (x, value, c_star)
    x_star, value, c_star = best
    y_star, replay = follower_response(inst, x_star, c_star, mode)
    if replay != value:
        raise RuntimeError(
            f"adversary value {value} disagrees with follower replay "
            f"{replay}; solver invariant broken")
    return SolveReport(leader_x=x_star, value=value, worst_scenario=c_star,
                       follower_y=y_star, trace=tuple(trace))


def spot_check_relaxed(inst: RobustBilevelInstance, binary_value: Fraction,
                       mode: Mode, caps: Caps = DEFAULT_CAPS,
                       num_samples: int = 100, seed: int = 0,
                       denominator: int = 16) -> Optional[tuple]:
    """Deterministic fractional-leader sampler for relaxed instances.

    Draws seeded grid points from [0,1]^p and checks that none beats the
    binary optimum.  A cheap sound bound is tried first: the adversary's
    min over the corner scenarios of the uncertainty set dominates the
    true adversary value, so if even that bound stays below the binary
    optimum the sample passes; otherwise the exact adversary runs.

    Returns None when all samples pass, else a witness (x, exact value).
    """
    if not isinstance(inst.leader_set, RelaxedBox):
        raise InstanceError("spot check applies to relaxed leader sets")
    unc = inst.uncertainty
    if isinstance(unc, Interval):
        sample_scenarios = box_corner_scenarios(unc, caps.grid_points)
    elif isinstance(unc, ConvexHull):
        sample_scenarios = list(unc.points)
    elif isinstance(unc, DiscreteSet):
        sample_scenarios = list(unc.scenarios)
    else:
        sample_scenarios = [tuple(c) for c in itertools.product(*unc.choices)]
    rng = random.Random(seed)
    for _ in range(num_samples):
        x = tuple(Fraction(rng.randint(0, denominator), denominator)
                  for _ in range(inst.p))
        bound = None
        for c in sample_scenarios:
            value = follower_response(inst, x, c, mode)[1]
            if bound is None or value < bound:
                bound = value
            if bound <= binary_value:
                break  # the min over scenarios can only be lower
        if bound <= binary_value:
            continue
        if isinstance(unc, (DiscreteSet, ProductFinite)):
            return (x, bound)  # the bound is already exact for finite sets
        _, exact = adversary_geometric(inst, x, mode, caps)
        if exact > binary_value:
            return (x, exact)
    return None


# ---------------------------------------------------------------------------
# JSON interchange.


def _leader_set_to_json(ls: LeaderSet) -> dict:
    if isinstance(ls, AllBinary):
        return {"kind": "all_binary"}
    if isinstance(ls, RelaxedBox):
        return {"kind": "relaxed_box"}
    return {"kind": "explicit",
            "vectors": [[rat_format(v) for v in vec] for vec in ls.vectors]}


def _leader_set_from_json(data: dict, p: int) -> LeaderSet:
    kind = data.get("kind")
    if kind == "all_binary":
        return AllBinary(p)
    if kind == "relaxed_box":
        return RelaxedBox(p)
    if kind == "explicit":
        return ExplicitList(tuple(tuple(rat_parse(v) for v in vec)
                                  for vec in data["vectors"]))
    raise InstanceError(f"unknown leader set kind {kind!r}")


def _uncertainty_to_json(unc: UncertaintySet) -> dict:
    if isinstance(unc, Interval):
        return {"kind": "interval",
                "lower": [rat_format(v) for v in unc.lower],
                "upper": [rat_format(v) for v in unc.upper]}
    if isinstance(unc, DiscreteSet):
        return {"kind": "discrete",
                "scenarios": [[rat_format(v) for v in c]
                              for c in unc.scenarios]}
    if isinstance(unc, ConvexHull):
        return {"kind": "convex_hull",
                "points": [[rat_format(v) for v in c] for c in unc.points]}
    return {"kind": "product_finite",
            "choices": [[rat_format(v) for v in vals]
                        for vals in unc.choices]}


def _uncertainty_from_json(data: dict) -> UncertaintySet:
    kind = data.get("kind")
    if kind == "interval":
        return Interval(tuple(rat_parse(v) for v in data["lower"]),
                        tuple(rat_parse(v) for v in data["upper"]))
    if kind == "discrete":
        return DiscreteSet(tuple(tuple(rat_parse(v) for v in c)
                                 for c in data["scenarios"]))
    if kind == "convex_hull":
        return ConvexHull(tuple(tuple(rat_parse(v) for v in c)
                                for c in data["points"]))
    if kind == "product_finite":
        return ProductFinite(tuple(tuple(rat_parse(v) for v in vals)
                                   for vals in data["choices"]))
    raise InstanceError(f"unknown uncertainty kind {kind!r}")


def instance_to_json(inst: RobustBilevelInstance,
                     var_map: Optional[Sequence[str]] = None,
                     big_m: Optional[Fraction] = None) -> dict:
    doc = {
        "p": inst.p,
        "n": inst.n,
        "A": [[rat_format(v) for v in row] for row in inst.lhs],
        "B": [[rat_format(v) for v in row] for row in inst.leader_mat],
        "b": [rat_format(v) for v in inst.rhs],
        "d": [rat_format(v) for v in inst.leader_obj],
        "leader_set": _leader_set_to_json(inst.leader_set),
        "uncertainty": _uncertainty_to_json(inst.uncertainty),
        "mode_default": inst.mode_default.value,
    }
    if var_map is not None:
        doc["var_map"] = list(var_map)
    if big_m is not None:
        doc["M"] = rat_format(big_m)
    return doc


def instance_from_json(doc: dict):
    """Parse the interchange document; returns (instance, metadata)."""
    try:
        p = int(doc["p"])
        n = int(doc["n"])
        inst = RobustBilevelInstance(
            p=p,
            n=n,
            lhs=tuple(tuple(rat_parse(v) for v in row) for row in doc["A"]),
            leader_mat=tuple(tuple(rat_parse(v) for v in row)
                             for row in doc["B"]),
            rhs=tuple(rat_parse(v) for v in doc["b"]),
            leader_obj=tuple(rat_parse(v) for v in doc["d"]),
            leader_set=_leader_set_from_json(doc["leader_set"], p),
            uncertainty=_uncertainty_from_json(doc["uncertainty"]),
            mode_default=Mode(doc.get("mode_default", "optimistic")),
        )
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance document: {exc}") from exc
    meta = {}
    if "var_map" in doc:
        meta["var_map"] = list(doc["var_map"])
    if "M" in doc:
        meta["M"] = rat_parse(doc["M"])
    return inst, meta


def save_instance(path, inst: RobustBilevelInstance,
                  var_map: Optional[Sequence[str]] = None,
                  big_m: Optional[Fraction] = None) -> None:
    import json

    with open(path, "w", encoding="utf-8") as handle:
        json.dump(instance_to_json(inst, var_map, big_m), handle, indent=1)
        handle.write("\n")


def load_instance(path, validate: bool = True, caps: Caps = DEFAULT_CAPS):
    import json

    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    inst, meta = instance_from_json(doc)
    if validate:
        validate_instance(inst, caps)
    return inst, meta
