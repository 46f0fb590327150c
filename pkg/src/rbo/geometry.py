"""Polytope vertex enumeration, face lattices and exposure certificates.

A face is identified by its vertex set together with the canonical set of
constraint rows tight on all of its vertices.  Faces are generated by
closing the vertex tight-sets under pairwise join (intersection of tight
sets), which yields exactly the nonempty faces of a bounded polyhedron,
including the polytope itself.

`exposure_check` decides whether some scenario in an uncertainty set has
a given face as its exact argmax set, by maximizing the strict separation
margin with an LP; a face is exposable iff the optimal margin is positive.

`project_polytope` computes exact images of polytopes under linear maps
by Fourier-Motzkin elimination with syntactic and LP-based redundancy
pruning; the bilevel adversary runs the face machinery on such
low-dimensional images.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

from .lp import LpStatus, Polyhedron, Sense, solve_lp
from .numeric import (
    ONE,
    ZERO,
    Fraction,
    as_matrix,
    dot,
    gauss_solve,
)
from .uncertainty import (
    ConvexHull,
    DiscreteSet,
    Interval,
    ProductFinite,
    UncertaintySet,
)

DEFAULT_CAP = 2 ** 22


class CapExceededError(Exception):
    """A combinatorial enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class VertexSet:
    """Distinct vertices of a bounded polyhedron, in sorted order."""

    vertices: tuple

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Face:
    """A nonempty face: its vertices and its canonical tight rows."""

    vertex_indices: frozenset
    tight_rows: frozenset


@dataclass(frozen=True)
class ExposureCertificate:
    """A scenario c whose argmax set is exactly one face.

    c scores all face vertices equally and beats every other vertex by at
    least `margin` > 0.
    """

    c: tuple
    margin: Fraction


def tight_rows_at(poly: Polyhedron, point: Sequence) -> frozenset:
    return frozenset(i for i in range(poly.num_rows)
                     if dot(poly.a[i], point) == poly.rhs[i])


def enumerate_vertices(poly: Polyhedron, cap: int = DEFAULT_CAP) -> VertexSet:
    """All vertices of a bounded nonempty polyhedron.

    Every n-subset of rows is solved as an equality system; nonsingular,
    feasible solutions are vertices.  Duplicates coming from degenerate
    vertices collapse into one entry.
    """
    m, n = poly.num_rows, poly.dim
    if m < n:
        raise ValueError(f"{m} rows cannot pin {n} coordinates; "
                         "the polyhedron is unbounded")
    if comb(m, n) > cap:
        raise CapExceededError(
            f"vertex enumeration needs C({m},{n}) subsets, cap is {cap}")
    found = set()
    a = poly.a
    rhs = poly.rhs
    for subset in itertools.combinations(range(m), n):
        system = [a[i] for i in subset]
        target = [rhs[i] for i in subset]
        point = gauss_solve(system, target)
        if point is None or point in found:
            continue
        feasible = True
        for i in range(m):
            if dot(a[i], point) > rhs[i]:
                feasible = False
                break
        if feasible:
            found.add(point)
    if not found:
        raise ValueError("no vertices found; polyhedron is empty or unbounded")
    return VertexSet(tuple(sorted(found)))


def enumerate_faces(poly: Polyhedron, vset: VertexSet,
                    cap: int = DEFAULT_CAP) -> list:
    """All nonempty faces, from single vertices up to the full polytope.

    Join closure: the join of two faces has the intersection of their
    tight rows; its vertex set is every vertex tight on that intersection,
    and its canonical tight set is re-derived from those vertices.  The
    cap bounds the number of join operations attempted.
    """
    verts = vset.vertices
    tights = [tight_rows_at(poly, v) for v in verts]
    universe = frozenset(range(len(verts)))

    def close(tight: frozenset) -> Face:
        members = frozenset(i for i in universe if tights[i] >= tight)
        canonical = frozenset.intersection(*(tights[i] for i in members))
        return Face(members, canonical)

    faces = {}
    queue = []
    for i in range(len(verts)):
        face = Face(frozenset([i]), tights[i])
        faces[face.vertex_indices] = face
        queue.append(face)
    work = 0
    while queue:
        current = queue.pop()
        for other in list(faces.values()):
            work += 1
            if work > cap:
                raise CapExceededError(f"face join budget {cap} exceeded")
            joined = close(current.tight_rows & other.tight_rows)
            if joined.vertex_indices not in faces:
                faces[joined.vertex_indices] = joined
                queue.append(joined)
    return sorted(faces.values(),
                  key=lambda f: (len(f.vertex_indices),
                                 sorted(f.vertex_indices)))


def argmax_vertices(vset: VertexSet, c: Sequence) -> frozenset:
    """Indices of the vertices attaining max c·v (the exposed face's verts)."""
    scores = [dot(c, v) for v in vset.vertices]
    best = max(scores)
    return frozenset(i for i, s in enumerate(scores) if s == best)


def exposure_check(face: Face, vset: VertexSet, unc: UncertaintySet,
                   grid_cap: int = DEFAULT_CAP) -> Optional[ExposureCertificate]:
    """Find a scenario in `unc` exposing exactly `face`, if one exists.

    Solves max eps subject to c in unc, c·v = t on face vertices and
    c·u <= t - eps off the face (eps capped at 1 so the LP stays bounded);
    the face is exposable iff the optimum has eps > 0.  Product sets are
    scanned point by point instead.
    """
    if isinstance(unc, DiscreteSet):
        raise ValueError("discrete uncertainty is handled scenario-wise, "
                         "not through exposure certificates")
    verts = vset.vertices
    q = len(verts[0])
    if unc.dim != q:
        raise ValueError(f"uncertainty dimension {unc.dim} != vertex dim {q}")
    face_verts = [verts[i] for i in sorted(face.vertex_indices)]
    other_verts = [verts[i] for i in range(len(verts))
                   if i not in face.vertex_indices]

    if isinstance(unc, ProductFinite):
        if unc.grid_size() > grid_cap:
            raise CapExceededError(
                f"product grid of {unc.grid_size()} points exceeds {grid_cap}")
        for c in itertools.product(*unc.choices):
            t = dot(c, face_verts[0])
            if any(dot(c, v) != t for v in face_verts[1:]):
                continue
            gaps = [t - dot(c, u) for u in other_verts]
            if all(g > 0 for g in gaps):
                return ExposureCertificate(tuple(c), min(gaps, default=ONE))
        return None

    if isinstance(unc, Interval):
        # Variables: c (q), t, eps.
        nv = q + 2
        rows, rhs = [], []
        for i in range(q):
            rows.append([ONE if j == i else ZERO for j in range(nv)])
            rhs.append(unc.upper[i])
            rows.append([-ONE if j == i else ZERO for j in range(nv)])
            rhs.append(-unc.lower[i])

        def c_score(vec, coeff=ONE):
            return [coeff * x for x in vec]

        eps_obj = [ZERO] * nv
        eps_obj[q + 1] = ONE
        reassemble = lambda point: tuple(point[:q])
    else:
        if not isinstance(unc, ConvexHull):
            raise TypeError(f"unknown uncertainty kind: {type(unc).__name__}")
        # Variables: lambda (k), t, eps; c = sum lambda_j p_j.
        k = len(unc.points)
        nv = k + 2
        rows, rhs = [], []
        for i in range(k):
            rows.append([-ONE if j == i else ZERO for j in range(nv)])
            rhs.append(ZERO)
        rows.append([ONE] * k + [ZERO, ZERO])
        rhs.append(ONE)
        rows.append([-ONE] * k + [ZERO, ZERO])
        rhs.append(-ONE)

        def c_score(vec, coeff=ONE):
            return [coeff * dot(p, vec) for p in unc.points]

        eps_obj = [ZERO] * nv
        eps_obj[k + 1] = ONE

        def reassemble(point):
            lam = point[:k]
            return tuple(
                sum((lam[j] * unc.points[j][coord] for j in range(k)), ZERO)
                for coord in range(q))

    t_col = nv - 2
    eps_col = nv - 1
    for v in face_verts:
        row = c_score(v) + [ZERO, ZERO]
        row[t_col] = -ONE
        rows.append(row)
        rhs.append(ZERO)
        row = c_score(v, -ONE) + [ZERO, ZERO]
        row[t_col] = ONE
        rows.append(row)
        rhs.append(ZERO)
    for u in other_verts:
        row = c_score(u) + [ZERO, ZERO]
        row[t_col] = -ONE
        row[eps_col] = ONE
        rows.append(row)
        rhs.append(ZERO)
    cap_row = [ZERO] * nv
    cap_row[eps_col] = ONE
    rows.append(cap_row)
    rhs.append(ONE)

    outcome = solve_lp(Polyhedron(rows, rhs), eps_obj, Sense.MAX,
                       purify=False)
    if outcome.status is not LpStatus.OPTIMAL or outcome.value <= 0:
        return None
    return ExposureCertificate(reassemble(outcome.point), outcome.value)


def _primitive(coeffs, rhs):
    """Scale a row so the coefficients are integers with gcd 1."""
    denom_lcm = 1
    for c in coeffs:
        if c:
            d = c.denominator
            if d != 1:
                g = _gcd(denom_lcm, d)
                denom_lcm = denom_lcm // g * d
    num_gcd = 0
    for c in coeffs:
        if c:
            num_gcd = _gcd(num_gcd, abs(c.numerator * (denom_lcm // c.denominator)))
    if num_gcd == 0:
        return tuple(coeffs), rhs
    scale = Fraction(denom_lcm, num_gcd)
    return tuple(c * scale for c in coeffs), rhs * scale


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _syntactic_prune(rows):
    """Drop trivial rows and keep the tightest rhs per coefficient vector."""
    best = {}
    for coeffs, rhs in rows:
        if not any(coeffs):
            if rhs < 0:
                raise ValueError("projection produced an infeasible row")
            continue
        coeffs, rhs = _primitive(coeffs, rhs)
        old = best.get(coeffs)
        if old is None or rhs < old:
            best[coeffs] = rhs
    return [(c, r) for c, r in best.items()]


def _lp_prune(rows):
    """Remove rows implied by the others (exact redundancy test)."""
    rows = sorted(rows)
    kept = list(rows)
    idx = 0
    while idx < len(kept):
        if len(kept) <= 1:
            break
        coeffs, rhs = kept[idx]
        others = kept[:idx] + kept[idx + 1:]
        poly = Polyhedron([c for c, _ in others], [r for _, r in others])
        probe = solve_lp(poly, coeffs, Sense.MAX, purify=False)
        if probe.status is LpStatus.OPTIMAL and probe.value <= rhs:
            kept.pop(idx)
        else:
            idx += 1
    return kept


def project_polytope(poly: Polyhedron, image_rows,
                     max_rows: int = 4000,
                     lp_prune: bool = True) -> Polyhedron:
    """Exact image {T v : v in poly} of a bounded nonempty polyhedron.

    Auxiliary coordinates w = T v are appended, then the original
    variables are eliminated one by one (Fourier-Motzkin), preferring the
    variable with the fewest positive*negative row pairs.  Rows are kept
    primitive and deduplicated throughout; a final LP pass reduces the
    result to an irredundant description, which keeps downstream vertex
    enumeration combinatorially small.
    """
    image = as_matrix(image_rows, poly.dim)
    q = len(image)
    if q == 0:
        raise ValueError("projection needs at least one image row")
    n = poly.dim
    width = q + n
    rows = []
    for i in range(poly.num_rows):
        rows.append((tuple([ZERO] * q + list(poly.a[i])), poly.rhs[i]))
    for k in range(q):
        plus = [ZERO] * width
        plus[k] = ONE
        for j in range(n):
            plus[q + j] = -image[k][j]
        rows.append((tuple(plus), ZERO))
        rows.append((tuple(-c for c in plus), ZERO))
    rows = _syntactic_prune(rows)

    remaining = list(range(q, width))
    while remaining:
        counts = {}
        for var in remaining:
            pos = sum(1 for c, _ in rows if c[var] > 0)
            neg = sum(1 for c, _ in rows if c[var] < 0)
            counts[var] = pos * neg
        var = min(remaining, key=lambda v: (counts[v], v))
        plus, minus, keep = [], [], []
        for coeffs, rhs in rows:
            cv = coeffs[var]
            if cv > 0:
                plus.append((coeffs, rhs))
            elif cv < 0:
                minus.append((coeffs, rhs))
            else:
                keep.append((coeffs, rhs))
        new_rows = keep
        for pc, pr in plus:
            pscale = pc[var]
            for mc, mr in minus:
                mscale = -mc[var]
                coeffs = tuple(pc[j] / pscale + mc[j] / mscale
                               for j in range(len(pc)))
                new_rows.append((coeffs, pr / pscale + mr / mscale))
        rows = _syntactic_prune(new_rows)
        if len(rows) > max_rows:
            raise CapExceededError(
                f"projection grew to {len(rows)} rows (cap {max_rows})")
        remaining.remove(var)

    final = [(tuple(c[:q]), r) for c, r in rows]
    final = _syntactic_prune(final)
    if lp_prune:
        final = _lp_prune(final)
    if not final:
        raise ValueError("projection came out unconstrained")
    return Polyhedron([c for c, _ in final], [r for _, r in final])
