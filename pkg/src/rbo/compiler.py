"""Boolean formulas and the reductions into robust bilevel instances.

Formulas are ASTs over leader variables x1..xp and follower variables
y1..yn with negation and bivariate and/or.  The circuit is linearized
gate by gate into [0,1] variables; at binary inputs the gate constraints
pin every gate to its Boolean value.

Compilers provided here:

* `compile_qsat_optimistic` / `compile_qsat_pessimistic`: quantified
  satisfiability as a robust bilevel instance over the box [-1,1]^n
  (gates ride along with pinned zero objective coefficients; the
  pessimistic variant adds per-coordinate deviation penalties so that
  only extreme scenarios are ever worthwhile for the adversary).
* `relax_leader`: drops leader integrality, adding penalized deviation
  columns that force binary leader optima.
* `compile_single_level_robust`: embeds a robust single-level linear
  problem over scenarios into the bilevel form, one simplex-weight
  column per scenario plus product-linearization columns.
* `box_to_simplex`: swaps the [-1,1]^n box for the simplex spanned by
  -e and -e + 2n e_k, extended by the certain coordinates.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .bilevel import (
    AllBinary,
    ExplicitList,
    Mode,
    RelaxedBox,
    RobustBilevelInstance,
)
from .numeric import ONE, ZERO, Fraction, as_vector
from .uncertainty import ConvexHull, DiscreteSet, Interval


class FormulaSyntaxError(ValueError):
    """Parse failure, carrying a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class LeaderVar:
    index: int  # 1-based


@dataclass(frozen=True)
class FollowerVar:
    index: int  # 1-based


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


Node = Union[LeaderVar, FollowerVar, Not, And, Or]


@dataclass(frozen=True)
class Formula:
    root: Node
    p: int
    n: int


def evaluate(formula: Formula, x_bits: Sequence[int],
             y_bits: Sequence[int]) -> int:
    """Boolean value of the formula at a binary assignment."""
    if len(x_bits) != formula.p or len(y_bits) != formula.n:
        raise ValueError("assignment arity mismatch")

    def walk(node: Node) -> int:
        if isinstance(node, LeaderVar):
            return 1 if x_bits[node.index - 1] else 0
        if isinstance(node, FollowerVar):
            return 1 if y_bits[node.index - 1] else 0
        if isinstance(node, Not):
            return 1 - walk(node.child)
        if isinstance(node, And):
            return walk(node.left) & walk(node.right)
        return walk(node.left) | walk(node.right)

    return walk(formula.root)


def atomic_term_count(formula: Formula) -> int:
    """Number of variable occurrences (leaves) in the AST."""

    def walk(node: Node) -> int:
        if isinstance(node, (LeaderVar, FollowerVar)):
            return 1
        if isinstance(node, Not):
            return walk(node.child)
        return walk(node.left) + walk(node.right)

    return walk(formula.root)


def big_m_for(formula: Formula) -> Fraction:
    """Deviation penalty weight: at least 3 and at least the leaf count."""
    return Fraction(max(3, atomic_term_count(formula)))


def formula_to_text(formula: Formula) -> str:
    def walk(node: Node) -> str:
        if isinstance(node, LeaderVar):
            return f"x{node.index}"
        if isinstance(node, FollowerVar):
            return f"y{node.index}"
        if isinstance(node, Not):
            return f"(not {walk(node.child)})"
        op = "and" if isinstance(node, And) else "or"
        return f"({op} {walk(node.left)} {walk(node.right)})"

    return walk(formula.root)


# ---------------------------------------------------------------------------
# Parsing.

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_VAR_RE = re.compile(r"^([xy])([0-9]+)$")


def _tokenize(text: str):
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        tokens.append((match.group(0), line, pos - line_start + 1))
        pos = match.end()
    return tokens


def parse_formula(text: str, p: int, n: int) -> Formula:
    """Parse `(and e e) | (or e e) | (not e) | xI | yJ` with index checks."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty formula", 1, 1)
    index = 0

    def peek():
        return tokens[index] if index < len(tokens) else (None, tokens[-1][1],
                                                          tokens[-1][2] + 1)

    def parse_expr() -> Node:
        nonlocal index
        tok, line, col = peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", line, col)
        index += 1
        if tok == ")":
            raise FormulaSyntaxError("unexpected ')'", line, col)
        if tok == "(":
            op, op_line, op_col = peek()
            if op not in ("and", "or", "not"):
                raise FormulaSyntaxError(
                    f"expected and/or/not, found {op!r}", op_line, op_col)
            index += 1
            if op == "not":
                child = parse_expr()
                node: Node = Not(child)
            else:
                left = parse_expr()
                right = parse_expr()
                node = And(left, right) if op == "and" else Or(left, right)
            close, cl, cc = peek()
            if close != ")":
                raise FormulaSyntaxError("expected ')'", cl, cc)
            index += 1
            return node
        match = _VAR_RE.match(tok)
        if not match:
            raise FormulaSyntaxError(f"unexpected token {tok!r}", line, col)
        kind, num = match.group(1), int(match.group(2))
        if num < 1:
            raise FormulaSyntaxError("variable indices start at 1", line, col)
        if kind == "x":
            if num > p:
                raise FormulaSyntaxError(
                    f"x{num} out of range (p={p})", line, col)
            return LeaderVar(num)
        if num > n:
            raise FormulaSyntaxError(f"y{num} out of range (n={n})", line, col)
        return FollowerVar(num)

    root = parse_expr()
    if index != len(tokens):
        tok, line, col = tokens[index]
        raise FormulaSyntaxError(f"trailing input {tok!r}", line, col)
    return Formula(root, p, n)


_HEADER_RE = re.compile(r"^\s*p\s*=\s*([0-9]+)\s+n\s*=\s*([0-9]+)\s*$")


def parse_formula_file(text: str) -> Formula:
    """Read the `p=<int> n=<int>` header line plus one s-expression."""
    lines = text.splitlines()
    if not lines:
        raise FormulaSyntaxError("empty formula file", 1, 1)
    match = _HEADER_RE.match(lines[0])
    if not match:
        raise FormulaSyntaxError("expected header 'p=<int> n=<int>'", 1, 1)
    p, n = int(match.group(1)), int(match.group(2))
    body = "\n" + "\n".join(lines[1:])
    return parse_formula(body, p, n)


def formula_file_text(formula: Formula) -> str:
    return (f"p={formula.p} n={formula.n}\n"
            f"{formula_to_text(formula)}\n")


# ---------------------------------------------------------------------------
# Linearization.


@dataclass
class LinearizedCircuit:
    """Gate rows of one formula.

    Rows are triples (follower coefficients, leader coefficients, const)
    meaning sum_f coeff*col <= sum_l coeff*x + const.  `output` points at
    the column carrying the formula's value; a formula that is literally
    one leader variable has no follower column and reports ("x", i).
    """

    num_y: int
    gate_names: list
    rows: list
    output: tuple


def _expr_for(ref):
    kind, idx = ref
    if kind == "y":
        return ({idx: ONE}, {}, ZERO)
    return ({}, {idx: ONE}, ZERO)


def _combine(*terms):
    """Sum of (coeff, expr) pairs plus optional ('const', value) entries."""
    fol, led, const = {}, {}, ZERO
    for coeff, item in terms:
        if item == "const":
            const += coeff
            continue
        f, l, c = item
        const += coeff * c
        for k, v in f.items():
            fol[k] = fol.get(k, ZERO) + coeff * v
        for k, v in l.items():
            led[k] = led.get(k, ZERO) + coeff * v
    return fol, led, const


class _CircuitBuilder:
    def __init__(self, formula: Formula):
        self.formula = formula
        self.gate_names = []
        self.rows = []
        self.next_gate = formula.n

    def new_gate(self, label: str) -> tuple:
        idx = self.next_gate
        self.next_gate += 1
        self.gate_names.append(label)
        return ("y", idx)

    def add_leq(self, left, right) -> None:
        """Append the row left <= right over expression triples."""
        fol, led, const = _combine((ONE, left), (-ONE, right))
        # Move leader terms and constant to the right-hand side.
        self.rows.append((fol, {k: -v for k, v in led.items()}, -const))

    def add_eq(self, left, right) -> None:
        self.add_leq(left, right)
        self.add_leq(right, left)

    def emit(self, node: Node) -> tuple:
        if isinstance(node, LeaderVar):
            return ("x", node.index - 1)
        if isinstance(node, FollowerVar):
            return ("y", node.index - 1)
        if isinstance(node, Not):
            a = _expr_for(self.emit(node.child))
            g = self.new_gate(f"g{len(self.gate_names) + 1}:not")
            ge = _expr_for(g)
            one = _combine((ONE, "const"), (-ONE, a))
            self.add_eq(ge, one)  # g = 1 - a
            return g
        a = _expr_for(self.emit(node.left))
        b = _expr_for(self.emit(node.right))
        if isinstance(node, And):
            g = self.new_gate(f"g{len(self.gate_names) + 1}:and")
            ge = _expr_for(g)
            self.add_leq(ge, a)
            self.add_leq(ge, b)
            self.add_leq(_combine((ONE, a), (ONE, b), (-ONE, "const")), ge)
            self.add_leq(_combine((ZERO, "const")), ge)  # g >= 0
            return g
        g = self.new_gate(f"g{len(self.gate_names) + 1}:or")
        ge = _expr_for(g)
        self.add_leq(a, ge)
        self.add_leq(b, ge)
        self.add_leq(ge, _combine((ONE, a), (ONE, b)))
        self.add_leq(ge, _combine((ONE, "const")))  # g <= 1
        return g


def linearize(formula: Formula) -> LinearizedCircuit:
    """Gate constraints for the formula over x, y and [0,1] gate columns.

    At binary x, y the constraints force each gate to the Boolean value of
    its subterm.
    """
    builder = _CircuitBuilder(formula)
    output = builder.emit(formula.root)
    return LinearizedCircuit(num_y=formula.n, gate_names=builder.gate_names,
                             rows=builder.rows, output=output)


# ---------------------------------------------------------------------------
# Compilation into instances.


@dataclass(frozen=True)
class CompilationArtifacts:
    """A compiled instance plus bookkeeping for its follower columns."""

    instance: RobustBilevelInstance
    var_map: tuple
    big_m: Fraction

    def column_of(self, name: str) -> int:
        return self.var_map.index(name)

    def original_y_count(self) -> int:
        count = 0
        for name in self.var_map:
            if re.match(r"^y[0-9]+$", name):
                count += 1
            else:
                break
        return count


def _dense_rows(rows, n_total: int, p: int):
    lhs = []
    leader = []
    rhs = []
    for fol, led, const in rows:
        lhs.append(tuple(fol.get(j, ZERO) for j in range(n_total)))
        leader.append(tuple(led.get(i, ZERO) for i in range(p)))
        rhs.append(const)
    return lhs, leader, rhs


def _compile_qsat(formula: Formula, mode: Mode) -> CompilationArtifacts:
    circuit = linearize(formula)
    builder_rows = list(circuit.rows)
    gate_names = list(circuit.gate_names)
    n_y = formula.n
    output = circuit.output
    if output[0] == "x":
        # Degenerate leaf-only formula over a leader variable: add one
        # pass-through gate so the value lives in a follower column.
        gate_idx = n_y + len(gate_names)
        gate_names.append(f"g{len(gate_names) + 1}:copy")
        ge = ({gate_idx: ONE}, {}, ZERO)
        xe = ({}, {output[1]: ONE}, ZERO)
        fol, led, const = _combine((ONE, ge), (-ONE, xe))
        builder_rows.append((fol, {k: -v for k, v in led.items()}, -const))
        fol, led, const = _combine((ONE, xe), (-ONE, ge))
        builder_rows.append((fol, {k: -v for k, v in led.items()}, -const))
        output = ("y", gate_idx)

    var_map = [f"y{j + 1}" for j in range(n_y)] + gate_names
    rows = []
    for j in range(n_y):
        rows.append(({j: ONE}, {}, ONE))    # y_j <= 1
        rows.append(({j: -ONE}, {}, ZERO))  # y_j >= 0
    rows.extend(builder_rows)

    big_m = big_m_for(formula)
    n_gates = len(gate_names)
    lower = [-ONE] * n_y + [ZERO] * n_gates
    upper = [ONE] * n_y + [ZERO] * n_gates
    d = [ZERO] * (n_y + n_gates)
    d[output[1]] = ONE

    if mode is Mode.PESSIMISTIC:
        for i in range(n_y):
            dev_idx = len(var_map)
            var_map.append(f"ydev{i + 1}")
            rows.append(({dev_idx: -ONE}, {}, ZERO))        # dev >= 0
            rows.append(({dev_idx: ONE, i: -ONE}, {}, ZERO))  # dev <= y_i
            rows.append(({dev_idx: ONE, i: ONE}, {}, ONE))    # dev <= 1 - y_i
            d.append(big_m)
            lower.append(ONE)
            upper.append(ONE)

    n_total = len(var_map)
    lhs, leader_mat, rhs = _dense_rows(rows, n_total, formula.p)
    inst = RobustBilevelInstance(
        p=formula.p,
        n=n_total,
        lhs=tuple(lhs),
        leader_mat=tuple(leader_mat),
        rhs=tuple(rhs),
        leader_obj=tuple(d),
        leader_set=AllBinary(formula.p),
        uncertainty=Interval(tuple(lower), tuple(upper)),
        mode_default=mode,
    )
    return CompilationArtifacts(inst, tuple(var_map), big_m)


def compile_qsat_optimistic(formula: Formula) -> CompilationArtifacts:
    """Robust bilevel instance whose optimistic value is 1 iff the
    exists-forall formula is true (0 otherwise)."""
    return _compile_qsat(formula, Mode.OPTIMISTIC)


def compile_qsat_pessimistic(formula: Formula) -> CompilationArtifacts:
    """As optimistic, plus per-coordinate deviation columns with penalty
    weight M and a certain objective coefficient of 1, which keep the
    pessimistic follower honest on fractional points."""
    return _compile_qsat(formula, Mode.PESSIMISTIC)


def relax_leader(art: CompilationArtifacts) -> CompilationArtifacts:
    """Relax leader integrality; penalized deviation columns keep binary
    leaders optimal."""
    inst = art.instance
    if not isinstance(inst.uncertainty, Interval):
        raise ValueError("leader relaxation expects a box-uncertainty "
                         "compilation")
    if isinstance(inst.leader_set, RelaxedBox):
        raise ValueError("leader set is already relaxed")
    p = inst.p
    n_old = inst.n
    var_map = list(art.var_map)
    lhs = [list(row) + [ZERO] * p for row in inst.lhs]
    leader_mat = [list(row) for row in inst.leader_mat]
    rhs = list(inst.rhs)
    d = list(inst.leader_obj)
    lower = list(inst.uncertainty.lower)
    upper = list(inst.uncertainty.upper)
    for i in range(p):
        dev = n_old + i
        var_map.append(f"xdev{i + 1}")
        zero_x = [ZERO] * p

        def row(fcol_coeffs, xcoeffs, const):
            coeffs = [ZERO] * (n_old + p)
            for col, cv in fcol_coeffs:
                coeffs[col] = cv
            lhs.append(coeffs)
            leader_mat.append(xcoeffs)
            rhs.append(const)

        row([(dev, -ONE)], list(zero_x), ZERO)               # dev >= 0
        xrow = list(zero_x)
        xrow[i] = ONE
        row([(dev, ONE)], xrow, ZERO)                        # dev <= x_i
        xrow = list(zero_x)
        xrow[i] = -ONE
        row([(dev, ONE)], xrow, ONE)                         # dev <= 1 - x_i
        d.append(-art.big_m)
        lower.append(ONE)
        upper.append(ONE)
    inst2 = RobustBilevelInstance(
        p=p,
        n=n_old + p,
        lhs=tuple(tuple(r) for r in lhs),
        leader_mat=tuple(tuple(r) for r in leader_mat),
        rhs=tuple(rhs),
        leader_obj=tuple(d),
        leader_set=RelaxedBox(p),
        uncertainty=Interval(tuple(lower), tuple(upper)),
        mode_default=inst.mode_default,
    )
    return CompilationArtifacts(inst2, tuple(var_map), art.big_m)


def box_to_simplex(art: CompilationArtifacts) -> CompilationArtifacts:
    """Replace the [-1,1]^k box on the original follower coordinates with
    the simplex spanned by -e and -e + 2k e_j, certain entries appended.

    The simplex contains the box, and the instance's value is unchanged.
    """
    inst = art.instance
    unc = inst.uncertainty
    if not isinstance(unc, Interval):
        raise ValueError("box-to-simplex expects interval uncertainty")
    n_y = art.original_y_count()
    for j in range(n_y):
        if unc.lower[j] != -ONE or unc.upper[j] != ONE:
            raise ValueError(f"column {j} is not a [-1,1] interval")
    for j in range(n_y, inst.n):
        if unc.lower[j] != unc.upper[j]:
            raise ValueError(f"column {j} is not certain")
    certain = tuple(unc.lower[j] for j in range(n_y, inst.n))
    points = []
    base = [-ONE] * n_y
    points.append(tuple(base) + certain)
    for j in range(n_y):
        spike = list(base)
        spike[j] += 2 * n_y
        points.append(tuple(spike) + certain)
    inst2 = RobustBilevelInstance(
        p=inst.p,
        n=inst.n,
        lhs=inst.lhs,
        leader_mat=inst.leader_mat,
        rhs=inst.rhs,
        leader_obj=inst.leader_obj,
        leader_set=inst.leader_set,
        uncertainty=ConvexHull(tuple(points)),
        mode_default=inst.mode_default,
    )
    return CompilationArtifacts(inst2, art.var_map, art.big_m)


def compile_single_level_robust(x_set, scenarios) -> CompilationArtifacts:
    """Embed max_x min_j c_j·x over binary x into the bilevel form.

    Follower columns: a value column y, one simplex weight z_j per
    scenario, and product columns u_{j,i} linearizing x_i z_j.  Scenario
    j of the new-discrete set is the unit vector on z_j, zero elsewhere;
    under it the follower's unique optimum has z = e_j and y = c_j·x.
    """
    x_vectors = tuple(as_vector(v) for v in x_set)
    if not x_vectors:
        raise ValueError("leader set is empty")
    p = len(x_vectors[0])
    scenario_rows = tuple(as_vector(c) for c in scenarios)
    if not scenario_rows:
        raise ValueError("need at least one scenario")
    if any(len(c) != p for c in scenario_rows):
        raise ValueError("scenario dimension differs from leader arity")
    m_s = len(scenario_rows)

    var_map = ["y"] + [f"z{j + 1}" for j in range(m_s)]
    for j in range(m_s):
        for i in range(p):
            var_map.append(f"u{j + 1}_{i + 1}")
    n_total = len(var_map)
    y_col = 0

    def z_col(j):
        return 1 + j

    def u_col(j, i):
        return 1 + m_s + j * p + i

    rows = []
    zero_x = [ZERO] * p
    for j in range(m_s):
        coeffs = [ZERO] * n_total
        coeffs[z_col(j)] = -ONE
        rows.append((coeffs, list(zero_x), ZERO))            # z_j >= 0
    coeffs = [ZERO] * n_total
    for j in range(m_s):
        coeffs[z_col(j)] = ONE
    rows.append((list(coeffs), list(zero_x), ONE))           # sum z <= 1
    rows.append(([-c for c in coeffs], list(zero_x), -ONE))  # sum z >= 1
    for j in range(m_s):
        for i in range(p):
            uc = u_col(j, i)
            coeffs = [ZERO] * n_total
            coeffs[uc] = -ONE
            rows.append((list(coeffs), list(zero_x), ZERO))  # u >= 0
            coeffs = [ZERO] * n_total
            coeffs[uc] = -ONE
            coeffs[z_col(j)] = ONE
            xrow = list(zero_x)
            xrow[i] = -ONE
            rows.append((coeffs, xrow, ONE))                 # u >= x + z - 1
            coeffs = [ZERO] * n_total
            coeffs[uc] = ONE
            xrow = list(zero_x)
            xrow[i] = ONE
            rows.append((coeffs, xrow, ZERO))                # u <= x_i
            coeffs = [ZERO] * n_total
            coeffs[uc] = ONE
            coeffs[z_col(j)] = -ONE
            rows.append((coeffs, list(zero_x), ZERO))        # u <= z_j
    # y = sum c_{j,i} u_{j,i}
    coeffs = [ZERO] * n_total
    coeffs[y_col] = ONE
    for j in range(m_s):
        for i in range(p):
            coeffs[u_col(j, i)] = -scenario_rows[j][i]
    rows.append((list(coeffs), list(zero_x), ZERO))
    rows.append(([-c for c in coeffs], list(zero_x), ZERO))

    d = [ZERO] * n_total
    d[y_col] = ONE
    tilde = []
    for j in range(m_s):
        scen = [ZERO] * n_total
        scen[z_col(j)] = ONE
        tilde.append(tuple(scen))
    inst = RobustBilevelInstance(
        p=p,
        n=n_total,
        lhs=tuple(tuple(r[0]) for r in rows),
        leader_mat=tuple(tuple(r[1]) for r in rows),
        rhs=tuple(r[2] for r in rows),
        leader_obj=tuple(d),
        leader_set=ExplicitList(x_vectors),
        uncertainty=DiscreteSet(tuple(tilde)),
        mode_default=Mode.OPTIMISTIC,
    )
    return CompilationArtifacts(inst, tuple(var_map), Fraction(3))


# ---------------------------------------------------------------------------
# Formula generators for verification sweeps.


def exhaustive_family(p: int, n: int) -> list:
    """Deterministic formula family for one (p, n) arity pair.

    Exhaustive layers: every plain or negated single variable, and every
    ordered pair of plain variables under both binary connectives; topped
    up with fixed deeper shapes (majority, parity, nested chains) whose
    leaves cycle through the variables, reaching seven leaves.
    """
    variables = [LeaderVar(i + 1) for i in range(p)]
    variables += [FollowerVar(j + 1) for j in range(n)]
    if not variables:
        return []
    formulas = []
    for v in variables:
        formulas.append(Formula(v, p, n))
        formulas.append(Formula(Not(v), p, n))
    for a in variables:
        for b in variables:
            formulas.append(Formula(And(a, b), p, n))
            formulas.append(Formula(Or(a, b), p, n))

    def cyc(i: int) -> Node:
        return variables[i % len(variables)]

    structured = [
        Or(And(cyc(0), cyc(1)), And(cyc(2), cyc(3))),
        Or(And(cyc(0), cyc(1)),
           Or(And(cyc(0), cyc(2)), And(cyc(1), cyc(2)))),
        Or(And(cyc(0), Not(cyc(1))), And(Not(cyc(0)), cyc(1))),
        Or(And(cyc(0), cyc(1)),
           And(cyc(2), Or(And(cyc(3), cyc(4)), And(cyc(5), cyc(6))))),
    ]
    formulas.extend(Formula(node, p, n) for node in structured)
    return formulas


def full_family(max_p: int = 2, max_n: int = 2) -> list:
    """The exhaustive family across all arities up to (max_p, max_n)."""
    formulas = []
    for p in range(max_p + 1):
        for n in range(max_n + 1):
            if p == 0 and n == 0:
                continue
            formulas.extend(exhaustive_family(p, n))
    return formulas


def random_formula(rng: random.Random, p: int, n: int,
                   max_leaves: int) -> Formula:
    """Seeded random AST with at most max_leaves variable occurrences."""
    if p + n == 0:
        raise ValueError("need at least one variable")

    def leaf() -> Node:
        idx = rng.randrange(p + n)
        node: Node = (LeaderVar(idx + 1) if idx < p
                      else FollowerVar(idx + 1 - p))
        if rng.random() < 0.25:
            node = Not(node)
        return node

    def build(budget: int) -> Node:
        if budget <= 1:
            return leaf()
        roll = rng.random()
        if roll < 0.25:
            return leaf()
        if roll < 0.4:
            return Not(build(budget))
        left_budget = rng.randint(1, budget - 1)
        left = build(left_budget)
        right = build(budget - left_budget)
        return (And(left, right) if rng.random() < 0.5
                else Or(left, right))

    return Formula(build(max_leaves), p, n)
