"""Command-line front end: compile, solve, inspect and verify instances.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 work cap
exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import bilevel, compiler, oracle
from .bilevel import Caps, Mode
from .geometry import CapExceededError
from .lp import LpError
from .numeric import rat_format, rat_parse
from .uncertainty import contains_scenario

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_CAP = 3

DEFAULT_SEED = 20240


def _fmt(value, decimal: bool) -> str:
    text = rat_format(value)
    if decimal:
        text += f" ~= {float(value):.6g} (approx)"
    return text


def _fmt_vec(vec, decimal: bool) -> str:
    body = ", ".join(rat_format(v) for v in vec)
    if decimal and vec:
        body += "  ~= (" + ", ".join(f"{float(v):.6g}" for v in vec) + ") (approx)"
    return f"({body})"


def _parse_vector(text: str):
    text = text.strip()
    if not text:
        return ()
    return tuple(rat_parse(part) for part in text.split(","))


def _mode_arg(parser):
    parser.add_argument("--mode", choices=["optimistic", "pessimistic"],
                        default=None,
                        help="tie-breaking convention (defaults to the "
                             "instance's own)")


def _caps_args(parser):
    parser.add_argument("--leader-bits", type=int, default=20,
                        help="max leader dimension for binary enumeration")
    parser.add_argument("--grid-cap", type=int, default=4096,
                        help="max grid points for product uncertainty")


def _caps_from(args) -> Caps:
    return Caps(leader_bits=args.leader_bits, grid_points=args.grid_cap)


def _resolve_mode(args, inst) -> Mode:
    if args.mode is not None:
        return Mode(args.mode)
    return inst.mode_default


def _cmd_compile_qsat(args) -> int:
    with open(args.formula, "r", encoding="utf-8") as handle:
        formula = compiler.parse_formula_file(handle.read())
    mode = Mode(args.mode or "optimistic")
    if mode is Mode.PESSIMISTIC:
        art = compiler.compile_qsat_pessimistic(formula)
    else:
        art = compiler.compile_qsat_optimistic(formula)
    if args.relax_leader:
        art = compiler.relax_leader(art)
    if args.simplex_uncertainty:
        art = compiler.box_to_simplex(art)
    bilevel.save_instance(args.output, art.instance, var_map=art.var_map,
                          big_m=art.big_m)
    print(f"wrote {args.output}")
    print(f"M = {rat_format(art.big_m)}")
    print("columns:")
    for idx, name in enumerate(art.var_map):
        print(f"  [{idx}] {name}")
    return EXIT_OK


def _cmd_compile_rs(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    try:
        x_set = [tuple(rat_parse(str(v)) for v in vec) for vec in doc["X"]]
        scenarios = [tuple(rat_parse(str(v)) for v in vec)
                     for vec in doc["scenarios"]]
    except KeyError as exc:
        raise ValueError(f"missing field {exc} in the input document")
    art = compiler.compile_single_level_robust(x_set, scenarios)
    bilevel.save_instance(args.output, art.instance, var_map=art.var_map)
    print(f"wrote {args.output}")
    print("columns:")
    for idx, name in enumerate(art.var_map):
        print(f"  [{idx}] {name}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    caps = _caps_from(args)
    inst, _ = bilevel.load_instance(args.instance, caps=caps)
    mode = _resolve_mode(args, inst)
    report = bilevel.solve_robust(inst, mode, caps)
    print(f"mode: {mode.value}")
    print(f"value: {_fmt(report.value, args.decimal)}")
    print(f"leader x: {_fmt_vec(report.leader_x, args.decimal)}")
    print(f"worst scenario: {_fmt_vec(report.worst_scenario, args.decimal)}")
    print(f"follower y: {_fmt_vec(report.follower_y, args.decimal)}")
    return EXIT_OK


def _cmd_adversary(args) -> int:
    caps = _caps_from(args)
    inst, _ = bilevel.load_instance(args.instance, caps=caps)
    mode = _resolve_mode(args, inst)
    x = _parse_vector(args.x)
    from .uncertainty import DiscreteSet

    if isinstance(inst.uncertainty, DiscreteSet):
        c_star, value = bilevel.adversary_discrete(inst, x, mode)
    else:
        c_star, value = bilevel.adversary_geometric(inst, x, mode, caps)
    print(f"mode: {mode.value}")
    print(f"adversary value: {_fmt(value, args.decimal)}")
    print(f"worst scenario: {_fmt_vec(c_star, args.decimal)}")
    return EXIT_OK


def _cmd_follower(args) -> int:
    caps = _caps_from(args)
    inst, _ = bilevel.load_instance(args.instance, caps=caps)
    mode = _resolve_mode(args, inst)
    x = _parse_vector(args.x)
    c = _parse_vector(args.c)
    if not contains_scenario(inst.uncertainty, c):
        print("warning: scenario lies outside the uncertainty set",
              file=sys.stderr)
    y, value = bilevel.follower_response(inst, x, c, mode)
    print(f"mode: {mode.value}")
    print(f"leader value: {_fmt(value, args.decimal)}")
    print(f"follower y: {_fmt_vec(y, args.decimal)}")
    return EXIT_OK


def _cmd_demo(args) -> int:
    text = "p=1 n=1\n(or x1 y1)\n"
    formula = compiler.parse_formula_file(text)
    print("formula file:")
    print(text)
    for mode_name in ("optimistic", "pessimistic"):
        mode = Mode(mode_name)
        if mode is Mode.PESSIMISTIC:
            art = compiler.compile_qsat_pessimistic(formula)
        else:
            art = compiler.compile_qsat_optimistic(formula)
        report = bilevel.solve_robust(art.instance, mode)
        print(f"{mode_name}: columns {', '.join(art.var_map)}; "
              f"M = {rat_format(art.big_m)}")
        print(f"  robust value {rat_format(report.value)} at "
              f"x = {_fmt_vec(report.leader_x, False)}, "
              f"worst scenario {_fmt_vec(report.worst_scenario, False)}")
    print("a leader picking x1 = 1 makes the formula true for every y1, "
          "so both conventions report value 1")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification sweeps.


def _report(case: str, ok: bool, lines: list) -> None:
    lines.append(("PASS" if ok else "FAIL") + f" {case}")


def _suite_qsat(args, lines: list) -> bool:
    caps = _caps_from(args)
    rng = random.Random(args.seed)
    formulas = compiler.full_family(args.max_p, args.max_n)
    for _ in range(args.random_count):
        p = rng.randint(0, args.max_p)
        n = rng.randint(0, args.max_n)
        if p + n == 0:
            n = 1
        formulas.append(compiler.random_formula(rng, p, n, max_leaves=9))
    all_ok = True
    for idx, formula in enumerate(formulas):
        want = 1 if oracle.qsat_oracle(formula) else 0
        label = compiler.formula_to_text(formula)
        for maker, mode in (
                (compiler.compile_qsat_optimistic, Mode.OPTIMISTIC),
                (compiler.compile_qsat_pessimistic, Mode.PESSIMISTIC)):
            case = f"qsat[{idx}] {mode.value} {label}"
            try:
                art = maker(formula)
                got = bilevel.solve_robust(art.instance, mode, caps).value
            except CapExceededError as exc:
                lines.append(f"SKIP {case} ({exc})")
                continue
            ok = got == want
            all_ok &= ok
            _report(case, ok, lines)
    return all_ok


def _suite_single_level(args, lines: list) -> bool:
    caps = _caps_from(args)
    rng = random.Random(args.seed + 1)
    all_ok = True
    for idx in range(args.random_count):
        p = rng.randint(1, 4)
        pool = list(range(2 ** p))
        rng.shuffle(pool)
        chosen = sorted(pool[:rng.randint(1, min(6, len(pool)))])
        x_set = [tuple((code >> i) & 1 for i in range(p)) for code in chosen]
        m_s = rng.randint(1, 3)
        scenarios = [tuple(rat_parse(f"{rng.randint(-12, 12)}/4")
                           for _ in range(p)) for _ in range(m_s)]
        want = oracle.robust_single_level_oracle(x_set, scenarios)
        art = compiler.compile_single_level_robust(x_set, scenarios)
        case = f"single-level[{idx}] p={p} |X|={len(x_set)} m={m_s}"
        got_opt = bilevel.solve_robust(art.instance, Mode.OPTIMISTIC,
                                       caps).value
        got_pes = bilevel.solve_robust(art.instance, Mode.PESSIMISTIC,
                                       caps).value
        ok = got_opt == want and got_pes == want
        all_ok &= ok
        _report(case, ok, lines)
    return all_ok


def _suite_hull(args, lines: list) -> bool:
    caps = _caps_from(args)
    formulas = compiler.full_family(args.max_p, min(args.max_n, 2))
    all_ok = True
    for idx, formula in enumerate(formulas):
        label = compiler.formula_to_text(formula)
        case = f"hull[{idx}] {label}"
        try:
            art = compiler.compile_qsat_optimistic(formula)
            box_value = bilevel.solve_robust(art.instance, Mode.OPTIMISTIC,
                                             caps).value
            simplex = compiler.box_to_simplex(art)
            hull_value = bilevel.solve_robust(simplex.instance,
                                              Mode.OPTIMISTIC, caps).value
        except CapExceededError as exc:
            lines.append(f"SKIP {case} ({exc})")
            continue
        ok = box_value == hull_value
        all_ok &= ok
        _report(case, ok, lines)
    return all_ok


def _cmd_verify(args) -> int:
    lines: list = []
    ok = True
    if args.suite in ("qsat", "all"):
        ok &= _suite_qsat(args, lines)
    if args.suite in ("single-level", "all"):
        ok &= _suite_single_level(args, lines)
    if args.suite in ("hull", "all"):
        ok &= _suite_hull(args, lines)
    for line in lines:
        print(line)
    failures = sum(1 for line in lines if line.startswith("FAIL"))
    skips = sum(1 for line in lines if line.startswith("SKIP"))
    passes = sum(1 for line in lines if line.startswith("PASS"))
    print(f"{passes} passed, {failures} failed, {skips} skipped")
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbo",
        description="exact solvers for robust bilevel linear optimization "
                    "with an uncertain follower objective")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile-qsat",
                       help="compile a formula file into an instance")
    c.add_argument("formula")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--mode", choices=["optimistic", "pessimistic"],
                   default="optimistic")
    c.add_argument("--relax-leader", action="store_true",
                   help="relax leader integrality via penalty columns")
    c.add_argument("--simplex-uncertainty", action="store_true",
                   help="swap the box for its covering simplex")
    c.set_defaults(func=_cmd_compile_qsat)

    c = sub.add_parser("compile-rs",
                       help="embed a robust single-level problem "
                            "(JSON with fields X, scenarios)")
    c.add_argument("spec")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=_cmd_compile_rs)

    c = sub.add_parser("solve", help="solve the robust problem")
    c.add_argument("instance")
    _mode_arg(c)
    c.add_argument("--decimal", action="store_true",
                   help="append approximate decimal renderings")
    _caps_args(c)
    c.set_defaults(func=_cmd_solve)

    c = sub.add_parser("adversary",
                       help="worst scenario for a fixed leader choice")
    c.add_argument("instance")
    c.add_argument("--x", required=True, help="comma-separated leader vector")
    _mode_arg(c)
    c.add_argument("--decimal", action="store_true")
    _caps_args(c)
    c.set_defaults(func=_cmd_adversary)

    c = sub.add_parser("follower",
                       help="follower response for fixed x and scenario c")
    c.add_argument("instance")
    c.add_argument("--x", required=True)
    c.add_argument("--c", required=True, help="comma-separated scenario")
    _mode_arg(c)
    c.add_argument("--decimal", action="store_true")
    _caps_args(c)
    c.set_defaults(func=_cmd_follower)

    c = sub.add_parser("verify", help="run oracle-equivalence sweeps")
    c.add_argument("--suite",
                   choices=["qsat", "single-level", "hull", "all"],
                   default="all")
    c.add_argument("--max-p", type=int, default=1)
    c.add_argument("--max-n", type=int, default=1)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED)
    c.add_argument("--random-count", type=int, default=10)
    _caps_args(c)
    c.set_defaults(func=_cmd_verify)

    c = sub.add_parser("demo", help="compile and solve a tiny example")
    c.set_defaults(func=_cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, LpError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
