import json
from fractions import Fraction as F

import pytest

from rbo import geometry
from rbo.bilevel import (
    AllBinary,
    Caps,
    ExplicitList,
    InstanceError,
    Mode,
    RobustBilevelInstance,
    adversary_discrete,
    adversary_geometric,
    enumerate_leader,
    follower_response,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
    solve_certain,
    solve_robust,
    validate_instance,
)
from rbo.compiler import (
    FollowerVar,
    Formula,
    compile_qsat_optimistic,
    compile_qsat_pessimistic,
    parse_formula,
)
from rbo.numeric import ONE, ZERO, dot
from rbo.uncertainty import (
    ConvexHull,
    DiscreteSet,
    Interval,
    ProductFinite,
    box_corner_scenarios,
    contains_scenario,
)


def segment_instance(uncertainty, mode=Mode.OPTIMISTIC):
    """p = 0, follower set [0, 1], leader objective d = y."""
    return RobustBilevelInstance(
        p=0, n=1, lhs=((ONE,), (-ONE,)), leader_mat=((), ()),
        rhs=(ONE, ZERO), leader_obj=(ONE,), leader_set=AllBinary(0),
        uncertainty=uncertainty, mode_default=mode)


BOX = Interval((F(-1),), (F(1),))


def test_follower_aligned_objective():
    inst = segment_instance(BOX)
    for mode in Mode:
        y, value = follower_response(inst, (), (F(1),), mode)
        assert y == (F(1),) and value == 1


def test_follower_full_face_tie():
    inst = segment_instance(BOX)
    _, value = follower_response(inst, (), (F(0),), Mode.OPTIMISTIC)
    assert value == 1
    _, value = follower_response(inst, (), (F(0),), Mode.PESSIMISTIC)
    assert value == 0


def test_follower_pessimistic_gadget_half_half():
    art = compile_qsat_pessimistic(Formula(FollowerVar(1), 0, 1))
    inst = art.instance
    c = [ZERO] * inst.n
    c[art.column_of("ydev1")] = ONE
    for mode in Mode:
        y, value = follower_response(inst, (), c, mode)
        assert y[art.column_of("y1")] == F(1, 2)
        assert y[art.column_of("ydev1")] == F(1, 2)
        assert value >= art.big_m / 2


def test_adversary_discrete_examples():
    inst = segment_instance(DiscreteSet(((F(1),), (F(-1),))))
    c, value = adversary_discrete(inst, (), Mode.OPTIMISTIC)
    assert value == 0 and c == (F(-1),)
    inst = segment_instance(DiscreteSet(((F(1),),)))
    assert adversary_discrete(inst, (), Mode.OPTIMISTIC)[1] == 1
    inst = segment_instance(DiscreteSet(((F(0),),)))
    assert adversary_discrete(inst, (), Mode.PESSIMISTIC)[1] == 0


def test_adversary_discrete_wrong_kind():
    with pytest.raises(InstanceError):
        adversary_discrete(segment_instance(BOX), (), Mode.OPTIMISTIC)


def test_adversary_geometric_examples():
    inst = segment_instance(BOX)
    c, value = adversary_geometric(inst, (), Mode.OPTIMISTIC)
    assert value == 0 and c == (F(-1),)
    inst = segment_instance(Interval((F(1),), (F(2),)))
    for mode in Mode:
        _, value = adversary_geometric(inst, (), mode)
        assert value == 1


def test_adversary_geometric_qsat_witness():
    # For a yes-instance's witness x the adversary cannot push below 1.
    formula = parse_formula("(or x1 y1)", 1, 1)
    inst = compile_qsat_optimistic(formula).instance
    _, value = adversary_geometric(inst, (F(1),), Mode.OPTIMISTIC)
    assert value == 1
    _, value = adversary_geometric(inst, (F(0),), Mode.OPTIMISTIC)
    assert value == 0


def test_adversary_product_finite():
    inst = segment_instance(ProductFinite(((F(-1), F(1)),)))
    c, value = adversary_geometric(inst, (), Mode.OPTIMISTIC)
    assert value == 0 and c == (F(-1),)


def test_adversary_product_cap():
    inst = segment_instance(ProductFinite(((F(-1), F(1)),)))
    with pytest.raises(geometry.CapExceededError):
        adversary_geometric(inst, (), Mode.OPTIMISTIC,
                            caps=Caps(grid_points=1))


def test_adversary_hull():
    inst = segment_instance(ConvexHull(((F(-1),), (F(1),))))
    _, value = adversary_geometric(inst, (), Mode.OPTIMISTIC)
    assert value == 0


def test_solve_certain_examples():
    inst = segment_instance(Interval((F(1),), (F(1),)))
    report = solve_certain(inst, (F(1),), Mode.OPTIMISTIC)
    assert report.value == 1
    sat = parse_formula("(or x1 (not x1))", 1, 0)
    art = compile_qsat_optimistic(sat)
    c = tuple(art.instance.uncertainty.lower)
    assert solve_certain(art.instance, c, Mode.OPTIMISTIC).value == 1
    unsat = parse_formula("(and x1 (not x1))", 1, 0)
    art = compile_qsat_optimistic(unsat)
    c = tuple(art.instance.uncertainty.lower)
    assert solve_certain(art.instance, c, Mode.OPTIMISTIC).value == 0


def test_solve_robust_qsat_examples():
    yes = parse_formula("(or x1 y1)", 1, 1)
    report = solve_robust(compile_qsat_optimistic(yes).instance,
                          Mode.OPTIMISTIC)
    assert report.value == 1 and report.leader_x == (F(1),)
    no = Formula(FollowerVar(1), 0, 1)
    assert solve_robust(compile_qsat_optimistic(no).instance,
                        Mode.OPTIMISTIC).value == 0


def test_solve_report_consistency():
    inst = segment_instance(BOX)
    report = solve_robust(inst, Mode.OPTIMISTIC)
    assert report.value == dot(inst.leader_obj, report.follower_y)
    assert len(report.trace) == 1
    assert contains_scenario(inst.uncertainty, report.worst_scenario)


def test_leader_tie_break_lexicographic():
    # Both leader choices give value 0; the report must pick x = (0,).
    inst = RobustBilevelInstance(
        p=1, n=1, lhs=((ONE,), (-ONE,)), leader_mat=((ZERO,), (ZERO,)),
        rhs=(ONE, ZERO), leader_obj=(ONE,), leader_set=AllBinary(1),
        uncertainty=DiscreteSet(((F(-1),),)))
    report = solve_robust(inst, Mode.OPTIMISTIC)
    assert report.leader_x == (F(0),)


def test_optimistic_dominates_pessimistic():
    instances = [
        segment_instance(BOX),
        compile_qsat_optimistic(parse_formula("(or y1 y2)", 0, 2)).instance,
    ]
    scenarios = [(F(0),), (F(1),), (F(-1),)]
    for inst in instances:
        for x in enumerate_leader(inst):
            for c in scenarios:
                full = list(c) + [ZERO] * (inst.n - 1)
                _, opt = follower_response(inst, x, full, Mode.OPTIMISTIC)
                _, pes = follower_response(inst, x, full, Mode.PESSIMISTIC)
                assert opt >= pes


def test_discrete_superset_monotonicity():
    small = DiscreteSet(((F(1),),))
    large = DiscreteSet(((F(1),), (F(-1),)))
    v_small = solve_robust(segment_instance(small), Mode.OPTIMISTIC).value
    v_large = solve_robust(segment_instance(large), Mode.OPTIMISTIC).value
    assert v_large <= v_small


def test_robust_never_beats_certain():
    inst = segment_instance(BOX)
    robust = solve_robust(inst, Mode.OPTIMISTIC).value
    for c in ((F(-1),), (F(0),), (F(1),), (F(1, 2),)):
        assert robust <= solve_certain(inst, c, Mode.OPTIMISTIC).value


def test_box_vertex_discretization_on_compiled():
    # On compiled instances the box adversary needs only corner scenarios.
    for text, p, n in (("(or x1 y1)", 1, 1), ("(and y1 (not y2))", 0, 2)):
        art = compile_qsat_optimistic(parse_formula(text, p, n))
        inst = art.instance
        corners = DiscreteSet(tuple(box_corner_scenarios(inst.uncertainty)))
        twin = RobustBilevelInstance(
            p=inst.p, n=inst.n, lhs=inst.lhs, leader_mat=inst.leader_mat,
            rhs=inst.rhs, leader_obj=inst.leader_obj,
            leader_set=inst.leader_set, uncertainty=corners)
        for mode in Mode:
            assert (solve_robust(inst, mode).value
                    == solve_robust(twin, mode).value)


def test_geometric_matches_direct_face_lattice():
    # The shadow adversary agrees with the direct computation on the full
    # face lattice of Y(x), which is affordable for small instances.
    inst = RobustBilevelInstance(
        p=0, n=2,
        lhs=((ONE, ZERO), (ZERO, ONE), (-ONE, ZERO), (ZERO, -ONE),
             (ONE, ONE)),
        leader_mat=((), (), (), (), ()),
        rhs=(ONE, ONE, ZERO, ZERO, F(3, 2)),
        leader_obj=(F(2), F(-1)),
        leader_set=AllBinary(0),
        uncertainty=Interval((F(-1), F(0)), (F(1), F(1))))

    def direct(mode):
        poly = inst.follower_polyhedron(())
        vset = geometry.enumerate_vertices(poly)
        best = None
        for face in geometry.enumerate_faces(poly, vset):
            cert = geometry.exposure_check(face, vset, inst.uncertainty)
            if cert is None:
                continue
            scores = [dot(inst.leader_obj, vset.vertices[i])
                      for i in face.vertex_indices]
            outcome = max(scores) if mode is Mode.OPTIMISTIC else min(scores)
            if best is None or outcome < best:
                best = outcome
        return best

    for mode in Mode:
        _, value = adversary_geometric(inst, (), mode)
        assert value == direct(mode)


def test_validation_accepts_and_rejects():
    validate_instance(segment_instance(BOX))
    empty = RobustBilevelInstance(
        p=0, n=1, lhs=((ONE,), (-ONE,)), leader_mat=((), ()),
        rhs=(ZERO, -ONE), leader_obj=(ONE,), leader_set=AllBinary(0),
        uncertainty=BOX)
    with pytest.raises(InstanceError):
        validate_instance(empty)
    unbounded = RobustBilevelInstance(
        p=0, n=1, lhs=((-ONE,),), leader_mat=((),), rhs=(ZERO,),
        leader_obj=(ONE,), leader_set=AllBinary(0), uncertainty=BOX)
    with pytest.raises(InstanceError):
        validate_instance(unbounded)


def test_leader_set_validation():
    with pytest.raises(InstanceError):
        ExplicitList(((F(1, 2),),))
    with pytest.raises(InstanceError):
        RobustBilevelInstance(
            p=1, n=1, lhs=((ONE,),), leader_mat=((ZERO,),), rhs=(ONE,),
            leader_obj=(ONE,), leader_set=AllBinary(2), uncertainty=BOX)


def test_explicit_leader_enumeration_sorted():
    inst = RobustBilevelInstance(
        p=2, n=1, lhs=((ONE,), (-ONE,)),
        leader_mat=((ZERO, ZERO), (ZERO, ZERO)), rhs=(ONE, ZERO),
        leader_obj=(ONE,),
        leader_set=ExplicitList(((F(1), F(0)), (F(0), F(1)))),
        uncertainty=BOX)
    assert enumerate_leader(inst) == [(F(0), F(1)), (F(1), F(0))]


def test_json_round_trip_identity(tmp_path):
    art = compile_qsat_pessimistic(parse_formula("(or x1 y1)", 1, 1))
    path = tmp_path / "instance.json"
    save_instance(path, art.instance, var_map=art.var_map, big_m=art.big_m)
    loaded, meta = load_instance(path)
    assert meta["var_map"] == list(art.var_map)
    assert meta["M"] == art.big_m
    again = tmp_path / "again.json"
    save_instance(again, loaded, var_map=meta["var_map"], big_m=meta["M"])
    assert json.loads(path.read_text()) == json.loads(again.read_text())
    reloaded, _ = load_instance(again)
    assert reloaded == loaded


def test_json_rejects_malformed():
    with pytest.raises(InstanceError):
        instance_from_json({"p": 1})
    doc = instance_to_json(segment_instance(BOX))
    doc["uncertainty"]["kind"] = "mystery"
    with pytest.raises(InstanceError):
        instance_from_json(doc)


def test_scenario_membership():
    box = Interval((F(-1), F(0)), (F(1), F(1)))
    assert contains_scenario(box, (F(0), F(1, 2)))
    assert not contains_scenario(box, (F(2), F(0)))
    hull = ConvexHull(((F(0), F(0)), (F(2), F(0)), (F(0), F(2))))
    assert contains_scenario(hull, (F(1), F(1)))
    assert contains_scenario(hull, (F(1, 2), F(1, 2)))
    assert not contains_scenario(hull, (F(2), F(2)))
    grid = ProductFinite(((F(0), F(1)), (F(5),)))
    assert contains_scenario(grid, (F(1), F(5)))
    assert not contains_scenario(grid, (F(1), F(4)))
