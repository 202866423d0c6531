from fractions import Fraction

import pytest

from pcspan.config import SolverConfig
from pcspan.errors import ResourceLimitError
from pcspan.generate import gen_pcs
from pcspan.model import is_feasible, walk_resource
from pcspan.product import (
    analytic_state_edge_count,
    build_product_graph,
    connectable_relation_pairs,
    dump_edges,
    equivalence_check,
    layer_bounds,
    project_to_base,
    relation_holds,
    states_reachable_from_root_right,
    states_reaching_root_left,
    step_label,
)
from pcspan.scaling import scale_instance

from conftest import make_instance


def test_layer_bounds_integer_regime(tri_instance):
    b = layer_bounds(tri_instance)
    assert b.lower == (0, 0)
    assert b.upper == (2, 1)  # Bdgt_max[0] = 2, packing tau = 1
    assert b.delta == 1


def test_config_count_example():
    # m = 1 packing with tau = 2 -> 3 configurations
    inst = make_instance(
        n=2,
        edges=[(0, 1, 0, (1, 0))],
        demands=[(0, 1, (1, 2))],
        tau=2,
        packing=1,
        covering=0,
    )
    assert layer_bounds(inst).config_count() == 3


def test_edge_label_offsets(tri_instance):
    pg = build_product_graph(tri_instance, 0)
    inst = tri_instance
    for pe in pg.edges:
        if pe.kind != "state":
            continue
        _, side, u, i_lab = pg.vertex_keys[pe.tail]
        _, _s, v, j_lab = pg.vertex_keys[pe.head]
        res = inst.edges[pe.base_edge].res
        if side == "R":
            src, dst = i_lab, j_lab
        else:
            src, dst = j_lab, i_lab
        assert dst[0] - src[0] == res[0]
        for i in range(1, inst.dim):
            expected = src[i] + res[i]
            if inst.resource_kind(i) == "covering":
                expected = max(-inst.tau, expected)
            assert dst[i] == expected


def test_exactly_one_bridge(tri_instance):
    pg = build_product_graph(tri_instance, 1)
    bridges = [pe for pe in pg.edges if pe.kind == "bridge"]
    assert len(bridges) == 1
    assert bridges[0].cost == 0
    assert pg.vertex_keys[bridges[0].tail][1] == "L"
    assert pg.vertex_keys[bridges[0].head][1] == "R"


def test_covering_clamp_keeps_floor_entry_fixed():
    inst = make_instance(
        n=2,
        edges=[(0, 1, 0, (1, -1)), (1, 0, 0, (1, 0))],
        demands=[(0, 1, (6, -1))],
        tau=1,
        packing=0,
        covering=1,
    )
    bounds = layer_bounds(inst)
    at_floor = (0, -1)
    stepped = step_label(inst, bounds, at_floor, 0, 1)
    assert stepped is not None and stepped[1] == -1  # entry stays at the clamp


def test_analytic_edge_count_matches(tri_instance):
    pg = build_product_graph(tri_instance, 0)
    built = sum(1 for pe in pg.edges if pe.kind == "state")
    assert built == analytic_state_edge_count(tri_instance)


def test_memory_guard():
    inst = make_instance(
        n=3,
        edges=[(0, 1, 0, (1, 0)), (1, 2, 0, (1, 0))],
        demands=[(0, 2, (2, 1))],
        tau=1,
        packing=1,
        covering=0,
    )
    with pytest.raises(ResourceLimitError):
        build_product_graph(inst, 0, SolverConfig(max_product_vertices=5))


def test_project_to_base_dummies_vanish(tri_instance):
    pg = build_product_graph(tri_instance, 1)
    bridge_idx = next(i for i, pe in enumerate(pg.edges) if pe.kind == "bridge")
    assert project_to_base(pg, [bridge_idx]).is_empty()


def test_projection_resource_dominated_by_labels(tri_instance):
    # follow a terminal-to-terminal path by hand and check RES <= I + J
    pg = build_product_graph(tri_instance, 1)
    pairs = connectable_relation_pairs(pg)
    (i_lab, j_lab) = pairs[0][0]
    # product path: (s^t,I) -> (s,I,L) -> (r,0,L) -> (r,0,R) -> (t,J,R) -> (t^s,J)
    path = _find_product_path(
        pg, pg.terminal_id(0, "src", i_lab), pg.terminal_id(0, "snk", j_lab)
    )
    walk = project_to_base(pg, path)
    res = walk_resource(walk, tri_instance)
    combined = tuple(a + b for a, b in zip(i_lab, j_lab))
    assert res[0] <= combined[0]
    assert all(res[i] <= combined[i] for i in range(1, tri_instance.dim))
    assert is_feasible(walk, tri_instance.demands[0], tri_instance)


def _find_product_path(pg, start, goal):
    prev = {start: None}
    stack = [start]
    while stack:
        v = stack.pop()
        if v == goal:
            break
        for idx in pg.out_adj[v]:
            h = pg.edges[idx].head
            if h not in prev:
                prev[h] = (v, idx)
                stack.append(h)
    assert goal in prev
    path = []
    cur = goal
    while prev[cur] is not None:
        v, idx = prev[cur]
        path.append(idx)
        cur = v
    return list(reversed(path))


def test_root_on_every_walk_both_sides_true(tri_instance):
    rep = equivalence_check(tri_instance, 1)
    assert rep["mismatches"] == 0
    assert rep["demands"][0]["product"] and rep["demands"][0]["oracle"]


def test_root_unreachable_both_sides_false():
    inst = make_instance(
        n=3,
        edges=[(0, 1, 0, (1, 0))],
        demands=[(0, 1, (1, 1))],
        tau=1,
        packing=1,
        covering=0,
    )
    rep = equivalence_check(inst, 2)
    assert rep["mismatches"] == 0
    assert not rep["demands"][0]["product"] and not rep["demands"][0]["oracle"]


def test_equivalence_random_instances_all_roots():
    for seed in range(10):
        inst = gen_pcs(n=5, k=2, m=2, tau=1, regime="integer", seed=seed + 7)
        for root in range(inst.n):
            rep = equivalence_check(inst, root)
            assert rep["mismatches"] == 0, (seed, root, rep)


def test_equivalence_scaled_regime():
    for seed in range(4):
        inst = gen_pcs(n=4, k=1, m=1, tau=1, regime="rational-negative", seed=seed + 200)
        scaled = scale_instance(inst, Fraction(1, 2))
        for root in range(inst.n):
            rep = equivalence_check(scaled, root)
            assert rep["mismatches"] == 0, (seed, root, rep)


def test_root_revisit_tracked_by_root_labels():
    # the junction walk must loop r -> x -> r before heading to t
    inst = make_instance(
        n=4,
        edges=[
            (0, 1, 0, (1, 0)),
            (1, 2, 0, (1, -1)),
            (2, 1, 0, (1, 0)),
            (1, 3, 0, (1, 0)),
        ],
        demands=[(0, 3, (6, -1))],
        tau=1,
        packing=0,
        covering=1,
    )
    rep = equivalence_check(inst, 1)
    assert rep["mismatches"] == 0
    assert rep["demands"][0]["product"]


def test_degenerate_roots_source_and_target(tri_instance):
    for root in (0, 2):  # root equals the demand source / target
        rep = equivalence_check(tri_instance, root)
        assert rep["mismatches"] == 0
        assert rep["demands"][0]["product"]


def test_dump_edges_format(tri_instance):
    pg = build_product_graph(tri_instance, 0)
    text = dump_edges(pg)
    line = text.splitlines()[0].split()
    assert line[0] in ("L", "R")
    assert len([l for l in text.splitlines() if l]) == sum(
        1 for pe in pg.edges if pe.kind == "state"
    )


def test_parallel_product_edges_keep_cheapest():
    inst = make_instance(
        n=2,
        edges=[(0, 1, 7, (1, 0)), (0, 1, 2, (1, 0))],  # same resource vector
        demands=[(0, 1, (1, 1))],
        tau=1,
        packing=1,
        covering=0,
    )
    pg = build_product_graph(inst, 1)
    state_edges = [pe for pe in pg.edges if pe.kind == "state"]
    assert all(pe.cost == 2 and pe.base_edge == 1 for pe in state_edges)


def test_relation_box_semantics():
    budget = (5, 1, -1)
    assert relation_holds(budget, (2, 1, -1), (3, 0, 0))
    assert not relation_holds(budget, (3, 1, 0), (3, 0, -1))
    assert not relation_holds(budget, (2, 1, 0), (2, 1, -1))
