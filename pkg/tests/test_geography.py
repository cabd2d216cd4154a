import pytest

from posgames.errors import BudgetExceeded, InputError
from posgames.geography import (
    GeoInstance,
    GeoPlayer,
    GeoSolver,
    GeoState,
    NodeType,
    classify_nodes,
    optimal_oracle,
    path_oracle,
    solve_geo,
    to_dot,
    two_coloring,
    validate_geo,
)


def conditions(inst):
    return {v.condition for v in validate_geo(inst).violations}


def test_small_instances_are_valid(g1, g2, maze):
    for inst in (g1, g2, maze):
        report = validate_geo(inst)
        assert report.ok
        assert report.to_json() == {"valid": True, "violations": []}


def test_lone_start_is_invalid():
    inst = GeoInstance.build([], nodes=["s"])
    assert conditions(inst) == {"start-degree"}


def test_start_with_two_out_arcs_is_named():
    inst = GeoInstance.build([("s", "v1", "a"), ("s", "v2", "b"), ("v1", "v3", "c"), ("v2", "v3", "d"), ("v3", "v4", "e"), ("v4", "v3", "f")])
    assert "start-degree" in conditions(inst)


def test_odd_cycle_is_rejected():
    inst = GeoInstance.build([("s", "v1", "a"), ("v1", "v2", "b"), ("v2", "v3", "c"), ("v3", "v1", "d")])
    assert conditions(inst) == {"bipartite"}


def test_bipartite_violation_names_an_odd_cycle_edge():
    # v1..v4 form an even cycle; the chord v2-v4 closes the triangles.
    inst = GeoInstance.build(
        [("s", "v1", "a"), ("v1", "v2", "b"), ("v2", "v3", "c"), ("v3", "v4", "d"), ("v4", "v1", "e"), ("v2", "v4", "f")]
    )
    (violation,) = [v for v in validate_geo(inst).violations if v.condition == "bipartite"]
    assert violation.nodes == ("v2", "v4")


def test_disconnected_instance_is_rejected():
    inst = GeoInstance.build(
        [("s", "v1", "a"), ("v1", "v2", "b"), ("v2", "v1", "c"), ("v3", "v4", "d"), ("v4", "v3", "e")]
    )
    report = validate_geo(inst)
    assert conditions(inst) == {"weakly-connected"}
    assert set(report.violations[0].nodes) == {"v3", "v4"}


def test_bad_degree_is_rejected():
    inst = GeoInstance.build([("s", "v1", "a"), ("v1", "v2", "b")])
    report = validate_geo(inst)
    assert conditions(inst) == {"node-degree"}
    assert report.violations[0].nodes == ("v2",)


def test_structural_errors_raise():
    with pytest.raises(InputError):
        GeoInstance.build([("s", "s", "a")])
    with pytest.raises(InputError):
        GeoInstance.build([("s", "v1", "a"), ("v1", "v2", "a")])
    with pytest.raises(InputError):
        GeoInstance.build([("s", "v1", "a.b")])
    with pytest.raises(InputError):
        GeoInstance.from_json({"nodes": ["s"]})


def test_json_keeps_labels(maze):
    again = GeoInstance.from_json(maze.to_json())
    assert again == maze
    assert again.arc("k").head == "v4"


def test_two_coloring(g1, maze):
    assert two_coloring(g1) == {"s": 0, "v1": 1, "v2": 0}
    color = two_coloring(maze)
    assert {n for n, c in color.items() if c == 1} == {"v1", "v3", "v4", "v7"}
    assert {n for n, c in color.items() if c == 0} == {"s", "v2", "v5", "v6", "v8"}


def test_classify_maze(maze):
    types = classify_nodes(maze)
    by_type = {}
    for node, t in types.items():
        by_type.setdefault(t, set()).add(node)
    assert by_type == {
        NodeType.B01: {"s"},
        NodeType.B11: {"v5", "v8"},
        NodeType.B21: {"v6"},
        NodeType.B12: {"v2"},
        NodeType.M11: {"v1"},
        NodeType.M21: {"v4", "v7"},
        NodeType.M12: {"v3"},
    }


def test_classify_g1(g1):
    assert classify_nodes(g1) == {"s": NodeType.B01, "v1": NodeType.M21, "v2": NodeType.B11}


def test_classify_requires_valid_instance():
    with pytest.raises(InputError):
        classify_nodes(GeoInstance.build([], nodes=["s"]))


def test_winners(g1, g2, maze):
    assert solve_geo(g1) is GeoPlayer.ALICE
    assert solve_geo(g2) is GeoPlayer.BOB
    assert solve_geo(maze) in (GeoPlayer.ALICE, GeoPlayer.BOB)


def test_solver_budget(g1):
    with pytest.raises(BudgetExceeded):
        GeoSolver(g1, budget=1).winner()


def test_solver_table_is_per_instance(g1, g2):
    a, b = GeoSolver(g1), GeoSolver(g2)
    a.winner()
    assert b.table_size == 0
    assert a.table_size > 0


def test_optimal_oracle_picks_the_only_arc(g1):
    oracle = optimal_oracle(g1)
    state = GeoState("v1", frozenset({"s", "v1"}), GeoPlayer.ALICE)
    assert oracle(state) == "b"


def test_path_oracle_follows_the_path(maze):
    oracle = path_oracle(maze, ["s", "v1", "v2", "v4"])
    state = GeoState("v2", frozenset({"s", "v1", "v2"}), GeoPlayer.BOB)
    assert oracle(state) == "d"
    stray = path_oracle(maze, ["s", "v1", "v2", "v5"])
    with pytest.raises(InputError):
        stray(state)


def test_dot_shapes(g1):
    dot = to_dot(g1, classify_nodes(g1))
    assert '"s" [shape=doublecircle' in dot
    assert '"v1" [shape=ellipse, label="v1\\nM21"]' in dot
    assert '"v2" [shape=box' in dot
    assert '"v2" -> "v1" [label="c"];' in dot
