import pytest

from posgames.errors import InputError, PreconditionError
from posgames.geography import NodeType
from posgames.gadgets import concrete_pairing, gadget_pairing_roles
from posgames.hypergraph import (
    REASON_OVERLAP,
    REASON_UNCOVERED,
    Hypergraph,
    MBPosition,
    MMPosition,
    Pairing,
    Player,
    Seat,
    find_pairing,
    greedy_pairs_mb,
    is_pairing,
    mb_update,
    mm_update,
    pairing_move,
    uniformize_mb,
)
from posgames.reduction import standalone_gadget


def edges(*members):
    return frozenset(frozenset(e) for e in members)


def test_build_sorts_vertices_and_dedupes_edges():
    board = Hypergraph.build(["c", "a", "b"], [["c", "b", "a"], ["b", "a"], ["a", "b"]])
    assert board.vertices == ("a", "b", "c")
    assert len(board.edges) == 2
    assert board.rank() == 3
    assert not board.is_uniform(2)


def test_build_rejects_empty_edge_and_bad_ids():
    with pytest.raises(InputError):
        Hypergraph.build(["a"], [[]])
    with pytest.raises(InputError):
        Hypergraph.build(["a b"], [["a b"]])
    with pytest.raises(InputError):
        Hypergraph.build(["a"], [["a", "z"]])


def test_json_is_sorted_by_size_then_members():
    board = Hypergraph.build(["c", "a", "b"], [["c", "b", "a"], ["b", "a"]])
    assert board.to_json() == {"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["a", "b", "c"]]}
    assert Hypergraph.from_json(board.to_json()) == board


def test_from_json_rejects_malformed():
    with pytest.raises(InputError):
        Hypergraph.from_json({"vertices": ["a"]})


def test_mb_update_after_maker_x1_x7_breaker_x2(sample_board):
    after = mb_update(sample_board, {"x1", "x7"}, {"x2"})
    assert after.edges == edges({"x3", "x4"}, {"x3", "x6"})
    assert after.vertices == ("x3", "x4", "x5", "x6", "x8")


def test_mb_update_identity_and_filled_edge(sample_board):
    assert mb_update(sample_board, (), ()).edges == sample_board.edges
    board = Hypergraph.build(["a", "b"], [["a", "b"]])
    after = mb_update(board, {"a", "b"}, ())
    assert after.edges == edges(set())
    assert after.has_empty_edge()


def test_mb_update_is_idempotent(sample_board):
    once = mb_update(sample_board, {"x1"}, {"x4"})
    assert mb_update(once, (), ()) == once


def test_mb_update_rejects_bad_picks(sample_board):
    with pytest.raises(PreconditionError):
        mb_update(sample_board, {"x1"}, {"x1"})
    with pytest.raises(PreconditionError):
        mb_update(sample_board, {"nope"}, ())


def test_mm_update_after_fp_x1_x7_sp_x2(sample_board):
    red, blue = mm_update(sample_board, {"x1", "x7"}, {"x2"})
    assert red == edges({"x3", "x4"}, {"x3", "x6"})
    assert blue == edges({"x4", "x5"})


def test_mm_update_families_mirror_mb_update(sample_board):
    red, blue = mm_update(sample_board, {"x3"}, {"x5", "x8"})
    assert red == mb_update(sample_board, {"x3"}, {"x5", "x8"}).edges
    assert blue == mb_update(sample_board, {"x5", "x8"}, {"x3"}).edges


def test_mm_update_each_side_kills_the_other():
    board = Hypergraph.build(["a", "b"], [["a", "b"]])
    assert mm_update(board, (), ()) == (board.edges, board.edges)
    assert mm_update(board, {"a"}, {"b"}) == (frozenset(), frozenset())


def test_positions_track_turns(sample_board):
    pos = MBPosition(sample_board).play("x1").play("x2")
    assert pos.to_move is Player.MAKER
    assert pos.maker_picks == {"x1"}
    assert pos.last_pick == "x2"
    assert "x1" not in pos.unpicked()
    mm = MMPosition(sample_board).play("x1")
    assert mm.to_move is Seat.SP
    with pytest.raises(PreconditionError):
        MBPosition(sample_board, ("x1", "x1"))


def test_is_pairing_accepts_vacuous_and_gadget_pairings():
    assert is_pairing(Hypergraph.build(["a"], []), Pairing()).ok
    board, slots = standalone_gadget(NodeType.M21)
    pairing = concrete_pairing("v", slots, gadget_pairing_roles(NodeType.M21))
    assert pairing.sorted_pairs() == [("a.p", "a.q"), ("b.p", "b.q"), ("c.p", "c.q")]
    assert is_pairing(board, pairing).ok


def test_is_pairing_reports_reasons():
    board = Hypergraph.build(["a", "b", "c", "d"], [["a", "b", "c"]])
    check = is_pairing(board, Pairing.of([("a", "d")]))
    assert not check.ok
    assert check.reason == REASON_UNCOVERED
    assert check.detail == ("a", "b", "c")
    check = is_pairing(board, Pairing.of([("a", "b"), ("b", "c")]))
    assert check.reason == REASON_OVERLAP


def test_pairing_rejects_non_pairs():
    with pytest.raises(InputError):
        Pairing.of([("a", "b", "c")])


def test_pairing_move_answers_inside_the_pair():
    board = Hypergraph.build(["a", "b", "c", "d"], [["a", "b"]])
    pairing = Pairing.of([("a", "b")])
    assert pairing_move(board, pairing, "a", ["b", "c", "d"]) == "b"
    assert pairing_move(board, pairing, "c", ["b", "d"]) == "b"
    assert pairing_move(board, Pairing(), "a", ["d", "c"]) == "c"
    with pytest.raises(PreconditionError):
        pairing_move(board, pairing, "a", [])


def test_find_pairing():
    disjoint = Hypergraph.build("abcd", [["a", "b"], ["c", "d"]])
    found = find_pairing(disjoint)
    assert found.complete
    assert found.pairing.sorted_pairs() == [("a", "b"), ("c", "d")]

    triangle = Hypergraph.build("abc", [["a", "b"], ["a", "c"], ["b", "c"]])
    search = find_pairing(triangle)
    assert search.pairing is None and search.complete

    empty = find_pairing(Hypergraph.build("a", []))
    assert empty.pairing == Pairing() and empty.complete


def test_find_pairing_stops_at_budget():
    triangle = Hypergraph.build("abc", [["a", "b"], ["a", "c"], ["b", "c"]])
    search = find_pairing(triangle, budget=1)
    assert not search.complete
    assert search.to_json()["found"] is False


def test_greedy_pairs():
    start = Hypergraph.build(["a.p", "a.q", "s.y1", "s.y2"], [["a.p", "s.y1"], ["a.q", "s.y2"]])
    pairs = greedy_pairs_mb(start)
    assert ("a.p", "s.y1") in pairs and ("a.q", "s.y2") in pairs

    path = Hypergraph.build("abc", [["a", "b"], ["b", "c"]])
    pairs = greedy_pairs_mb(path)
    assert ("b", "a") in pairs
    assert ("a", "b") not in pairs

    assert greedy_pairs_mb(Hypergraph.build("abc", [["a", "b", "c"]])) == []


def test_uniformize_pads_with_fresh_vertices():
    board = Hypergraph.build("ab", [["a", "b"]])
    assert uniformize_mb(board, 2).edges == board.edges

    three = uniformize_mb(board, 3)
    assert three.edges == edges({"a", "b", "a+b.u1"}, {"a", "b", "a+b.u2"})
    assert len(three.vertices) == 4

    four = uniformize_mb(board, 4)
    assert len(four.edges) == 4
    assert len(four.vertices) == 8
    assert four.is_uniform(4)


def test_uniformize_rejects_k_below_rank():
    board = Hypergraph.build("abc", [["a", "b", "c"]])
    with pytest.raises(PreconditionError):
        uniformize_mb(board, 2)


def test_overlapping_pairs_build_but_never_validate():
    pairing = Pairing.of([("a", "b"), ("b", "c")])
    assert not pairing.is_disjoint()
    check = is_pairing(Hypergraph.build(["a", "b", "c"], [["a", "b"]]), pairing)
    assert not check.ok
    assert check.reason == REASON_OVERLAP
