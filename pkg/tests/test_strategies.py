import pytest

from posgames import strategies
from posgames.errors import PreconditionError, StrategyError
from posgames.geography import NodeType, optimal_oracle, path_oracle
from posgames.hypergraph import REASON_OVERLAP, MBPosition, PairingCheck, Player, is_pairing
from posgames.reduction import Variant, reduce
from posgames.strategies import (
    BreakerStrategy,
    MakerStrategy,
    RegularPlay,
    breaker_strategy,
    check_punishments,
    decision_point,
    end_pairing,
    maker_strategy,
    punish,
    regular_play_residues,
    regular_sequence,
    residual_pairing,
    verify_mb_strategy,
    verify_mm_claims,
)

M, B = Player.MAKER, Player.BREAKER

G1_LINE = (
    "a.p", "s.y1", "a.q", "s.y2",
    "v1.x1", "v1.z_a", "b.p", "v1.y1", "b.q", "v1.y2",
    "v2.x1", "v2.y1", "c.p", "v2.y2", "c.q", "v2.y3",
    "v1.z_b",
)

# Maze path that leaves v2 toward v3 (slot b of the B12 gadget).
TOWARD_V3 = ["s", "v1", "v2", "v3"]


def drive(red, oracle, node, phase):
    """Regular play until `node` is active at `phase`; returns the automaton and the position."""
    rp = RegularPlay(red)
    while not (rp.state.active_node == node and rp.state.phase == phase):
        rp.play(rp.scripted(oracle))
    history = tuple(v for _, v in rp.state.history)
    return rp, MBPosition(red.board, history)


def play_game(red, maker, breaker):
    pos = MBPosition(red.board)
    while not pos.updated().has_empty_edge() and pos.unpicked():
        mover = maker if pos.to_move is M else breaker
        pos = pos.play(mover(pos))
    return pos


def holds_after_reply(pos, plan):
    after = pos.play(plan.breaker_reply)
    alive = frozenset(after.unpicked())
    return plan.global_pairing.is_disjoint() and is_pairing(after.updated(), plan.global_pairing.restrict_to(alive)).ok


def test_regular_sequences():
    assert regular_sequence(NodeType.B01, None, None) == [(M, "p_a"), (B, "y1"), (M, "q_a"), (B, "y2")]
    assert regular_sequence(NodeType.M21, "a", None) == [
        (M, "x1"), (B, "z_a"), (M, "p_c"), (B, "y1"), (M, "q_c"), (B, "y2"),
    ]
    assert regular_sequence(NodeType.B12, "a", "c") == [
        (M, "x1"), (B, "y1"), (M, "x2"), (B, "y2"), (M, "x3"),
        (B, "y3"), (M, "p_c"), (B, "y4"), (M, "q_c"), (B, "y5"),
    ]


def test_regular_sequence_checks_the_choice():
    with pytest.raises(PreconditionError):
        regular_sequence(NodeType.B12, "a", None)
    with pytest.raises(PreconditionError):
        regular_sequence(NodeType.M11, "a", "b")
    with pytest.raises(PreconditionError):
        regular_sequence(NodeType.B01, "a", None)


def test_regular_play_rejects_off_script(g1_rank4):
    rp = RegularPlay(g1_rank4)
    with pytest.raises(StrategyError):
        rp.play("s.y1")


def test_opening_moves(g1, g1_rank4):
    oracle = optimal_oracle(g1)
    start = MBPosition(g1_rank4.board)
    assert maker_strategy(start, g1_rank4, oracle) == "a.p"
    assert breaker_strategy(start.play("a.p"), g1_rank4, oracle) == "s.y1"
    # Breaker ignored the threat on {a.p, s.y1}.
    assert maker_strategy(start.play("a.p").play("v1.x1"), g1_rank4, oracle) == "s.y1"


def test_g1_regular_play_ends_with_maker_filling_z(g1, g1_rank4):
    oracle = optimal_oracle(g1)
    pos = play_game(g1_rank4, MakerStrategy(g1_rank4, oracle), BreakerStrategy(g1_rank4, oracle))
    assert pos.history == G1_LINE
    assert pos.updated().has_empty_edge()
    assert g1_rank4.z_vertex("v1", "c") == "v1.z_b"


def test_g2_regular_play_ends_with_breaker_pairing(g2, g2_rank4):
    oracle = optimal_oracle(g2)
    maker, breaker = MakerStrategy(g2_rank4, oracle), BreakerStrategy(g2_rank4, oracle)
    pos = MBPosition(g2_rank4.board)
    while len(pos.unpicked()) > 1:
        mover = maker if pos.to_move is M else breaker
        pos = pos.play(mover(pos))
    decision = breaker.decide(pos)
    assert decision.vertex == "v3.y3"
    assert decision.kind == "end-pairing"
    assert decision.pairing is not None
    assert not pos.play(decision.vertex).updated().edges


def test_maker_strategy_refuses_positions_it_never_plays(g1, g1_rank4):
    strategy = MakerStrategy(g1_rank4, optimal_oracle(g1))
    with pytest.raises(StrategyError):
        strategy.decide(MBPosition(g1_rank4.board, ("v1.x1", "s.y1")))


def test_end_pairing_of_g1_is_empty(g1, g1_rank4):
    rp = RegularPlay(g1_rank4)
    rp.play_out(optimal_oracle(g1))
    assert rp.ended and rp.state.reactivated == "v1"
    assert rp.maker_wins_at_end()
    with pytest.raises(PreconditionError):
        residual_pairing(rp, "v1")
    assert end_pairing(rp).pairs == frozenset()


def test_residues_along_a_maze_path(maze_rank4):
    report, residues = regular_play_residues(maze_rank4, ["s", "v1", "v2", "v4", "v6", "v7", "v8"])
    assert report.ok, [r.to_json() for r in report.failures()]
    trio = frozenset({"k.p", "k.q", "v4.z_b"})
    assert residues["v4"] == (trio, frozenset({trio}))
    assert residues["v2"] == (frozenset({"c.p", "c.q"}), frozenset())


def test_breaker_chooses_at_b12_with_its_oracle(maze, maze_rank4):
    oracle = path_oracle(maze, TOWARD_V3)
    rp, pos = drive(maze_rank4, oracle, "v2", 5)
    assert pos.history[-1] == "v2.x3"
    assert breaker_strategy(pos, maze_rank4, oracle) == "v2.y4"


def test_punish_b12_before_x3(maze, maze_rank4):
    rp, base = drive(maze_rank4, path_oracle(maze, TOWARD_V3), "v2", 4)
    assert decision_point(rp) == "b12-x3"
    pos = base.play("v2.y3")
    plan = punish(pos, maze_rank4, "v2.y3", rp=rp)
    assert plan.case == "2a"
    assert plan.breaker_reply == "v2.y4"
    assert {frozenset({"c.p", "v2.x3"}), frozenset({"d.p", "d.q"})} <= plan.global_pairing.pairs
    assert holds_after_reply(pos, plan)


def test_punish_b12_before_q(maze, maze_rank4):
    rp, base = drive(maze_rank4, path_oracle(maze, TOWARD_V3), "v2", 8)
    assert decision_point(rp) == "b12-q"
    pos = base.play("v2.y5")
    plan = punish(pos, maze_rank4, "v2.y5", rp)
    assert plan.case == "3a"
    assert plan.breaker_reply == "c.q"
    assert frozenset({"d.p", "d.q"}) in plan.global_pairing.pairs
    assert holds_after_reply(pos, plan)


def test_punish_m12_choice(maze, maze_rank4):
    rp, base = drive(maze_rank4, path_oracle(maze, TOWARD_V3), "v3", 4)
    assert decision_point(rp) == "m12-choice"

    pos = base.play("v3.y3")
    plan = punish(pos, maze_rank4, "v3.y3", rp)
    assert (plan.case, plan.breaker_reply) == ("1a", "v3.z1")
    assert frozenset({"v3.z2", "f.p"}) in plan.global_pairing.pairs
    assert holds_after_reply(pos, plan)

    pos = base.play("v5.x1")
    plan = punish(pos, maze_rank4, "v5.x1", rp)
    assert (plan.case, plan.breaker_reply) == ("1c", "v3.y3")
    assert {frozenset({"v3.z1", "v3.z2"}), frozenset({"e.p", "e.q"}), frozenset({"f.p", "f.q"})} <= plan.global_pairing.pairs
    assert holds_after_reply(pos, plan)


def test_punish_rejects_scripted_moves(maze, maze_rank4):
    rp, base = drive(maze_rank4, path_oracle(maze, TOWARD_V3), "v3", 4)
    with pytest.raises(PreconditionError):
        punish(base.play("v3.z1"), maze_rank4, "v3.z1", rp)


def test_breaker_strategy_punishes_m12_deviation(maze, maze_rank4):
    oracle = path_oracle(maze, TOWARD_V3)
    _, base = drive(maze_rank4, oracle, "v3", 4)
    decision = BreakerStrategy(maze_rank4, oracle).decide(base.play("v3.y3"))
    assert decision.vertex == "v3.z1"
    assert decision.kind == "punish-1a"
    assert decision.pairing is not None


def test_every_punishment_leaves_a_pairing(maze_rank4):
    report = check_punishments(maze_rank4)
    assert report.ok, [r.to_json() for r in report.failures()][:5]
    assert report.stats["decision_points"] > 0


def test_maker_strategy_wins_g1(g1, g1_rank4):
    report = verify_mb_strategy(g1_rank4, Player.MAKER, optimal_oracle(g1))
    assert report.ok, report.to_json()["failed"]
    assert report.stats["max_punish_moves"] <= 2
    assert report.stats["maker_leaves"] > 0


def test_verify_runs_on_rank4_only(g1):
    red = reduce(g1, Variant.MM_UNIFORM)
    with pytest.raises(PreconditionError):
        verify_mb_strategy(red, Player.MAKER, optimal_oracle(g1))


@pytest.mark.slow
def test_breaker_strategy_wins_g2(g2, g2_rank4):
    report = verify_mb_strategy(g2_rank4, Player.BREAKER, optimal_oracle(g2))
    assert report.ok, report.to_json()["failed"]
    assert report.stats["pairing_leaves"] > 0


@pytest.mark.slow
def test_breaker_strategy_cannot_win_g1(g1, g1_rank4):
    report = verify_mb_strategy(g1_rank4, Player.BREAKER, optimal_oracle(g1))
    assert not report.ok
    assert report.failures()[0].counterexample


def test_mm_claims_g1(g1, g1_rank4):
    report = verify_mm_claims(g1_rank4, optimal_oracle(g1))
    assert report.ok, [r.to_json() for r in report.failures()]
    assert report.stats["maker_wins_at_end"] is True
    assert report.stats["moves"] == 16


def test_mm_claims_g2(g2, g2_rank4):
    report = verify_mm_claims(g2_rank4, optimal_oracle(g2))
    assert report.ok, [r.to_json() for r in report.failures()]
    assert report.stats["maker_wins_at_end"] is False
    claims = {r.claim for r in report.results}
    assert {"sp-draw-pairing", "fp-draw-pairing", "blue-star-property"} <= claims


def test_mm_claims_g1_with_ten_vertex_start(g1):
    red = reduce(g1, Variant.MM_UNIFORM)
    report = verify_mm_claims(red, optimal_oracle(g1))
    assert report.ok, [r.to_json() for r in report.failures()][:5]
    assert report.stats["mm-opening.branches"] > 0


def test_regular_play_waits_at_a_two_out_choice(maze, maze_rank4):
    rp = RegularPlay(maze_rank4)
    rp.play_out(path_oracle(maze, TOWARD_V3), until="v2")
    for _ in range(5):
        rp.play(rp.scripted(optimal_oracle(maze)))
    assert rp.state.history[-1] == (M, "v2.x3")
    assert rp.state.active_node == "v2" and rp.at_choice()
    assert rp.options() == {"v2.y4": "b", "v2.y3": "c"}
    rp.play("v2.y4")
    assert rp.state.choice == "b" and rp.state.active_node == "v2"


def test_maze_regular_play_reaches_an_m21_node(maze, maze_rank4):
    rp = RegularPlay(maze_rank4)
    rp.play_out(optimal_oracle(maze))
    assert rp.ended
    assert rp.maker_wins_at_end()


def test_breaker_strategy_loses_the_maze(maze, maze_rank4):
    oracle = optimal_oracle(maze)
    pos = play_game(maze_rank4, MakerStrategy(maze_rank4, oracle), BreakerStrategy(maze_rank4, oracle))
    assert pos.updated().has_empty_edge()


def test_mm_claims_maze(maze, maze_rank4):
    report = verify_mm_claims(maze_rank4, optimal_oracle(maze))
    assert report.ok, [r.to_json() for r in report.failures()][:5]
    assert report.stats["maker_wins_at_end"] is True
    assert report.stats["moves"] == 60


def test_failed_mm_claims_carry_the_line(monkeypatch, g2, g2_rank4):
    monkeypatch.setattr(strategies, "is_pairing", lambda board, pairing: PairingCheck(False, REASON_OVERLAP, ()))
    report = verify_mm_claims(g2_rank4, optimal_oracle(g2))
    (failed,) = [r for r in report.failures() if r.claim == "sp-draw-pairing"]
    assert len(failed.counterexample) == report.stats["moves"]
    assert failed.counterexample[:2] == ("a.p", "s.y1")
    assert all(r.counterexample == () for r in report.results if r.ok)


def test_incremental_breaker_replay_matches_full_replay(g2, g2_rank4):
    oracle = optimal_oracle(g2)
    strategy = BreakerStrategy(g2_rank4, oracle)
    maker = MakerStrategy(g2_rank4, oracle)
    tracker = strategy.start()
    pos = MBPosition(g2_rank4.board)
    kinds = []
    while len(pos.unpicked()) > 1:
        pos = pos.play(maker(pos))
        before = tracker.copy()
        key = before.key()
        decision = tracker.decide(pos)
        assert decision == strategy.decide(pos)
        assert before.key() == key
        kinds.append(decision.kind)
        pos = pos.play(decision.vertex)
    assert kinds[-1] == "end-pairing"


@pytest.mark.slow
def test_maker_strategy_wins_the_maze(maze, maze_rank4):
    report = verify_mb_strategy(maze_rank4, Player.MAKER, optimal_oracle(maze))
    assert report.ok, report.to_json()["failed"]
    assert report.stats["max_punish_moves"] <= 2
