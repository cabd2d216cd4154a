"""
Regular play, composite Maker/Breaker strategies and their exhaustive verifiers.

Flow:
  - RegularPlay walks the gadget sequences: the active node's sequence is played move by
    move; when it completes, the chosen out-arc's head becomes active. A second activation
    of any node ends regular play.
  - residual_pairing gives each non-active gadget's pairing for the current state; the
    union over all of them is Breaker's end-of-play certificate.
  - punish answers a Maker deviation at one of the three non-greedy decision points with a
    reply plus a global pairing.
  - MakerStrategy / BreakerStrategy wrap the automaton, a Geography oracle and the
    punishments into deterministic move functions; verify_mb_strategy explores every
    opponent move against them.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from . import gadgets
from .errors import BudgetExceeded, PreconditionError, StrategyError
from .geography import GeoOracle, GeoState, NodeType, mover_for, path_oracle
from .hypergraph import (
    Edge,
    Hypergraph,
    MBPosition,
    Pairing,
    Player,
    is_pairing,
    mm_update,
    pairing_move,
)
from .reduction import ClaimReport, ReductionOutput, Variant, gadget_residue, reduce


VERIFY_BUDGET = int(os.environ.get("POSGAMES_NODE_BUDGET", "1000000000"))
PROGRESS_EVERY = int(os.environ.get("POSGAMES_PROGRESS_EVERY", "0"))


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _log(msg: str) -> None:
    print(f"[{_now_iso()}] [verify] {msg}", file=sys.stderr)


def regular_sequence(t: NodeType, entry_slot: Optional[str], choice_slot: Optional[str]) -> List[Tuple[Player, str]]:
    """The (mover, role) sequence of one gadget; slots are the gadget's a/b/c letters."""
    template = gadgets.sequence_template(t, entry_slot)
    if template.has_choice and choice_slot is None:
        raise PreconditionError(f"{t.value} needs an out-arc choice")
    if not template.has_choice and choice_slot is not None:
        raise PreconditionError(f"{t.value} has a single out-arc; no choice expected")
    if template.has_choice and choice_slot not in template.branches:
        raise PreconditionError(f"{choice_slot!r} is not an out-slot of {t.value}")
    return [(s.player, s.role) for s in template.steps(choice_slot)]


# -- regular play automaton -------------------------------------------------------


@dataclass
class RegularPlayState:
    active_node: str
    entry_arc: Optional[str]
    phase: int = 0
    history: List[Tuple[Player, str]] = field(default_factory=list)
    activation_counts: Dict[str, int] = field(default_factory=dict)
    choice: Optional[str] = None
    entered_via: Dict[str, str] = field(default_factory=dict)
    exited_via: Dict[str, str] = field(default_factory=dict)
    ended: bool = False
    reactivated: Optional[str] = None

    def copy(self) -> "RegularPlayState":
        return RegularPlayState(
            active_node=self.active_node,
            entry_arc=self.entry_arc,
            phase=self.phase,
            history=list(self.history),
            activation_counts=dict(self.activation_counts),
            choice=self.choice,
            entered_via=dict(self.entered_via),
            exited_via=dict(self.exited_via),
            ended=self.ended,
            reactivated=self.reactivated,
        )


class RegularPlay:
    def __init__(self, red: ReductionOutput, state: Optional[RegularPlayState] = None) -> None:
        self.red = red
        if state is None:
            start = red.instance.start
            state = RegularPlayState(active_node=start, entry_arc=None, activation_counts={start: 1})
        self.state = state

    def copy(self) -> "RegularPlay":
        return RegularPlay(self.red, self.state.copy())

    @property
    def info(self):
        return self.red.gadget(self.state.active_node)

    @property
    def ended(self) -> bool:
        return self.state.ended

    def template(self) -> gadgets.SequenceTemplate:
        info = self.info
        entry = info.slot_of(self.state.entry_arc) if self.state.entry_arc is not None else None
        return gadgets.sequence_template(info.node_type, entry)

    def steps(self) -> Tuple[gadgets.Step, ...]:
        t = self.template()
        if t.has_choice and self.state.choice is None:
            return t.prefix
        return t.steps(self.state.choice)

    def at_choice(self) -> bool:
        t = self.template()
        return t.has_choice and self.state.choice is None and self.state.phase == len(t.prefix)

    def to_move(self) -> Player:
        return Player.MAKER if len(self.state.history) % 2 == 0 else Player.BREAKER

    def next_step(self) -> gadgets.Step:
        if self.ended or self.at_choice():
            raise StrategyError("no single scripted step here")
        return self.steps()[self.state.phase]

    def step_vertex(self, step: gadgets.Step) -> str:
        return self.info.vertex(step.role)

    def options(self) -> Dict[str, Optional[str]]:
        """Scripted vertices for the next move, each mapped to the out-slot it selects."""
        if self.ended:
            return {}
        if self.at_choice():
            return {self.info.vertex(branch[0].role): slot for slot, branch in self.template().branches.items()}
        return {self.step_vertex(self.next_step()): None}

    def scripted(self, oracle: GeoOracle) -> str:
        if self.at_choice():
            arc = oracle(self.geo_state())
            slot = self.info.slot_of(arc)
            return self.info.vertex(self.template().branches[slot][0].role)
        return self.step_vertex(self.next_step())

    def play(self, vertex: str) -> None:
        opts = self.options()
        if vertex not in opts:
            raise StrategyError(f"{vertex} is not the scripted move at {self.state.active_node} phase {self.state.phase}")
        mover = self.to_move()
        if opts[vertex] is not None:
            self.state.choice = opts[vertex]
        self.state.history.append((mover, vertex))
        self.state.phase += 1
        # The last prefix move of a two-out gadget leaves the automaton at its choice.
        if not self.at_choice() and self.state.phase == len(self.steps()):
            self._advance()

    def _advance(self) -> None:
        st = self.state
        info = self.info
        exit_slot = st.choice or self.template().exit_slot
        arc = info.slots[exit_slot]
        head = self.red.instance.arc(arc).head
        st.exited_via[st.active_node] = arc
        count = st.activation_counts.get(head, 0) + 1
        st.activation_counts[head] = count
        st.active_node, st.entry_arc, st.phase, st.choice = head, arc, 0, None
        if count == 2:
            st.ended = True
            st.reactivated = head
        else:
            st.entered_via[head] = arc

    def geo_state(self) -> GeoState:
        visited = frozenset(self.state.activation_counts)
        return GeoState(self.state.active_node, visited, mover_for(visited))

    def picks(self) -> Tuple[FrozenSet[str], FrozenSet[str]]:
        maker = frozenset(v for p, v in self.state.history if p is Player.MAKER)
        breaker = frozenset(v for p, v in self.state.history if p is Player.BREAKER)
        return maker, breaker

    def status(self, node: str) -> str:
        if node == self.state.active_node:
            return "active"
        return "visited" if node in self.state.activation_counts else "intact"

    def maker_wins_at_end(self) -> bool:
        return self.ended and self.red.types[self.state.reactivated] is NodeType.M21

    def play_out(self, oracle: GeoOracle, until: Optional[str] = None) -> None:
        """Both sides conform; stop at the end or when `until` becomes active at phase 0."""
        while not self.ended:
            if until is not None and self.state.active_node == until and self.state.phase == 0:
                return
            self.play(self.scripted(oracle))


# -- end-of-play pairings ---------------------------------------------------------


def residual_pairing(rp: RegularPlay, node: str, avoid: Optional[str] = None) -> Pairing:
    """Pairing of a non-active gadget's residue; `avoid` names a vertex it must not use."""
    info = rp.red.gadget(node)
    status = rp.status(node)
    if status == "active":
        raise PreconditionError(f"{node} is the active node")
    if status == "intact":
        role = info.role(avoid) if avoid is not None else None
        return gadgets.concrete_pairing(node, info.slots, gadgets.gadget_pairing_roles(info.node_type, role))
    if info.node_type is not NodeType.M21:
        return Pairing()
    entered = info.slot_of(rp.state.entered_via[node])
    (g,) = [s for s in gadgets.SLOTS[NodeType.M21][0] if s != entered]
    p, q, z = info.vertex(f"p_{g}"), info.vertex(f"q_{g}"), info.vertex(f"z_{g}")
    if avoid == p:
        return Pairing.of([(q, z)])
    if avoid == q:
        return Pairing.of([(p, z)])
    return Pairing.of([(p, q)])


def end_pairing(rp: RegularPlay) -> Pairing:
    out = Pairing()
    for node in rp.red.instance.nodes:
        if node != rp.state.active_node:
            out = out.union(residual_pairing(rp, node))
    return out


def regular_play_residues(red: ReductionOutput, path: List[str]) -> Tuple[ClaimReport, Dict[str, Tuple[FrozenSet[str], FrozenSet[Edge]]]]:
    """
    Play regular play along a Geography node path up to the moment the last path
    node becomes active, and compare every gadget's residue with its expected state.
    """

    rp = RegularPlay(red)
    rp.play_out(path_oracle(red.instance, path), until=path[-1])
    maker, breaker = rp.picks()
    report = ClaimReport("residues")
    residues = {}
    for node in red.instance.nodes:
        info = red.gadget(node)
        got = gadget_residue(red, node, maker, breaker)
        residues[node] = got
        status = rp.status(node)
        if status == "intact":
            want = (info.vertices, info.edges)
        elif status == "active":
            entry = frozenset(red.arc_to_junction[rp.state.entry_arc]) if rp.state.entry_arc else frozenset()
            want = (info.vertices - entry, frozenset(e - entry for e in info.edges))
        else:
            entry_slot = info.slot_of(rp.state.entered_via[node]) if node in rp.state.entered_via else None
            exit_arc = rp.state.exited_via.get(node)
            choice = info.slot_of(exit_arc) if exit_arc and len(info.out_arcs) == 2 else None
            roles, role_edges = gadgets.expected_residue_roles(info.node_type, entry_slot, choice)
            want = (
                frozenset(info.vertex(r) for r in roles),
                frozenset(frozenset(info.vertex(r) for r in e) for e in role_edges),
            )
        ok = got == want
        detail = "" if ok else f"got V={sorted(got[0])} E={[sorted(e) for e in got[1]]}"
        report.add("residue", f"{node} ({status})", ok, detail)
    return report, residues


# -- punishments ------------------------------------------------------------------


@dataclass(frozen=True)
class PunishmentPlan:
    breaker_reply: str
    global_pairing: Pairing
    case: str


def decision_point(rp: RegularPlay) -> Optional[str]:
    """Which non-greedy Maker decision point the automaton is at, if any."""
    if rp.ended or rp.to_move() is not Player.MAKER:
        return None
    t = rp.info.node_type
    if t is NodeType.M12 and rp.at_choice():
        return "m12-choice"
    if t is NodeType.B12 and rp.state.choice is None and rp.state.phase == 4:
        return "b12-x3"
    if t is NodeType.B12 and rp.state.choice is not None and rp.state.phase == 8:
        return "b12-q"
    return None


def punish(pos: MBPosition, red: ReductionOutput, deviant: str, rp: RegularPlay) -> PunishmentPlan:
    """`rp` is the automaton at the decision point, before the deviant pick."""
    maker, breaker = rp.picks()
    if deviant in maker or deviant in breaker or deviant in pos.history[:-1]:
        raise PreconditionError(f"deviant {deviant} is already picked")
    point = decision_point(rp)
    if point is None:
        raise PreconditionError("not a non-greedy decision point")
    if deviant in rp.options():
        raise PreconditionError(f"{deviant} is a scripted move, not a deviation")

    info = rp.info
    v = info.node
    V = info.vertex
    role = info.role(deviant)
    head = {slot: red.instance.arc(info.slots[slot]).head for slot in ("b", "c")}
    overrides: Dict[str, str] = {}
    local: List[Tuple[str, str]] = []

    def avoid(node: str, vertex: str) -> None:
        if node == v:
            return
        if overrides.get(node, vertex) != vertex:
            raise StrategyError(f"{node} would have to avoid both {overrides[node]} and {vertex}")
        overrides[node] = vertex

    def outside() -> None:
        for u in red.owners(deviant):
            avoid(u, deviant)

    if point == "m12-choice":
        if role in ("y3", "z_b", "z_c"):
            reply, case = V("z1"), "1a"
            local = [("z2", "p_c")]
            avoid(head["c"], V("p_c"))
        elif role in ("p_b", "q_b"):
            reply, case = V("z1"), "1b"
            local = [("z2", "p_c")]
            avoid(head["b"], deviant)
            avoid(head["c"], V("p_c"))
        elif role in ("p_c", "q_c"):
            reply, case = V("z2"), "1b"
            local = [("z1", "p_b")]
            avoid(head["c"], deviant)
            avoid(head["b"], V("p_b"))
        elif role is None:
            reply, case = V("y3"), "1c"
            local = [("z1", "z2"), ("p_b", "q_b"), ("p_c", "q_c")]
            outside()
        else:
            raise PreconditionError(f"{deviant} is not available at an M12 choice point")
    elif point == "b12-x3":
        if role == "y3":
            reply, case = V("y4"), "2a"
            local = [("p_b", "x3"), ("p_c", "q_c")]
            avoid(head["b"], V("p_b"))
        elif role == "y4":
            reply, case = V("y3"), "2a"
            local = [("p_c", "x3"), ("p_b", "q_b")]
            avoid(head["c"], V("p_c"))
        elif role in ("p_b", "q_b", "p_c", "q_c", "y5"):
            reply, case = V("x3"), "2b"
            local = [("y3", "y4")]
            if role != "y5":
                avoid(head[role[2:]], deviant)
        elif role is None:
            reply, case = V("x3"), "2c"
            local = [("y3", "y4")]
            outside()
        else:
            raise PreconditionError(f"{deviant} is not available before x3")
    else:
        x_slot = rp.state.choice
        (y_slot,) = [s for s in ("b", "c") if s != x_slot]
        w_x, w_y = head[x_slot], head[y_slot]
        p_x, q_x = f"p_{x_slot}", f"q_{x_slot}"
        p_y, q_y = f"p_{y_slot}", f"q_{y_slot}"
        if role == "y5":
            reply, case = V(q_x), "3a"
            local = [(p_y, q_y)]
        elif role in (p_y, q_y):
            reply, case = V("y5"), "3b"
            avoid(w_x, V(p_x))
            avoid(w_y, deviant)
        elif role is None and w_x in red.owners(deviant):
            reply, case = V(q_x), "3c"
            local = [(p_y, q_y)]
            outside()
        elif role is None:
            reply, case = V("y5"), "3c"
            avoid(w_x, V(p_x))
            outside()
        else:
            raise PreconditionError(f"{deviant} is not available before {q_x}")

    pairs: Set[FrozenSet[str]] = {frozenset((V(a), V(b))) for a, b in local}
    for node in red.instance.nodes:
        if node != v:
            pairs |= residual_pairing(rp, node, overrides.get(node)).pairs
    dead = breaker | {reply}
    pairing = Pairing(frozenset(p for p in pairs if not (p & dead)))
    return PunishmentPlan(reply, pairing, case)


# -- composite strategies -------------------------------------------------------


@dataclass(frozen=True)
class Decision:
    vertex: str
    kind: str
    pairing: Optional[Pairing] = None
    key: Tuple[Any, ...] = ()
    punish_moves: Optional[int] = None


def _singletons(edges: Iterable[Edge]) -> List[str]:
    return sorted({next(iter(e)) for e in edges if len(e) == 1})


def double_threat_move(pos: MBPosition) -> Optional[str]:
    """A Maker pick after which two distinct single-vertex edges remain."""
    updated = pos.updated()
    for v in pos.unpicked():
        threats = {next(iter(e - {v})) for e in updated.edges if v in e and len(e) == 2}
        if len(threats) >= 2:
            return v
    return None


class MakerStrategy:
    """
    Regular play for Maker, with Alice's oracle at M12 choices. After a Breaker
    deviation Maker completes a single-vertex edge or builds a double threat.
    """

    def __init__(self, red: ReductionOutput, oracle: GeoOracle) -> None:
        self.red = red
        self.oracle = oracle

    def _replay(self, pos: MBPosition) -> Tuple[RegularPlay, Optional[int], bool]:
        """Automaton after the on-script prefix, the ply of a Breaker deviation, and whether Maker left the script."""
        rp = RegularPlay(self.red)
        for i, v in enumerate(pos.history):
            if rp.ended:
                return rp, None, True
            if v not in rp.options():
                if i % 2 == 1:
                    return rp, i, False
                return rp, None, True
            rp.play(v)
        return rp, None, False

    def decide(self, pos: MBPosition) -> Decision:
        singles = _singletons(pos.updated().edges)
        rp, deviation, off_script = self._replay(pos)
        # Maker moves from the deviation up to and including this one.
        spent = (len(pos.history) - deviation + 1) // 2 if deviation is not None else None
        if singles:
            return Decision(singles[0], "threat", punish_moves=spent)
        if deviation is not None:
            v = double_threat_move(pos)
            if v is None:
                raise StrategyError("Breaker deviated but no double threat exists")
            return Decision(v, "double-threat", punish_moves=spent)
        if off_script:
            raise StrategyError("position not reachable by this strategy")
        if rp.ended:
            raise StrategyError("regular play ended without a Maker threat")
        return Decision(rp.scripted(self.oracle), "script")

    def __call__(self, pos: MBPosition) -> str:
        return self.decide(pos).vertex


class _BreakerReplay:
    def __init__(self, red: ReductionOutput, oracle: GeoOracle) -> None:
        self.red = red
        self.oracle = oracle
        self.game = RegularPlay(red)
        self.virtual: List[Tuple[str, str]] = []
        self.pairing: Optional[Pairing] = None
        self.kind = "script"

    def copy(self) -> "_BreakerReplay":
        out = _BreakerReplay(self.red, self.oracle)
        out.game = self.game.copy()
        out.virtual = list(self.virtual)
        out.pairing = self.pairing
        out.kind = self.kind
        return out

    def full_pairing(self) -> Pairing:
        extra = Pairing.of(self.virtual)
        return extra if self.pairing is None else self.pairing.union(extra)

    def key(self) -> Tuple[Any, ...]:
        # Together with the pick sets this fixes every later Breaker answer.
        st = self.game.state
        held = tuple(self.pairing.sorted_pairs()) if self.pairing is not None else None
        return (st.active_node, st.phase, st.choice, st.ended, frozenset(self.virtual), self.kind, held)

    def decide(self, pos: MBPosition) -> Decision:
        """Answer Maker's last pick, advancing this replay in place."""
        reply = self.respond(pos, pos.history[-1])
        pairing = self.full_pairing() if self.pairing is not None else None
        return Decision(reply, self.kind, pairing, self.key())

    def respond(self, pos: MBPosition, d: str) -> str:
        """Breaker's answer to Maker's pick d; pos already contains d."""
        unpicked = pos.unpicked()
        if self.pairing is not None:
            return pairing_move(pos.board, self.full_pairing(), d, unpicked)
        for x, y in self.virtual:
            if d in (x, y):
                partner = y if d == x else x
                return partner if partner in unpicked else unpicked[0]
        game = self.game
        while True:
            if game.ended:
                if game.maker_wins_at_end():
                    self.kind = "lost"
                    return unpicked[0]
                self.pairing = end_pairing(game)
                self.kind = "end-pairing"
                return pairing_move(pos.board, self.full_pairing(), d, unpicked)
            if d in game.options():
                game.play(d)
                reply = game.scripted(self.oracle)
                game.play(reply)
                if game.ended and not game.maker_wins_at_end():
                    self.pairing = end_pairing(game)
                    self.kind = "end-pairing"
                return reply
            if decision_point(game) is not None:
                plan = punish(pos, self.red, d, game)
                self.pairing = plan.global_pairing
                self.kind = f"punish-{plan.case}"
                return plan.breaker_reply
            step = game.next_step()
            if step.label != "g":
                raise StrategyError(f"unexpected non-greedy step {step.role} at {game.state.active_node}")
            x = game.step_vertex(step)
            y = game.step_vertex(game.steps()[game.state.phase + 1])
            game.play(x)
            game.play(y)
            self.virtual.append((x, y))
            if d == y:
                return x


class BreakerStrategy:
    """
    Regular play for Breaker, with Bob's oracle at B12 choices. A Maker deviation at a
    greedy point is absorbed by virtually playing the greedy round and answering inside
    that pair; at the three non-greedy points Breaker punishes and switches to a pairing.
    """

    def __init__(self, red: ReductionOutput, oracle: GeoOracle) -> None:
        self.red = red
        self.oracle = oracle

    def replay(self, pos: MBPosition) -> Tuple[_BreakerReplay, Optional[str]]:
        """Replays the history; returns the replay and the reply to the last Maker pick if pending."""
        state = _BreakerReplay(self.red, self.oracle)
        prefix = MBPosition(pos.board)
        reply: Optional[str] = None
        for i, v in enumerate(pos.history):
            prefix = prefix.play(v)
            if i % 2 == 0:
                reply = state.respond(prefix, v)
            else:
                if v != reply:
                    raise StrategyError(f"history deviates from this strategy at ply {i}: {v} instead of {reply}")
                reply = None
        return state, reply

    def start(self) -> _BreakerReplay:
        return _BreakerReplay(self.red, self.oracle)

    def decide(self, pos: MBPosition) -> Decision:
        state, reply = self.replay(pos)
        if reply is None:
            raise StrategyError("Breaker is not to move")
        pairing = state.full_pairing() if state.pairing is not None else None
        return Decision(reply, state.kind, pairing, state.key())

    def __call__(self, pos: MBPosition) -> str:
        return self.decide(pos).vertex


def maker_strategy(pos: MBPosition, red: ReductionOutput, oracle: GeoOracle) -> str:
    return MakerStrategy(red, oracle)(pos)


def breaker_strategy(pos: MBPosition, red: ReductionOutput, oracle: GeoOracle) -> str:
    return BreakerStrategy(red, oracle)(pos)


# -- verifiers ----------------------------------------------------------------------


def _pairing_holds(pos: MBPosition, pairing: Pairing) -> bool:
    alive = frozenset(pos.unpicked())
    return is_pairing(pos.updated(), pairing.restrict_to(alive)).ok


def verify_mb_strategy(
    red: ReductionOutput,
    side: Player,
    oracle: GeoOracle,
    budget: int = VERIFY_BUDGET,
) -> ClaimReport:
    """
    Explore every opponent move against the side's composite strategy. Leaves:
    an empty updated edge is a Maker win; no edges left, no vertices left, or a valid
    pairing held by Breaker right after its move is a Breaker win.
    """
    if red.variant is not Variant.RANK4:
        raise PreconditionError("strategy verification runs on the rank4 board")
    strategy: Any = MakerStrategy(red, oracle) if side is Player.MAKER else BreakerStrategy(red, oracle)
    report = ClaimReport(f"mb-strategy-{side.value.lower()}")
    stats = {"nodes": 0, "maker_leaves": 0, "breaker_leaves": 0, "pairing_leaves": 0, "strategy_errors": 0, "max_punish_moves": 0}
    memo: Dict[Any, Optional[Tuple[str, ...]]] = {}
    failure_detail: List[str] = []

    def leaf_ok(winner: Player, pos: MBPosition) -> Optional[Tuple[str, ...]]:
        stats["maker_leaves" if winner is Player.MAKER else "breaker_leaves"] += 1
        return None if winner is side else pos.history

    def explore(pos: MBPosition, tracker: Optional[_BreakerReplay]) -> Optional[Tuple[str, ...]]:
        stats["nodes"] += 1
        if stats["nodes"] > budget:
            raise BudgetExceeded("verify_mb_strategy", stats["nodes"])
        if PROGRESS_EVERY and stats["nodes"] % PROGRESS_EVERY == 0:
            _log(f"{report.name}: {stats['nodes']} nodes, memo {len(memo)}")
        updated = pos.updated()
        if frozenset() in updated.edges:
            return leaf_ok(Player.MAKER, pos)
        if not updated.edges or not pos.unpicked():
            return leaf_ok(Player.BREAKER, pos)
        if pos.to_move is side:
            try:
                decision = tracker.decide(pos) if tracker is not None else strategy.decide(pos)
            except StrategyError as exc:
                stats["strategy_errors"] += 1
                failure_detail.append(str(exc))
                return pos.history
            if decision.punish_moves is not None:
                stats["max_punish_moves"] = max(stats["max_punish_moves"], decision.punish_moves)
            child = pos.play(decision.vertex)
            if side is Player.BREAKER and decision.pairing is not None and _pairing_holds(child, decision.pairing):
                stats["pairing_leaves"] += 1
                stats["breaker_leaves"] += 1
                return None
            return explore(child, tracker)
        key: Any = (pos.maker_picks, pos.breaker_picks)
        if tracker is not None:
            key = key + (tracker.key(),)
        if key in memo:
            return memo[key]
        result = None
        for v in pos.unpicked():
            result = explore(pos.play(v), tracker.copy() if tracker is not None else None)
            if result is not None:
                break
        memo[key] = result
        return result

    _log(f"{report.name}: exploring {len(red.board.vertices)} vertices")
    # Breaker's answers are tracked incrementally down each line instead of replayed from the root.
    root = strategy.start() if side is Player.BREAKER else None
    counterexample = explore(MBPosition(red.board), root)
    stats["memo"] = len(memo)
    report.stats.update(stats)
    detail = failure_detail[-1] if failure_detail and counterexample is not None else ""
    report.add("strategy-wins", f"{side.value} on {red.variant.value}", counterexample is None, detail, counterexample or ())
    if side is Player.MAKER:
        report.add("punish-within-two-moves", "Maker", stats["max_punish_moves"] <= 2, f"max {stats['max_punish_moves']}")
    _log(f"{report.name}: done, {stats['nodes']} nodes, ok={report.ok}")
    return report


def _all_lines(red: ReductionOutput) -> Iterable[RegularPlay]:
    """Every regular-play state reachable under some choice at each choice point."""
    stack = [RegularPlay(red)]
    while stack:
        rp = stack.pop()
        yield rp
        if rp.ended:
            continue
        for v in sorted(rp.options()):
            child = rp.copy()
            child.play(v)
            stack.append(child)


def check_punishments(red: ReductionOutput) -> ClaimReport:
    """At every non-greedy decision point of every line, every deviant gets a valid pairing."""
    report = ClaimReport("punishments")
    points = 0
    for rp in _all_lines(red):
        point = decision_point(rp)
        if point is None:
            continue
        points += 1
        history = tuple(v for _, v in rp.state.history)
        base = MBPosition(red.board, history)
        for x in base.unpicked():
            if x in rp.options():
                continue
            pos = base.play(x)
            try:
                plan = punish(pos, red, x, rp)
            except (StrategyError, PreconditionError) as exc:
                report.add("punish-defined", f"{rp.state.active_node} {point} x={x}", False, str(exc), pos.history)
                continue
            after = pos.play(plan.breaker_reply)
            ok = plan.global_pairing.is_disjoint() and _pairing_holds(after, plan.global_pairing)
            report.add("punish-pairing", f"{rp.state.active_node} {point} case {plan.case} x={x}", ok, "", () if ok else after.history)
    report.stats["decision_points"] = points
    return report


# -- Maker-Maker claims -----------------------------------------------------------------


def _blue_star_forms(red: ReductionOutput) -> Set[FrozenSet[str]]:
    forms = set()
    for node, info in red.node_to_gadget.items():
        if info.node_type is NodeType.M12:
            for slot in ("b", "c"):
                forms.add(frozenset({info.vertex(f"p_{slot}"), info.vertex(f"q_{slot}"), info.vertex(f"z_{slot}")}))
    return forms


def check_mm_opening(red: ReductionOutput) -> ClaimReport:
    """
    Ten-vertex start gadget: each of the two opening greedy rounds is forced for SP,
    checked over every pair of SP answers.
    """
    report = ClaimReport("mm-opening")
    start = red.gadget(red.instance.start)
    board = red.board
    p_a, q_a, y1, y2 = (start.vertex(r) for r in ("p_a", "q_a", "y1", "y2"))
    zs = [f"{start.node}.z{i}" for i in range(1, 11)]
    for x, y in ((p_a, y1), (q_a, y2)):
        ok = all(x in e for e in board.edges if y in e)
        report.add("opening-greedy-containment", f"{x},{y}", ok, "", (x, y))

    branches = failed = 0
    first_failure: Tuple[str, ...] = ()
    rounds = ((p_a, y1, zs[:5], ()), (q_a, y2, zs[5:], (p_a, y1)))
    for x, y, group, prefix in rounds:
        after_x = prefix + (x,)
        for sp1 in sorted(set(board.vertices) - set(after_x) - {y}):
            h = after_x + (sp1, y)
            for sp2 in sorted(set(board.vertices) - set(h)):
                branches += 1
                line = h + (sp2,)
                free = [z for z in group if z not in line]
                ok = len(free) >= 3 and _fp_finishes(board, line, free)
                if not ok:
                    failed += 1
                    first_failure = first_failure or line
                    report.add("opening-fp-wins", f"{x} round", False, f"{len(free)} z left", line)
    report.add("opening-fp-wins", "all SP deviations", failed == 0, f"{branches} branches", first_failure)

    rank4 = reduce(red.instance, Variant.RANK4)
    line = (p_a, y1, q_a, y2)
    red_mm, blue_mm = mm_update(board, line[0::2], line[1::2])
    red_r4, blue_r4 = mm_update(rank4.board, line[0::2], line[1::2])
    report.add("opening-families-match", "mm-uniform vs rank4", red_mm == red_r4 and blue_mm == blue_r4, "", line)
    report.stats["branches"] = branches
    return report


def _fp_finishes(board: Hypergraph, line: Tuple[str, ...], free: List[str]) -> bool:
    """FP to move after `line`: picking a free z leaves two red singletons and no blue singleton."""
    fp, sp = set(line[0::2]), set(line[1::2])
    red, blue = mm_update(board, fp | {free[0]}, sp)
    singles = _singletons(red)
    return len(singles) >= 2 and all(len(e) >= 2 for e in blue)


def verify_mm_claims(red: ReductionOutput, oracle: GeoOracle) -> ClaimReport:
    report = ClaimReport("mm-claims")
    board = red.board
    if red.variant is Variant.MM_UNIFORM:
        report.extend(check_mm_opening(red))
    elif red.variant is not Variant.RANK4:
        raise PreconditionError("Maker-Maker claims are stated for rank4 and mm-uniform boards")
    forms = _blue_star_forms(red)
    rp = RegularPlay(red)
    moves = 0
    opening = {red.gadget(red.instance.start).vertex(r) for r in ("p_a", "q_a")}
    while not rp.ended:
        fp, sp = rp.picks()
        mover = rp.to_move()
        v = rp.scripted(oracle)
        label = "" if rp.at_choice() else rp.next_step().label
        red_e, blue_e = mm_update(board, fp, sp)
        where = f"move {moves + 1} {v}"
        # Replayable line through this move; `solve --moves` takes it as is.
        line = tuple(u for _, u in rp.state.history) + (v,)
        if mover is Player.MAKER and label == "g":
            y = rp.step_vertex(rp.steps()[rp.state.phase + 1])
            contain = all(v in e for e in red_e | blue_e if y in e)
            report.add("greedy-round-containment", where, contain, "", line)
            red2, blue2 = mm_update(board, fp | {v}, sp)
            if not (red.variant is Variant.MM_UNIFORM and v in opening):
                report.add("greedy-round-red-threat", where, frozenset({y}) in red2, "", line)
            report.add("greedy-round-no-blue-threat", where, all(len(e) >= 2 for e in blue2), "", line)
        if mover is Player.BREAKER:
            touching = [e for e in blue_e if v in e]
            role = rp.info.role(v)
            if rp.info.node_type is NodeType.M12 and role in ("z1", "z2"):
                slot = "b" if role == "z1" else "c"
                want = frozenset({v, rp.info.vertex(f"p_{slot}"), rp.info.vertex(f"q_{slot}"), rp.info.vertex(f"z_{slot}")})
                report.add("sp-blue-exception", where, touching == [want], "", line)
            else:
                report.add("sp-no-blue-edge", where, not touching, "", line)
        rp.play(v)
        moves += 1
        fp, sp = rp.picks()
        red_e, blue_e = mm_update(board, fp, sp)
        report.add("no-winner-during-play", where, frozenset() not in red_e and frozenset() not in blue_e, "", line)
        if moves >= 3:
            star = all(len(e) == 4 or (len(e) == 3 and e in forms) for e in blue_e)
            report.add("blue-star-property", where, star, "", line)

    fp, sp = rp.picks()
    line = tuple(u for _, u in rp.state.history)
    red_e, blue_e = mm_update(board, fp, sp)
    alive = frozenset(v for v in board.vertices if v not in fp and v not in sp)
    if rp.maker_wins_at_end():
        report.add("fp-threat-at-end", rp.state.reactivated, any(len(e) == 1 for e in red_e), "", line)
        report.add("sp-no-short-blue", rp.state.reactivated, all(len(e) > 2 for e in blue_e), "", line)
    else:
        certificate = end_pairing(rp).restrict_to(alive)
        red_board = Hypergraph(tuple(sorted(alive)), red_e)
        blue_board = Hypergraph(tuple(sorted(alive)), blue_e)
        check = is_pairing(red_board, certificate)
        report.add("sp-draw-pairing", "red family", check.ok, "" if check.ok else f"{check.reason} {list(check.detail)}", line)
        junctions = [
            frozenset(p for p in e if red.is_junction(p))
            for e in blue_e
            if e in forms
        ]
        augmented = certificate.union(Pairing(frozenset(junctions)))
        check = is_pairing(blue_board, augmented)
        report.add("fp-draw-pairing", "blue family", check.ok, "" if check.ok else f"{check.reason} {list(check.detail)}", line)
    report.stats["moves"] = moves
    report.stats["maker_wins_at_end"] = rp.maker_wins_at_end()
    return report
